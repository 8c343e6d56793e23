"""
Tests for Laplace sampling and seed derivation.
"""
import numpy as np
import pytest
from scipy import stats

from app.core.exceptions import InvalidScaleError
from app.exec.sampling import derive_seeds, laplace_from_uniform, make_rng, sample_laplace


def test_inverse_cdf():
    """Test the inverse CDF at the median and its symmetry."""
    assert laplace_from_uniform(0.0, 2.0) == 0.0
    assert laplace_from_uniform(0.25, 2.0) == pytest.approx(-laplace_from_uniform(-0.25, 2.0))
    assert laplace_from_uniform(0.25, 2.0) == pytest.approx(-2.0 * np.log(0.5))


def test_laplace_distribution():
    """Test mean, variance and shape of the draws."""
    rng = make_rng(3)
    draws = np.array([sample_laplace(2.0, rng) for _ in range(100000)])
    assert abs(draws.mean()) < 0.05
    assert draws.var() == pytest.approx(8.0, rel=0.03)
    assert stats.kstest(draws, "laplace", args=(0.0, 2.0)).pvalue > 0.001


def test_invalid_scale():
    """Test that a non-positive scale is rejected."""
    with pytest.raises(InvalidScaleError):
        sample_laplace(0.0, make_rng(0))


def test_derived_seeds():
    """Test that child seeds are reproducible and distinct."""
    seeds = derive_seeds(5, 4)
    assert seeds == derive_seeds(5, 4)
    assert len(set(seeds)) == 4
    assert seeds != derive_seeds(6, 4)
