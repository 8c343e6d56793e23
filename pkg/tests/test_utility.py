"""
Tests for the default and custom utility functions.
"""
import math

import pytest

from app.align.transform import transform
from app.cegis.candidate import Candidate
from app.cegis.utility import CUSTOM, UtilitySpec, accuracy, mean_accuracy, utility_custom, utility_default
from app.sketch.generator import enumerate_subsketches

SVT_SAMPLE = {"T": 0, "N": 1, "size": 3}


@pytest.fixture(scope="module")
def release_full(release):
    sk = enumerate_subsketches(release)[0]
    return sk, transform(sk)


def test_sum_of_variances(release_full):
    """Test the negated sum of 2 * sigma^2 over retained samples."""
    _, t = release_full
    cand = Candidate((0.0, -1.0, 1.0, 0.0), (3.0, 30.0))
    assert utility_default(t, cand, {"eps": 1.0}) == pytest.approx(-1818.0)


def test_budget_scales_variance(release_full):
    """Test that the scales are evaluated at the given budget."""
    _, t = release_full
    cand = Candidate((0.0, -1.0, 1.0, 0.0), (3.0, 30.0))
    assert utility_default(t, cand, {"eps": 3.0}) == pytest.approx(-202.0)


def test_removed_samples_cost_nothing(release_full):
    """Test that zero-aligned samples do not count."""
    _, t = release_full
    assert utility_default(t, Candidate((0.0,) * 4, (3.0, 30.0)), {"eps": 1.0}) == 0.0
    assert utility_default(t, Candidate((0.0, -1.0, 0.0, 0.0), (3.0, 30.0)), {"eps": 1.0}) == pytest.approx(-18.0)


def test_non_positive_scale_is_invalid(release_full):
    """Test that a retained zero scale has no utility."""
    _, t = release_full
    assert utility_default(t, Candidate((0.0, -1.0, 0.0, 0.0), (0.0, 1.0)), {"eps": 1.0}) == -math.inf


def test_accuracy():
    """Test true and false positives with the shortfall penalty."""
    truth = [True] * 25 + [False] * 75
    assert accuracy(truth, truth, 20, 1.0) == 25
    reports = [True] * 10 + [False] * 15 + [True] * 5 + [False] * 70
    assert accuracy(truth, reports, 20, 1.0) == 0
    assert accuracy(truth, [False] * 100, 20, 2.0) == -40


def test_mean_accuracy_of_exact_mechanism(svt):
    """Test that the source scores its own noise-free answers."""
    spec = UtilitySpec(CUSTOM, SVT_SAMPLE, {"q": [-1, 2, 3]}, min_outputs=1)
    assert mean_accuracy(svt, svt, spec, [1, 2, 3]) == 1.0


def test_custom_utility_without_noise(svt):
    """Test the custom utility of a candidate removing every sample."""
    sk = enumerate_subsketches(svt)[-1]
    t = transform(sk)
    spec = UtilitySpec(CUSTOM, SVT_SAMPLE, {"q": [-1, 2, 3]}, min_outputs=1, repetitions=3)
    cand = Candidate((0.0,) * t.theta_count, (1.0,) * t.lambda_count)
    assert spec.is_custom
    assert utility_custom(sk, t, cand, spec, seed=0) == 1.0


def test_custom_utility_rejects_zero_scale(svt):
    """Test that a retained sample with a zero scale gets no custom utility."""
    sk = enumerate_subsketches(svt)[-1]
    t = transform(sk)
    spec = UtilitySpec(CUSTOM, SVT_SAMPLE, {"q": [-1, 2, 3]}, min_outputs=1, repetitions=3)
    cand = Candidate((1.0,) * t.theta_count, (0.0,) * t.lambda_count)
    assert utility_custom(sk, t, cand, spec, seed=0) == -math.inf
