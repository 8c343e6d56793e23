"""
Tests for the particle swarm optimizer.
"""
import math

import numpy as np
import pytest

from app.swarm.pso import SearchSpace, SwarmConfig, pso_minimize


def sphere(x):
    return float(np.sum(x ** 2))


def test_sphere():
    """Test that the swarm finds the minimum of a sphere."""
    space = SearchSpace.from_bounds([(-5, 5), (-5, 5)])
    result = pso_minimize(sphere, space, SwarmConfig(particles=30, iterations=400, patience=0, seed=1))
    assert result.best_f < 1e-3
    assert space.contains(result.best_x)


def test_reproducible():
    """Test that a seed fixes the search."""
    space = SearchSpace.from_bounds([(-5, 5)] * 3)
    cfg = SwarmConfig(particles=10, iterations=20, patience=0, seed=4)
    assert pso_minimize(sphere, space, cfg).best_f == pso_minimize(sphere, space, cfg).best_f


def test_history_is_monotone():
    """Test that the global best never gets worse."""
    result = pso_minimize(
        sphere, SearchSpace.from_bounds([(-5, 5)] * 4), SwarmConfig(particles=10, iterations=50, patience=0, seed=2)
    )
    assert all(b <= a for a, b in zip(result.history, result.history[1:]))
    assert result.evaluations == 10 * 51


def test_positions_stay_in_box():
    """Test that every evaluated position lies in the box."""
    space = SearchSpace.from_bounds([(0, 1), (2, 3)])
    seen = []

    def objective(x):
        seen.append(np.array(x))
        return -float(x[0] + x[1])

    pso_minimize(objective, space, SwarmConfig(particles=8, iterations=30, patience=0, seed=0))
    assert all(space.contains(x) for x in seen)


def test_early_stop():
    """Test that a flat objective stops after the patience window."""
    result = pso_minimize(
        lambda x: 1.0,
        SearchSpace.from_bounds([(-1, 1)]),
        SwarmConfig(particles=4, iterations=100, tolerance=0.0, patience=5, seed=0),
    )
    assert result.iterations == 6


def test_non_finite_values():
    """Test that non-finite objective values count as +inf."""
    result = pso_minimize(
        lambda x: math.nan if x[0] < 0 else float(x[0]),
        SearchSpace.from_bounds([(-1, 1)]),
        SwarmConfig(particles=10, iterations=30, patience=0, seed=3),
    )
    assert math.isfinite(result.best_f)
    assert result.best_x[0] >= 0


def test_invalid_configuration():
    """Test the validation of boxes and swarm settings."""
    with pytest.raises(ValueError):
        SearchSpace.from_bounds([(1, 0)])
    with pytest.raises(ValueError):
        SwarmConfig(particles=1)
