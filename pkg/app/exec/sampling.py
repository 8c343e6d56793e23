"""
Laplace sampling and seed derivation.
"""
from typing import List, Optional

import numpy as np

from app.core.exceptions import InvalidScaleError


def laplace_from_uniform(u: float, scale: float) -> float:
    """Inverse CDF of Laplace(0, scale) at u + 1/2, for u in (-1/2, 1/2)."""
    if scale <= 0:
        raise InvalidScaleError(f"Laplace scale must be positive, got {scale}")
    return float(-scale * np.sign(u) * np.log1p(-2.0 * abs(u)))


def sample_laplace(scale: float, rng: np.random.Generator) -> float:
    """
    Draw from Laplace(0, scale).

    Args:
        scale: Positive scale b (variance 2b^2)
        rng: Seeded generator

    Returns:
        float: One draw

    Raises:
        InvalidScaleError: If scale <= 0
    """
    u = rng.uniform(-0.5, 0.5)
    while u == -0.5:
        u = rng.uniform(-0.5, 0.5)
    return laplace_from_uniform(u, scale)


def make_rng(seed: Optional[int]) -> np.random.Generator:
    return np.random.default_rng(seed)


def derive_seeds(seed: int, count: int) -> List[int]:
    """Independent child seeds of a master seed."""
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(count)]
