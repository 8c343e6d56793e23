"""
Global-best particle swarm optimization.

Positions start uniform over the box and velocities at zero. After every
move a coordinate leaving the box is clamped and its velocity zeroed.
Maximization is done by negating the objective at the call site.
"""
import logging
import math
from concurrent.futures import Executor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from app.core.config import settings

logger = logging.getLogger(__name__)

Objective = Callable[[np.ndarray], float]


@dataclass(frozen=True)
class SearchSpace:
    """Box [lower, upper] of the search, one pair per dimension."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("lower and upper must be vectors of equal length")
        if np.any(lower > upper):
            raise ValueError("lower bound above upper bound")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def from_bounds(cls, bounds: Sequence[Sequence[float]]) -> "SearchSpace":
        return cls(np.array([b[0] for b in bounds], dtype=float), np.array([b[1] for b in bounds], dtype=float))

    @property
    def dims(self) -> int:
        return len(self.lower)

    def clip(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)

    def contains(self, x: np.ndarray) -> bool:
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))


@dataclass(frozen=True)
class SwarmConfig:
    particles: int = settings.PSO_PARTICLES
    iterations: int = settings.PSO_ITERATIONS
    inertia: float = settings.PSO_INERTIA
    cognitive: float = settings.PSO_COGNITIVE
    social: float = settings.PSO_SOCIAL
    tolerance: float = settings.EARLY_STOP_TOLERANCE
    patience: int = settings.EARLY_STOP_PATIENCE
    seed: Optional[int] = None

    def __post_init__(self):
        if self.particles < 2:
            raise ValueError("a swarm needs at least two particles")
        if min(self.inertia, self.cognitive, self.social) < 0:
            raise ValueError("swarm coefficients must be non-negative")
        if self.iterations < 0 or self.patience < 0:
            raise ValueError("iterations and patience must be non-negative")


@dataclass
class SwarmResult:
    best_x: np.ndarray
    best_f: float
    history: List[float] = field(default_factory=list)
    evaluations: int = 0

    @property
    def iterations(self) -> int:
        return len(self.history)


def _finite(value: float) -> float:
    value = float(value)
    return value if math.isfinite(value) else math.inf


def _evaluate(objective: Objective, positions: np.ndarray, executor: Optional[Executor]) -> np.ndarray:
    if executor is None:
        values = [objective(x) for x in positions]
    else:
        values = list(executor.map(objective, list(positions)))
    return np.array([_finite(v) for v in values], dtype=float)


def _stalled(history: List[float], cfg: SwarmConfig) -> bool:
    if cfg.patience == 0 or len(history) <= cfg.patience:
        return False
    return abs(history[-1] - history[-1 - cfg.patience]) <= cfg.tolerance


def pso_minimize(
    objective: Objective,
    space: SearchSpace,
    cfg: SwarmConfig,
    executor: Optional[Executor] = None,
) -> SwarmResult:
    """
    Minimize an objective over a box.

    Args:
        objective: Pure function of a position vector; non-finite values count as +inf
        space: Search box
        cfg: Swarm size, iteration cap, coefficients and early stop
        executor: Optional pool evaluating one iteration's particles in parallel

    Returns:
        SwarmResult: Global best position and value, and the per-iteration best
    """
    rng = np.random.default_rng(cfg.seed)
    n, d = cfg.particles, space.dims
    positions = rng.uniform(space.lower, space.upper, size=(n, d))
    velocities = np.zeros((n, d))
    values = _evaluate(objective, positions, executor)
    evaluations = n

    personal_x, personal_f = positions.copy(), values.copy()
    best = int(np.argmin(personal_f))
    best_x, best_f = personal_x[best].copy(), float(personal_f[best])
    history = [best_f]

    for step in range(cfg.iterations):
        r1 = rng.random((n, d))
        r2 = rng.random((n, d))
        velocities = (
            cfg.inertia * velocities
            + cfg.cognitive * r1 * (personal_x - positions)
            + cfg.social * r2 * (best_x - positions)
        )
        positions = positions + velocities
        outside = (positions < space.lower) | (positions > space.upper)
        positions = space.clip(positions)
        velocities[outside] = 0.0

        values = _evaluate(objective, positions, executor)
        evaluations += n
        improved = values < personal_f
        personal_x[improved] = positions[improved]
        personal_f[improved] = values[improved]
        best = int(np.argmin(personal_f))
        if personal_f[best] < best_f:
            best_x, best_f = personal_x[best].copy(), float(personal_f[best])
        history.append(best_f)
        logger.debug("iteration %d: best %s", step + 1, best_f)
        if _stalled(history, cfg):
            logger.debug("early stop after %d iterations", step + 1)
            break

    return SwarmResult(best_x=best_x, best_f=best_f, history=history, evaluations=evaluations)
