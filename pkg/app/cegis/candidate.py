"""
Candidates: values of the alignment, scale and budget-bound holes.
"""
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.align.program import TransformedProgram
from app.align.templates import zero_aligned
from app.core.config import settings


@dataclass(frozen=True)
class Candidate:
    theta: Tuple[float, ...]
    lam: Tuple[float, ...]
    gamma: Tuple[float, ...] = ()

    @classmethod
    def null(cls, t: TransformedProgram) -> "Candidate":
        """The bootstrap mechanism: zero alignments and unit scales."""
        return cls((0.0,) * t.theta_count, (1.0,) * t.lambda_count, (1.0,) * t.gamma_count)

    @classmethod
    def from_vector(cls, x: Sequence[float], t: TransformedProgram, grid: Optional[float] = None) -> "Candidate":
        """Split an optimizer position into holes, snapping theta to the grid."""
        x = np.asarray(x, dtype=float)
        a, b = t.theta_count, t.theta_count + t.lambda_count
        theta = x[:a]
        if grid:
            theta = snap(theta, grid)
        return cls(_floats(theta), _floats(x[a:b]), _floats(x[b:b + t.gamma_count]))

    @classmethod
    def reference(cls, t: TransformedProgram) -> "Candidate":
        if not t.reference:
            raise ValueError(f"{t.name} carries no reference candidate")
        return cls(t.reference["theta"], t.reference["lambda"], t.reference["gamma"])

    def vector(self) -> np.ndarray:
        return np.array(self.theta + self.lam + self.gamma, dtype=float)

    def snapped(self, grid: float) -> "Candidate":
        return Candidate(_floats(snap(np.asarray(self.theta, dtype=float), grid)), self.lam, self.gamma)

    def rounded(self, method: str = "nearest") -> "Candidate":
        """Round the scale and bound coefficients to integers (`nearest` or `up`)."""
        op = np.ceil if method == "up" else np.round
        lam = _floats(op(np.asarray(self.lam, dtype=float)))
        gamma = _floats(op(np.asarray(self.gamma, dtype=float)))
        return Candidate(self.theta, lam, gamma)

    def removed(self, t: TransformedProgram) -> Tuple[str, ...]:
        """Sampling statements whose alignment is identically zero."""
        return zero_aligned(t.alignments, self.theta)

    def as_dict(self) -> Dict[str, List[float]]:
        return {"theta": list(self.theta), "lambda": list(self.lam), "gamma": list(self.gamma)}


def snap(values: np.ndarray, grid: float = settings.THETA_GRID) -> np.ndarray:
    snapped = np.round(values / grid) * grid
    # adding 0.0 turns -0.0 into 0.0
    return snapped + 0.0


def _floats(values) -> Tuple[float, ...]:
    return tuple(float(v) for v in values)
