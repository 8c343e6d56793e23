"""
Utility functions ranking valid candidates.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, List, Mapping, Optional, Sequence

import numpy as np

from app.align.program import TransformedProgram
from app.cegis.candidate import Candidate
from app.cegis.finalize import finalize
from app.core.config import settings
from app.core.exceptions import InvalidScaleError, IterationCapError
from app.exec.mechanism import noise_free, run_mechanism
from app.exec.sampling import derive_seeds
from app.lang.ast import Program
from app.sketch.generator import Sketch

logger = logging.getLogger(__name__)

DEFAULT = "default"
CUSTOM = "custom"


@dataclass(frozen=True)
class UtilitySpec:
    """Default: negated sum of variances. Custom: accuracy on a sample input."""

    kind: str = DEFAULT
    public_inputs: Mapping[str, Any] = field(default_factory=dict)
    private_inputs: Mapping[str, Any] = field(default_factory=dict)
    min_outputs: int = 0
    penalty: float = settings.CUSTOM_PENALTY
    repetitions: int = settings.CUSTOM_REPETITIONS

    @property
    def is_custom(self) -> bool:
        return self.kind == CUSTOM

    @property
    def inputs(self) -> dict:
        return {**self.public_inputs, **self.private_inputs}


def utility_default(t: TransformedProgram, cand: Candidate, values: Mapping[str, float]) -> float:
    """
    Negated sum of the variances 2 * sigma^2 of the retained samples.

    Args:
        t: Transformed program holding the scale templates
        cand: Candidate
        values: Public parameters and the budget the scales are evaluated at

    Returns:
        float: Utility, -inf when a retained scale is not positive
    """
    removed = set(cand.removed(t))
    total = 0.0
    for s in t.scales:
        if s.eta in removed:
            continue
        sigma = s.evaluate(cand.lam, values)
        if not sigma > 0:
            return -math.inf
        total += 2 * sigma ** 2
    return -total


def _positive(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    return isinstance(value, (int, float)) and value != 0


def _reports(outputs: Sequence[Any]) -> List[Any]:
    """Reports in query order: the returned list reversed, or the `out` values."""
    if outputs and isinstance(outputs[-1], tuple):
        return list(reversed(outputs[-1]))
    return list(outputs)


def accuracy(truth: Sequence[Any], reports: Sequence[Any], min_outputs: int, penalty: float) -> float:
    """
    (#tp - #fp) - penalty * max(min_outputs - (#tp + #fp), 0) for one run.

    Reports are compared position by position with the noise-free truth.
    """
    tp = fp = 0
    for expected, got in zip(truth, reports):
        if not _positive(got):
            continue
        if _positive(expected):
            tp += 1
        else:
            fp += 1
    return (tp - fp) - penalty * max(min_outputs - (tp + fp), 0)


def mean_accuracy(
    source: Program, mechanism: Program, spec: UtilitySpec, seeds: Sequence[int]
) -> float:
    """Mean accuracy of mechanism over one run per seed."""
    truth = _reports(noise_free(source, spec.inputs))
    scores = [
        accuracy(truth, _reports(run_mechanism(mechanism, spec.inputs, seed=s)), spec.min_outputs, spec.penalty)
        for s in seeds
    ]
    return float(np.mean(scores)) if scores else 0.0


def utility_custom(
    sk: Sketch, t: TransformedProgram, cand: Candidate, spec: UtilitySpec, seed: Optional[int] = None
) -> float:
    """
    Mean accuracy of the finalized candidate over `spec.repetitions` runs on
    the sample input. The run seeds depend on seed only, so candidates
    scored with the same seed see the same random numbers.

    Returns:
        float: Utility, -inf when a retained scale is not positive
    """
    seed = settings.SEED if seed is None else seed
    mechanism = finalize(sk, t, cand)
    try:
        return mean_accuracy(sk.source, mechanism, spec, derive_seeds(seed, spec.repetitions))
    except (InvalidScaleError, IterationCapError) as exc:
        logger.debug("%s: candidate rejected by custom utility: %s", sk.name, exc)
        return -math.inf
