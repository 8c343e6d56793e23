"""
Paired execution: run a mechanism on an input and, with the recorded
alignments added to its draws, on the adjacent input.
"""
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence

from app.align.program import TransformedProgram
from app.exec.interpreter import values_equal
from app.exec.mechanism import run_mechanism
from app.exec.transformed import Counterexample, run_transformed
from app.lang.ast import Program

logger = logging.getLogger(__name__)


@dataclass
class PairedResult:
    ok: bool
    original: List[Any]
    related: List[Any]
    epsilon_hat: float
    violations: int


def shifted_inputs(decl, cx: Counterexample) -> Dict[str, Any]:
    """Inputs of the adjacent execution: private inputs plus their distances."""
    inputs: Dict[str, Any] = dict(cx.public_inputs)
    for p in decl.params:
        if not p.is_private:
            continue
        value, d = cx.private_inputs[p.name], cx.distances.get(p.name)
        if d is None:
            inputs[p.name] = value
        elif isinstance(value, (list, tuple)):
            inputs[p.name] = [float(x) + float(y) for x, y in zip(value, d)]
        else:
            inputs[p.name] = float(value) + float(d)
    return inputs


def paired_check(
    m: Program,
    t: TransformedProgram,
    cx: Counterexample,
    theta: Sequence[float],
    lam: Sequence[float],
    gamma: Sequence[float] = (),
) -> PairedResult:
    """
    Check that aligned executions agree.

    m must keep every sampling statement of t so that its draws line up
    with t's sample array.

    Args:
        m: Mechanism instantiated with every noise site kept
        t: Transformed program of m's sketch
        cx: Inputs, distances and samples without violations under the candidate
        theta: Alignment hole values
        lam: Scale hole values
        gamma: While-priv bound hole values

    Returns:
        PairedResult: ok when both executions produce the same outputs
    """
    report = run_transformed(t, cx, theta, lam, gamma)
    inputs = {**cx.public_inputs, **cx.private_inputs}
    draws = len(report.aligned)
    samples = list(cx.samples[:draws])
    related_samples = [s + a for s, a in zip(samples, report.aligned)]
    original = run_mechanism(m, inputs, replay=samples, theta=theta, lam=lam, gamma=gamma)
    related = run_mechanism(m, shifted_inputs(m.decl, cx), replay=related_samples, theta=theta, lam=lam, gamma=gamma)
    ok = len(original) == len(related) and all(values_equal(a, b) for a, b in zip(original, related))
    if not ok:
        logger.debug("%s: paired outputs differ: %s vs %s", t.name, original, related)
    return PairedResult(ok, original, related, report.epsilon_hat, report.violations)
