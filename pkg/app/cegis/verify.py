"""
Checking a candidate: refutation searches followed by random paired trials.
"""
import logging
from concurrent.futures import Executor
from dataclasses import dataclass
from typing import Optional

from app.align.program import TransformedProgram
from app.cegis.candidate import Candidate
from app.cegis.counterexample import InputLayout, find_counterexample
from app.core.exceptions import SampleExhaustedError
from app.exec.paired import paired_check
from app.exec.sampling import derive_seeds, make_rng
from app.exec.transformed import Counterexample
from app.lang.ast import Program
from app.schemas.run_config import RunConfig

logger = logging.getLogger(__name__)

VERIFIED = "verified"
REFUTED = "refuted"

# Draws per trial looking for public inputs that satisfy the precondition
_ADMIT_ATTEMPTS = 100


@dataclass
class CheckResult:
    status: str
    counterexample: Optional[Counterexample] = None
    refutation_rounds: int = 0
    paired_trials: int = 0
    max_epsilon_hat: float = 0.0
    reason: Optional[str] = None
    exhausted_trials: int = 0

    @property
    def ok(self) -> bool:
        return self.status == VERIFIED


def refute(
    t: TransformedProgram,
    cand: Candidate,
    cfg: RunConfig,
    rounds: int,
    seed: int,
    executor: Optional[Executor] = None,
) -> Optional[Counterexample]:
    """First counterexample of `rounds` independently seeded searches, or None."""
    for i, s in enumerate(derive_seeds(seed, rounds)):
        cx = find_counterexample(t, cand, cfg, s, executor)
        if cx is not None:
            logger.info("%s: refuted in search %d of %d", t.name, i + 1, rounds)
            return cx
    return None


def check_candidate(
    t: TransformedProgram,
    cand: Candidate,
    mechanism: Program,
    cfg: RunConfig,
    seed: Optional[int] = None,
    rounds: Optional[int] = None,
    trials: Optional[int] = None,
    executor: Optional[Executor] = None,
) -> CheckResult:
    """
    Run refutation searches, then paired trials on random adjacent inputs.

    Args:
        t: Transformed program
        cand: Candidate under check
        mechanism: Mechanism keeping every sample of t
        cfg: Run configuration
        seed: Master seed, defaults to cfg.seed
        rounds: Refutation searches, defaults to cfg.refutation_rounds
        trials: Paired trials, defaults to cfg.paired_trials
        executor: Optional pool for objective evaluations

    Returns:
        CheckResult: verified, or refuted with the failing counterexample
    """
    seed = cfg.seed if seed is None else seed
    rounds = cfg.refutation_rounds if rounds is None else rounds
    trials = cfg.paired_trials if trials is None else trials
    search_seed, trial_seed = derive_seeds(seed, 2)

    cx = refute(t, cand, cfg, rounds, search_seed, executor)
    if cx is not None:
        return CheckResult(REFUTED, cx, rounds, 0, reason="assertion")

    layout = InputLayout.build(t, cfg)
    rng = make_rng(trial_seed)
    max_epsilon_hat = 0.0
    done = exhausted = 0
    for _ in range(trials):
        cx = _admitted(layout, rng)
        if cx is None:
            logger.warning("%s: no random input satisfies the precondition", t.name)
            break
        try:
            result = paired_check(mechanism, t, cx, cand.theta, cand.lam, cand.gamma)
        except SampleExhaustedError:
            exhausted += 1
            continue
        done += 1
        max_epsilon_hat = max(max_epsilon_hat, result.epsilon_hat)
        if result.violations:
            return CheckResult(REFUTED, cx, rounds, done, max_epsilon_hat, "assertion")
        if not result.ok:
            return CheckResult(REFUTED, cx, rounds, done, max_epsilon_hat, "paired")
    if exhausted:
        logger.warning("%s: %d of %d paired trials ran out of samples", t.name, exhausted, trials)
    logger.info("%s: verified by %d searches and %d paired trials", t.name, rounds, done)
    return CheckResult(VERIFIED, None, rounds, done, max_epsilon_hat, exhausted_trials=exhausted)


def _admitted(layout: InputLayout, rng) -> Optional[Counterexample]:
    for _ in range(_ADMIT_ATTEMPTS):
        cx = layout.random(rng)
        if layout.admits(cx):
            return cx
    return None
