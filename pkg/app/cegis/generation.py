"""
Candidate generation: the best-scoring hole values that pass every stored counterexample.
"""
import logging
import math
from concurrent.futures import Executor
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from app.align.program import TransformedProgram
from app.cegis.candidate import Candidate
from app.cegis.counterexample import canonical_instantiation
from app.cegis.utility import UtilitySpec, utility_custom, utility_default
from app.core.exceptions import SampleExhaustedError, SynthesisFailed
from app.exec.sampling import derive_seeds
from app.exec.transformed import Counterexample, run_transformed
from app.schemas.run_config import RunConfig
from app.sketch.generator import Sketch
from app.swarm.pso import SearchSpace, pso_minimize

logger = logging.getLogger(__name__)


@dataclass
class GenerationResult:
    candidate: Candidate
    score: float
    utility: float
    violations: int

    @property
    def valid(self) -> bool:
        return self.violations == 0


def total_violations(t: TransformedProgram, cand: Candidate, cexs: Sequence[Counterexample]) -> int:
    """Violations of cand summed over the stored counterexamples; a short sample array counts one."""
    total = 0
    for cx in cexs:
        try:
            total += run_transformed(t, cx, cand.theta, cand.lam, cand.gamma).violations
        except SampleExhaustedError:
            total += 1
    return total


class CandidateScore:
    """
    Score of a candidate: its utility when it passes every stored
    counterexample, otherwise -invalid_score * (1 + violations).
    Picklable for process pools.
    """

    def __init__(
        self,
        sk: Sketch,
        t: TransformedProgram,
        cexs: Sequence[Counterexample],
        utility: UtilitySpec,
        cfg: RunConfig,
        seed: int,
    ):
        self.sk = sk
        self.t = t
        self.cexs = list(cexs)
        self.spec = utility
        self.cfg = cfg
        self.seed = seed
        self.values = canonical_instantiation(t.decl, cfg)

    def utility(self, cand: Candidate) -> float:
        if self.spec.is_custom:
            return utility_custom(self.sk, self.t, cand, self.spec, self.seed)
        return utility_default(self.t, cand, self.values)

    def evaluate(self, cand: Candidate) -> GenerationResult:
        violations = total_violations(self.t, cand, self.cexs)
        if violations:
            return GenerationResult(cand, -self.cfg.invalid_score * (1 + violations), -math.inf, violations)
        utility = self.utility(cand)
        score = utility if math.isfinite(utility) else -self.cfg.invalid_score
        return GenerationResult(cand, max(score, -self.cfg.invalid_score), utility, 0)

    def candidate(self, x: np.ndarray) -> Candidate:
        return Candidate.from_vector(x, self.t, self.cfg.theta_grid)

    def __call__(self, x: np.ndarray) -> float:
        return -self.evaluate(self.candidate(x)).score


def hole_space(t: TransformedProgram, cfg: RunConfig) -> SearchSpace:
    bounds: List = (
        [cfg.theta_box] * t.theta_count + [cfg.lambda_box] * t.lambda_count + [cfg.gamma_box] * t.gamma_count
    )
    return SearchSpace.from_bounds(bounds)


def generate_candidate(
    sk: Sketch,
    t: TransformedProgram,
    cexs: Sequence[Counterexample],
    utility: UtilitySpec,
    cfg: RunConfig,
    seed: Optional[int] = None,
    executor: Optional[Executor] = None,
) -> GenerationResult:
    """
    Maximize the candidate score over the hole boxes.

    Args:
        sk: Sketch of t, needed by the custom utility
        t: Transformed program
        cexs: Stored counterexamples
        utility: Utility ranking valid candidates
        cfg: Run configuration
        seed: Swarm seed, also the base seed of custom-utility runs
        executor: Optional pool for objective evaluations

    Returns:
        GenerationResult: Best valid candidate with theta snapped, re-scored outside the swarm

    Raises:
        SynthesisFailed: When every swarm, the retries included, ends on a violating candidate
    """
    seed = cfg.seed if seed is None else seed
    score = CandidateScore(sk, t, cexs, utility, cfg, seed)
    space = hole_space(t, cfg)
    best: Optional[GenerationResult] = None
    swarm_seeds = [seed] + derive_seeds(seed, cfg.generation_retries)
    for attempt, swarm_seed in enumerate(swarm_seeds):
        result = pso_minimize(score, space, cfg.swarm(swarm_seed), executor)
        found = score.evaluate(score.candidate(result.best_x))
        if found.valid:
            logger.info(
                "%s: candidate with utility %.4g after %d evaluations", t.name, found.utility, result.evaluations
            )
            return found
        logger.info(
            "%s: best candidate still violates %d assertions (swarm %d of %d)",
            t.name, found.violations, attempt + 1, len(swarm_seeds),
        )
        if best is None or found.violations < best.violations:
            best = found
    raise SynthesisFailed(
        f"{t.name}: no candidate passes the {len(cexs)} stored counterexamples",
        best_candidate=best.candidate,
        violations=best.violations,
    )
