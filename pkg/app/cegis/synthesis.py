"""
The synthesis loop: sketch, transform, then alternate counterexample search
and candidate generation until no counterexample is found.
"""
import logging
import math
import time
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from app.align.program import TransformedProgram
from app.align.transform import transform
from app.cegis.candidate import Candidate
from app.cegis.counterexample import find_counterexample
from app.cegis.finalize import finalize, proof
from app.cegis.generation import CandidateScore, GenerationResult, generate_candidate, total_violations
from app.cegis.utility import UtilitySpec
from app.cegis.verify import refute
from app.core.exceptions import SynthesisFailed, TransformError, ValidationFailed
from app.exec.sampling import derive_seeds
from app.exec.transformed import Counterexample
from app.lang.ast import Program
from app.lang.validate import errors, validate
from app.schemas.run_config import RunConfig
from app.sketch.generator import Sketch, enumerate_subsketches

logger = logging.getLogger(__name__)


@dataclass
class SketchOutcome:
    """Result of the loop on one sketch."""

    sketch: Sketch
    transformed: TransformedProgram
    candidate: Candidate
    utility: float
    violations: int
    rounds: int
    refutation_trials: int
    counterexamples: List[Counterexample] = field(default_factory=list)

    @property
    def solved(self) -> bool:
        return self.violations == 0


@dataclass
class SynthesisResult:
    sketch: Sketch
    transformed: TransformedProgram
    mechanism: Program
    candidate: Candidate
    utility: float
    rounds: int
    refutation_trials: int
    wall_time: float
    removed: Tuple[str, ...]
    proof: Dict[str, Dict[str, str]]
    config: RunConfig
    rounded: bool = False

    @property
    def name(self) -> str:
        return self.sketch.name


def cegis(
    sk: Sketch,
    t: TransformedProgram,
    utility: UtilitySpec,
    cfg: RunConfig,
    seed: int,
    executor: Optional[Executor] = None,
) -> SketchOutcome:
    """
    Run the counterexample-guided loop on one sketch, starting from the
    null candidate.

    Args:
        sk: Sketch
        t: Transformed program of sk
        utility: Utility ranking valid candidates
        cfg: Run configuration
        seed: Seed of this loop
        executor: Optional pool for objective evaluations

    Returns:
        SketchOutcome: solved when the last candidate survived the refutation searches
    """
    round_seeds = derive_seeds(seed, cfg.max_rounds)
    cand = Candidate.null(t)
    cexs: List[Counterexample] = []
    last: Optional[GenerationResult] = None
    trials = 0
    for round_, round_seed in enumerate(round_seeds, start=1):
        logger.info("%s [%s]: round %d with %d counterexamples", sk.name, sk.label, round_, len(cexs))
        search_seed, refute_seed, generate_seed = derive_seeds(round_seed, 3)
        cx = find_counterexample(t, cand, cfg, search_seed, executor)
        if cx is None:
            trials += cfg.refutation_rounds
            cx = refute(t, cand, cfg, cfg.refutation_rounds, refute_seed, executor)
            if cx is None:
                score = last or CandidateScore(sk, t, cexs, utility, cfg, cfg.seed).evaluate(cand)
                return SketchOutcome(sk, t, cand, score.utility, 0, round_, trials, cexs)
        cexs.append(cx)
        try:
            last = generate_candidate(sk, t, cexs, utility, cfg, generate_seed, executor)
        except SynthesisFailed as exc:
            logger.info("%s [%s]: generation failed in round %d, %s", sk.name, sk.label, round_, exc)
            return SketchOutcome(sk, t, exc.best_candidate, -math.inf, exc.violations, round_, trials, cexs)
        cand = last.candidate
    logger.info("%s [%s]: no verified candidate after %d rounds", sk.name, sk.label, cfg.max_rounds)
    return SketchOutcome(sk, t, cand, -math.inf, 1, cfg.max_rounds, trials, cexs)


def _solve(sk: Sketch, utility: UtilitySpec, cfg: RunConfig, seed: int, jobs: int = 1) -> Optional[SketchOutcome]:
    try:
        t = transform(sk)
    except TransformError as exc:
        logger.info("%s [%s]: skipped, %s", sk.name, sk.label, exc)
        return None
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return cegis(sk, t, utility, cfg, seed, pool)
    return cegis(sk, t, utility, cfg, seed)


def _search(sketches: List[Sketch], utility: UtilitySpec, cfg: RunConfig, seed: int) -> List[SketchOutcome]:
    seeds = derive_seeds(seed, len(sketches))
    if cfg.jobs > 1 and len(sketches) > 1:
        with ProcessPoolExecutor(max_workers=min(cfg.jobs, len(sketches))) as pool:
            futures = [pool.submit(_solve, sk, utility, cfg, s) for sk, s in zip(sketches, seeds)]
            outcomes = [f.result() for f in futures]
    else:
        outcomes = [_solve(sk, utility, cfg, s, cfg.jobs) for sk, s in zip(sketches, seeds)]
    for outcome in outcomes:
        if outcome is not None:
            logger.info(
                "%s [%s]: %s, utility %.4g",
                outcome.sketch.name, outcome.sketch.label,
                "solved" if outcome.solved else "unsolved", outcome.utility,
            )
    return [o for o in outcomes if o is not None]


def _round(outcome: SketchOutcome, cfg: RunConfig, seed: int) -> Tuple[Candidate, bool]:
    """Candidate with integer scale coefficients if one survives refutation, else the original."""
    t = outcome.transformed
    for method, s in zip(("nearest", "up"), derive_seeds(seed, 2)):
        rounded = outcome.candidate.rounded(method)
        if rounded == outcome.candidate:
            return rounded, False
        if total_violations(t, rounded, outcome.counterexamples):
            continue
        if refute(t, rounded, cfg, cfg.refutation_rounds, s) is None:
            logger.info("%s: scales rounded %s", outcome.sketch.name, method)
            return rounded, True
    logger.info("%s: rounded scales refuted, keeping unrounded values", outcome.sketch.name)
    return outcome.candidate, False


def synthesize(src: Program, utility: Optional[UtilitySpec] = None, cfg: Optional[RunConfig] = None) -> SynthesisResult:
    """
    Synthesize a private mechanism from a non-private source program.

    Sub-sketches over the optional noise locations are searched
    independently and the valid one with the highest utility wins. When
    none is solved the hole boxes and the query count are doubled, up to
    cfg.max_expansions times.

    Args:
        src: Well-formed source program
        utility: Utility ranking candidates, the default utility when None
        cfg: Run configuration, built from settings when None

    Returns:
        SynthesisResult: Finalized mechanism, candidate and proof

    Raises:
        ValidationFailed: When src is not well-formed
        SynthesisFailed: When no sketch is solved after the last expansion
    """
    started = time.perf_counter()
    utility = utility or UtilitySpec()
    cfg = cfg or RunConfig.from_settings()
    found = errors(validate(src))
    if found:
        raise ValidationFailed(found)

    sketches = enumerate_subsketches(src, cfg.subsketch_cap)
    logger.info("%s: %d sketches, %d noise sites in the full sketch", src.name, len(sketches), len(sketches[0].sites))
    seeds = derive_seeds(cfg.seed, cfg.max_expansions + 2)
    attempt_cfg = cfg
    best_failed: Optional[SketchOutcome] = None
    rounds = trials = 0
    for attempt in range(cfg.max_expansions + 1):
        if attempt:
            attempt_cfg = attempt_cfg.expanded()
            logger.info("%s: expanding search space (attempt %d)", src.name, attempt + 1)
        outcomes = _search(sketches, utility, attempt_cfg, seeds[attempt])
        rounds += sum(o.rounds for o in outcomes)
        trials += sum(o.refutation_trials for o in outcomes)
        solved = [o for o in outcomes if o.solved]
        if solved:
            break
        for o in outcomes:
            if best_failed is None or o.violations < best_failed.violations:
                best_failed = o
    else:
        raise SynthesisFailed(
            f"{src.name}: no verified candidate after {cfg.max_expansions} expansions",
            best_candidate=best_failed.candidate if best_failed else None,
            violations=best_failed.violations if best_failed else 0,
        )

    best = max(solved, key=lambda o: o.utility)
    cand, value, rounded = best.candidate, best.utility, False
    if attempt_cfg.round_scales:
        cand, rounded = _round(best, attempt_cfg, seeds[-1])
    if rounded:
        value = CandidateScore(best.sketch, best.transformed, (), utility, attempt_cfg, attempt_cfg.seed).utility(cand)
    removed = cand.removed(best.transformed)
    mechanism = finalize(best.sketch, best.transformed, cand)
    return SynthesisResult(
        sketch=best.sketch,
        transformed=best.transformed,
        mechanism=mechanism,
        candidate=cand,
        utility=value,
        rounds=rounds,
        refutation_trials=trials,
        wall_time=time.perf_counter() - started,
        removed=removed,
        proof=proof(best.transformed, cand, frozenset(removed)),
        config=attempt_cfg,
        rounded=rounded,
    )
