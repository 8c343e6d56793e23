"""
Counterexample search: maximize the assertion violations of a transformed
program over inputs, adjacent distances and samples.
"""
import logging
import math
from concurrent.futures import Executor
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np

from app.align.program import TransformedProgram
from app.cegis.candidate import Candidate
from app.core.config import settings
from app.core.exceptions import EvaluationError, SampleExhaustedError
from app.exec.interpreter import Runtime, compile_expr
from app.exec.transformed import Counterexample, bind_inputs, run_transformed
from app.lang.ast import Cmp, Expr, FunctionDecl, Logic, Param, Var, free_vars
from app.lang.types import AdjacencyKind, BaseType
from app.schemas.run_config import RunConfig
from app.swarm.pso import SearchSpace, pso_minimize

logger = logging.getLogger(__name__)

Interval = Tuple[float, float]

_FLIPPED = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "=": "="}


def _conjuncts(e: Expr) -> List[Expr]:
    if isinstance(e, Logic) and e.op == "and":
        return _conjuncts(e.left) + _conjuncts(e.right)
    return [e]


def _constant(e: Expr, size: float) -> Optional[float]:
    """Value of e when it reads nothing but the size parameter."""
    if free_vars(e) - {settings.SIZE_PARAM}:
        return None
    try:
        value = compile_expr(e)({settings.SIZE_PARAM: float(size)}, Runtime())
    except (EvaluationError, KeyError):
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        return None
    return float(value)


def _narrow(interval: Interval, op: str, c: float) -> Interval:
    """Integer values of p satisfying `p op c`, intersected with interval."""
    lo, hi = interval
    if op == "<":
        hi = min(hi, math.ceil(c) - 1)
    elif op == "<=":
        hi = min(hi, math.floor(c))
    elif op == ">":
        lo = max(lo, math.floor(c) + 1)
    elif op == ">=":
        lo = max(lo, math.ceil(c))
    elif op == "=":
        lo, hi = max(lo, c), min(hi, c)
    return lo, hi


def precondition_intervals(decl: FunctionDecl, size: float) -> Dict[str, Interval]:
    """
    Interval of every public real parameter (other than size) implied by
    the conjuncts `p op c` of the precondition.

    Args:
        decl: Function declaration with an optional precondition
        size: Value of the size parameter used to evaluate the bounds

    Returns:
        Dict[str, Interval]: Possibly unbounded or empty (lo > hi) intervals
    """
    intervals: Dict[str, Interval] = {
        name: (-math.inf, math.inf) for name in decl.public_reals if name != settings.SIZE_PARAM
    }
    if decl.precondition is None:
        return intervals
    for part in _conjuncts(decl.precondition):
        if not isinstance(part, Cmp) or part.op not in _FLIPPED:
            continue
        if isinstance(part.left, Var) and part.left.name in intervals:
            name, op, bound = part.left.name, part.op, part.right
        elif isinstance(part.right, Var) and part.right.name in intervals:
            name, op, bound = part.right.name, _FLIPPED[part.op], part.left
        else:
            continue
        c = _constant(bound, size)
        if c is not None:
            intervals[name] = _narrow(intervals[name], op, c)
    return intervals


def _clamp_box(precondition: Interval, box: Interval) -> Interval:
    """Intersection of both; a box the precondition misses collapses onto the nearest precondition bound."""
    lo, hi = max(precondition[0], box[0]), min(precondition[1], box[1])
    if lo <= hi:
        return lo, hi
    nearest = precondition[0] if precondition[0] > box[1] else precondition[1]
    return nearest, nearest


def canonical_instantiation(decl: FunctionDecl, cfg: Optional[RunConfig] = None) -> Dict[str, float]:
    """
    Public values the default utility is evaluated at: the configured
    instantiation, 1 for parameters it does not name, clamped into the
    precondition intervals.
    """
    base = dict(cfg.utility_instantiation) if cfg and cfg.utility_instantiation else dict(settings.UTILITY_INSTANTIATION)
    default = cfg.utility_default_value if cfg else settings.UTILITY_DEFAULT_VALUE
    values = {name: float(base.get(name, default)) for name in decl.public_reals}
    values[decl.budget] = float(base.get(decl.budget, default))
    size = values.get(settings.SIZE_PARAM, float(base.get(settings.SIZE_PARAM, default)))
    for name, (lo, hi) in precondition_intervals(decl, size).items():
        if lo <= hi:
            values[name] = min(max(values[name], lo), hi)
    return values


def precondition_holds(decl: FunctionDecl, env: Mapping[str, Any]) -> bool:
    if decl.precondition is None:
        return True
    try:
        return bool(compile_expr(decl.precondition)(dict(env), Runtime()))
    except (EvaluationError, KeyError):
        return False


@dataclass(frozen=True)
class InputLayout:
    """
    Encoding of a counterexample as one optimizer position: public
    parameters, private inputs, distances and samples, in that order.
    """

    decl: FunctionDecl
    size: int
    eps: float
    publics: Tuple[Tuple[str, float, float], ...]
    query_box: Interval
    sample_box: Interval
    samples: int

    @classmethod
    def build(cls, t: TransformedProgram, cfg: RunConfig) -> "InputLayout":
        decl = t.decl
        size = cfg.query_count
        intervals = precondition_intervals(decl, size)
        publics = []
        for p in decl.public_params:
            if p.name == settings.SIZE_PARAM:
                publics.append((p.name, float(size), float(size)))
            elif p.type is BaseType.REAL:
                lo, hi = _clamp_box(intervals[p.name], cfg.public_box)
                publics.append((p.name, lo, hi))
            else:
                publics.append((p.name, 0.0, 1.0))
        draws = sum(size if s.in_loop else 1 for s in t.sites)
        return cls(decl, size, cfg.search_eps, tuple(publics), cfg.query_box, cfg.sample_box, draws)

    def _length(self, p: Param) -> int:
        return self.size if p.type.is_list else 1

    def _distance_bounds(self, p: Param) -> List[Interval]:
        if p.type not in (BaseType.REAL, BaseType.LIST_REAL):
            return []
        model = self.decl.adjacency_of(p.name)
        delta = model.delta if model else 1.0
        if p.type is BaseType.LIST_REAL and model and model.kind is AdjacencyKind.ONE_DIFFER:
            return [(0.0, float(self.size - 1)), (-delta, delta)]
        return [(-delta, delta)] * self._length(p)

    def space(self) -> SearchSpace:
        bounds: List[Interval] = [(lo, hi) for _, lo, hi in self.publics]
        for p in self.decl.private_inputs:
            box = self.query_box if p.type in (BaseType.REAL, BaseType.LIST_REAL) else (0.0, 1.0)
            bounds.extend([box] * self._length(p))
        for p in self.decl.private_inputs:
            bounds.extend(self._distance_bounds(p))
        bounds.extend([self.sample_box] * self.samples)
        return SearchSpace.from_bounds(bounds)

    def decode(self, x: np.ndarray) -> Counterexample:
        """Counterexample at position x; public parameters are rounded to integers."""
        x = np.asarray(x, dtype=float)
        pos = 0
        public: Dict[str, Any] = {}
        for name, lo, hi in self.publics:
            p = self.decl.param(name)
            if p.type is BaseType.BOOL:
                public[name] = bool(x[pos] >= 0.5)
            else:
                public[name] = float(min(max(round(x[pos]), lo), hi))
            pos += 1
        public[self.decl.budget] = self.eps
        private: Dict[str, Any] = {}
        for p in self.decl.private_inputs:
            n = self._length(p)
            chunk = x[pos:pos + n]
            pos += n
            if p.type is BaseType.BOOL:
                private[p.name] = bool(chunk[0] >= 0.5)
            elif p.type is BaseType.LIST_BOOL:
                private[p.name] = [bool(v >= 0.5) for v in chunk]
            elif p.type is BaseType.REAL:
                private[p.name] = float(chunk[0])
            else:
                private[p.name] = [float(v) for v in chunk]
        distances: Dict[str, Any] = {}
        for p in self.decl.private_inputs:
            n = len(self._distance_bounds(p))
            chunk = x[pos:pos + n]
            pos += n
            if not n:
                continue
            if p.type is BaseType.REAL:
                distances[p.name] = float(chunk[0])
            elif self._is_one_differ(p):
                d = [0.0] * self.size
                d[int(round(chunk[0]))] = float(chunk[1])
                distances[p.name] = d
            else:
                distances[p.name] = [float(v) for v in chunk]
        samples = tuple(float(v) for v in x[pos:pos + self.samples])
        return Counterexample(public, private, distances, samples)

    def _is_one_differ(self, p: Param) -> bool:
        model = self.decl.adjacency_of(p.name)
        return bool(model and model.kind is AdjacencyKind.ONE_DIFFER)

    def admits(self, cx: Counterexample) -> bool:
        """Whether cx satisfies the precondition."""
        env = bind_inputs(self.decl, cx.public_inputs, cx.private_inputs)
        return precondition_holds(self.decl, env)

    def random(self, rng: np.random.Generator) -> Counterexample:
        space = self.space()
        return self.decode(rng.uniform(space.lower, space.upper))


class ViolationObjective:
    """Negated violation count of one candidate; picklable for process pools."""

    def __init__(self, t: TransformedProgram, layout: InputLayout, cand: Candidate):
        self.t = t
        self.layout = layout
        self.cand = cand

    def violations(self, cx: Counterexample) -> int:
        if not self.layout.admits(cx):
            return 0
        try:
            report = run_transformed(self.t, cx, self.cand.theta, self.cand.lam, self.cand.gamma)
        except SampleExhaustedError:
            logger.debug("%s: sample array too short", self.t.name)
            return 0
        return report.violations

    def __call__(self, x: np.ndarray) -> float:
        return -float(self.violations(self.layout.decode(x)))


def find_counterexample(
    t: TransformedProgram,
    cand: Candidate,
    cfg: RunConfig,
    seed: Optional[int] = None,
    executor: Optional[Executor] = None,
) -> Optional[Counterexample]:
    """
    Search for inputs, distances and samples on which cand violates an assertion.

    Args:
        t: Transformed program
        cand: Candidate to refute
        cfg: Run configuration (boxes, query count, swarm budget)
        seed: Seed of the swarm
        executor: Optional pool for objective evaluations

    Returns:
        Optional[Counterexample]: The best point found, or None when it has no violation
    """
    layout = InputLayout.build(t, cfg)
    objective = ViolationObjective(t, layout, cand)
    result = pso_minimize(objective, layout.space(), cfg.swarm(seed), executor)
    if result.best_f > -1:
        logger.debug("%s: no counterexample after %d evaluations", t.name, result.evaluations)
        return None
    cx = layout.decode(result.best_x)
    logger.info("%s: counterexample with %d violations", t.name, int(-result.best_f))
    return cx
