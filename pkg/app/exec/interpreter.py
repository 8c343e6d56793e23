"""
Tree-walking interpreter.

Programs are compiled once into nested closures taking the variable
environment and a per-run Runtime; one compiled program serves any
number of runs. Lists are tuples and `::` prepends.
"""
import logging
import operator
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, FrozenSet, List, Optional, Sequence

import numpy as np

from app.core.config import settings
from app.core.exceptions import (
    EvaluationError, ExecutionError, InvalidScaleError, IterationCapError, SampleExhaustedError,
)
from app.exec.sampling import sample_laplace
from app.lang.ast import (
    Abs, Assert, Assign, BoolLit, Cmd, Cmp, Cons, Cost, Expr, Hole, If, Index, LinOp, Logic, Neg, Not,
    Num, OtherOp, Out, Program, Sample, Seq, Skip, Ternary, Var, While, WhilePriv,
)
from app.lang.pretty import format_expr

logger = logging.getLogger(__name__)

Env = Dict[str, Any]
Closure = Callable[[Env, "Runtime"], Any]

SAMPLE_ARRAY = "_sample"
NO_ASSERTION = 0


@dataclass
class Runtime:
    """
    Mutable state of one run: hole values, noise source, failed
    assertions and outputs.
    """

    theta: Sequence[float] = ()
    lam: Sequence[float] = ()
    gamma: Sequence[float] = ()
    loop_cap: int = settings.DEFAULT_LOOP_CAP
    cap_is_violation: bool = False
    rng: Optional[np.random.Generator] = None
    replay: Optional[Sequence[float]] = None
    zeroed: FrozenSet[str] = frozenset()
    recorded: FrozenSet[str] = frozenset()
    failed: List[int] = field(default_factory=list)
    outputs: List[Any] = field(default_factory=list)
    aligned: List[float] = field(default_factory=list)
    draws: int = 0
    steps: int = 0

    def hole(self, kind: str, index: int) -> float:
        values = {"theta": self.theta, "lambda": self.lam, "gamma": self.gamma}[kind]
        if index >= len(values):
            raise EvaluationError(f"{kind}[{index}] has no value")
        return float(values[index])

    def fail(self, aid: int) -> None:
        self.failed.append(aid)

    def loop_capped(self) -> None:
        if not self.cap_is_violation:
            raise IterationCapError(f"loop exceeded {self.loop_cap} iterations")
        self.failed.append(NO_ASSERTION)

    def draw(self, name: str, scale: float) -> float:
        if name in self.zeroed:
            return 0.0
        if self.replay is not None:
            if self.draws >= len(self.replay):
                raise SampleExhaustedError(f"replay holds {len(self.replay)} samples")
            value = float(self.replay[self.draws])
        else:
            if scale <= 0:
                raise InvalidScaleError(f"{name} has non-positive scale {scale}")
            if self.rng is None:
                raise ExecutionError("no random generator for a sampling statement")
            value = sample_laplace(scale, self.rng)
        self.draws += 1
        return value


def _number(value: Any, node: Expr) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise EvaluationError(f"'{format_expr(node)}' is not a number")
    return value


def _element(seq: Any, i: Any, node: Expr) -> Any:
    if not isinstance(seq, tuple):
        raise EvaluationError(f"'{format_expr(node)}' indexes a non-list value")
    k = int(i)
    if k != i or not 0 <= k < len(seq):
        raise EvaluationError(f"index {i} out of range in '{format_expr(node)}' (length {len(seq)})")
    return seq[k]


def _divide(a: float, b: float, node: Expr) -> float:
    if b == 0:
        raise EvaluationError(f"division by zero in '{format_expr(node)}'")
    return a / b


def _modulo(a: float, b: float, node: Expr) -> float:
    if b == 0:
        raise EvaluationError(f"modulo by zero in '{format_expr(node)}'")
    return a % b


def _comparison(op: str, tol: float) -> Callable[[Any, Any, float], bool]:
    """Equality within tol; <= and >= within slack, which only assertions set."""
    if op == "=":
        return lambda a, b, slack: a == b if isinstance(a, bool) else abs(a - b) <= tol
    if op == "!=":
        return lambda a, b, slack: a != b if isinstance(a, bool) else abs(a - b) > tol
    if op == "<=":
        return lambda a, b, slack: a <= b + slack
    if op == ">=":
        return lambda a, b, slack: a + slack >= b
    strict = {"<": operator.lt, ">": operator.gt}[op]
    return lambda a, b, slack: strict(a, b)


def compile_expr(e: Expr, slack: float = 0.0) -> Closure:
    """Compile an expression into a closure `f(env, rt)`; slack relaxes <= and >= for round-off."""
    if isinstance(e, Num):
        value = e.value
        return lambda env, rt: value
    if isinstance(e, BoolLit):
        truth = e.value
        return lambda env, rt: truth
    if isinstance(e, Var):
        name = e.name

        def read(env: Env, rt: Runtime) -> Any:
            try:
                return env[name]
            except KeyError:
                raise EvaluationError(f"undefined variable {name}") from None

        return read
    if isinstance(e, Hole):
        kind, index = e.kind, e.index
        return lambda env, rt: rt.hole(kind, index)
    if isinstance(e, Neg):
        operand = compile_expr(e.operand, slack)
        return lambda env, rt: -_number(operand(env, rt), e)
    if isinstance(e, Abs):
        operand = compile_expr(e.operand, slack)
        return lambda env, rt: abs(_number(operand(env, rt), e))
    if isinstance(e, LinOp):
        left, right = compile_expr(e.left, slack), compile_expr(e.right, slack)
        if e.op == "+":
            return lambda env, rt: _number(left(env, rt), e) + _number(right(env, rt), e)
        return lambda env, rt: _number(left(env, rt), e) - _number(right(env, rt), e)
    if isinstance(e, OtherOp):
        left, right = compile_expr(e.left, slack), compile_expr(e.right, slack)
        if e.op == "*":
            return lambda env, rt: _number(left(env, rt), e) * _number(right(env, rt), e)
        if e.op == "/":
            return lambda env, rt: _divide(_number(left(env, rt), e), _number(right(env, rt), e), e)
        return lambda env, rt: _modulo(_number(left(env, rt), e), _number(right(env, rt), e), e)
    if isinstance(e, Cmp):
        left, right = compile_expr(e.left, slack), compile_expr(e.right, slack)
        test = _comparison(e.op, settings.EQ_TOLERANCE)
        return lambda env, rt: test(left(env, rt), right(env, rt), slack)
    if isinstance(e, Logic):
        left, right = compile_expr(e.left, slack), compile_expr(e.right, slack)
        if e.op == "and":
            return lambda env, rt: bool(left(env, rt)) and bool(right(env, rt))
        return lambda env, rt: bool(left(env, rt)) or bool(right(env, rt))
    if isinstance(e, Not):
        operand = compile_expr(e.operand, slack)
        return lambda env, rt: not operand(env, rt)
    if isinstance(e, Ternary):
        cond, then, orelse = compile_expr(e.cond, slack), compile_expr(e.then, slack), compile_expr(e.orelse, slack)
        return lambda env, rt: then(env, rt) if cond(env, rt) else orelse(env, rt)
    if isinstance(e, Cons):
        head, tail = compile_expr(e.head, slack), compile_expr(e.tail, slack)
        return lambda env, rt: (head(env, rt),) + tail(env, rt)
    if isinstance(e, Index):
        target, index = compile_expr(e.target, slack), compile_expr(e.index, slack)
        if isinstance(e.target, Var) and e.target.name == SAMPLE_ARRAY:
            def draw(env: Env, rt: Runtime) -> Any:
                samples, k = target(env, rt), int(index(env, rt))
                if k >= len(samples):
                    raise SampleExhaustedError(f"sample array holds {len(samples)} values")
                return samples[k]

            return draw
        return lambda env, rt: _element(target(env, rt), index(env, rt), e)
    if isinstance(e, Cost):
        return _compile_cost(e)
    raise EvaluationError(f"cannot evaluate {type(e).__name__}")


def _compile_cost(e: Cost) -> Closure:
    alignment, scale = compile_expr(e.alignment), compile_expr(e.scale)
    aid, tol = e.aid, settings.EQ_TOLERANCE
    # the cost of a draw is charged once, right after its alignment is set
    tracked = e.alignment.name if isinstance(e.alignment, Var) else None

    def cost(env: Env, rt: Runtime) -> float:
        raw = _number(alignment(env, rt), e)
        if tracked in rt.recorded:
            rt.aligned.append(raw)
        a = abs(raw)
        if a <= tol:
            return 0.0
        try:
            s = _number(scale(env, rt), e)
        except EvaluationError:
            rt.fail(aid)
            return 0.0
        if s <= 0:
            rt.fail(aid)
            return 0.0
        return a / s

    return cost


def compile_cmd(c: Cmd) -> Closure:
    """Compile a command into a closure `f(env, rt)` that updates env."""
    if isinstance(c, Skip):
        return lambda env, rt: None
    if isinstance(c, Seq):
        body = [compile_cmd(x) for x in c.cmds]

        def run_block(env: Env, rt: Runtime) -> None:
            for f in body:
                f(env, rt)

        return run_block
    if isinstance(c, Assign):
        name, rhs = c.lhs, compile_expr(c.rhs)

        def assign(env: Env, rt: Runtime) -> None:
            rt.steps += 1
            value = rhs(env, rt)
            env[name] = value

        return assign
    if isinstance(c, Sample):
        name, scale = c.name, compile_expr(c.scale)

        def sample(env: Env, rt: Runtime) -> None:
            rt.steps += 1
            s = 0.0 if c.name in rt.zeroed else _number(scale(env, rt), c.scale)
            env[name] = rt.draw(name, s)

        return sample
    if isinstance(c, Out):
        value = compile_expr(c.expr)

        def emit(env: Env, rt: Runtime) -> None:
            rt.steps += 1
            rt.outputs.append(value(env, rt))

        return emit
    if isinstance(c, Assert):
        cond, aid = compile_expr(c.cond, settings.EQ_TOLERANCE), c.aid

        def check(env: Env, rt: Runtime) -> None:
            rt.steps += 1
            if not cond(env, rt):
                rt.fail(aid)

        return check
    if isinstance(c, If):
        cond, then, orelse = compile_expr(c.cond), compile_cmd(c.then), compile_cmd(c.orelse)

        def branch(env: Env, rt: Runtime) -> None:
            rt.steps += 1
            if cond(env, rt):
                then(env, rt)
            else:
                orelse(env, rt)

        return branch
    if isinstance(c, (While, WhilePriv)):
        cond, body = compile_expr(c.cond), compile_cmd(c.body)

        def loop(env: Env, rt: Runtime) -> None:
            count = 0
            while cond(env, rt):
                if count >= rt.loop_cap:
                    rt.loop_capped()
                    return
                rt.steps += 1
                body(env, rt)
                count += 1

        return loop
    raise EvaluationError(f"cannot execute {type(c).__name__}")


@dataclass
class Compiled:
    program: Program
    body: Closure

    def run(self, env: Env, rt: Runtime) -> Env:
        self.body(env, rt)
        return env


_CACHE_SIZE = 256
_cache: Dict[int, Compiled] = {}


def compile_program(p: Program) -> Compiled:
    """Compile p, reusing an earlier compilation of the same object."""
    cached = _cache.get(id(p.body))
    if cached is not None and cached.program.body is p.body:
        return cached
    if len(_cache) >= _CACHE_SIZE:
        _cache.clear()
    compiled = Compiled(p, compile_cmd(p.body))
    _cache[id(p.body)] = compiled
    logger.debug("compiled %s", p.name)
    return compiled


def loop_cap(inputs: Dict[str, Any]) -> int:
    """LOOP_CAP_FACTOR times the query count, or DEFAULT_LOOP_CAP without a size parameter."""
    size = inputs.get(settings.SIZE_PARAM)
    if isinstance(size, (int, float)) and not isinstance(size, bool):
        return max(int(settings.LOOP_CAP_FACTOR * size), settings.LOOP_CAP_FACTOR)
    return settings.DEFAULT_LOOP_CAP


def values_equal(a: Any, b: Any, tol: Optional[float] = None) -> bool:
    """Structural equality of run outputs with numeric tolerance."""
    tol = settings.EQ_TOLERANCE if tol is None else tol
    if isinstance(a, tuple) or isinstance(b, tuple):
        return (
            isinstance(a, tuple) and isinstance(b, tuple) and len(a) == len(b)
            and all(values_equal(x, y, tol) for x, y in zip(a, b))
        )
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool) and a == b
    return abs(a - b) <= tol
