"""
Running transformed programs on counterexample inputs.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from app.align.program import TransformedProgram
from app.core.config import settings
from app.core.exceptions import EvaluationError, InputError
from app.exec.interpreter import NO_ASSERTION, Runtime, compile_program, loop_cap
from app.lang.ast import FunctionDecl, hat, shadow
from app.lang.types import BaseType

logger = logging.getLogger(__name__)

# Draw index from which a shadow program's aligned execution follows its shadow execution
SHADOW_RESET = "_reset"


@dataclass(frozen=True)
class Counterexample:
    """Inputs, input distances and the sample array of one transformed run."""

    public_inputs: Mapping[str, float]
    private_inputs: Mapping[str, Any]
    distances: Mapping[str, Any] = field(default_factory=dict)
    samples: Tuple[float, ...] = ()


@dataclass
class ExecReport:
    violations: int
    failed_ids: List[int]
    epsilon_hat: float
    outputs: List[Any]
    steps: int
    aligned: List[float] = field(default_factory=list)
    error: Optional[str] = None


def convert_value(name: str, value: Any, t: BaseType) -> Any:
    """Coerce a JSON-style value to the runtime representation of type t."""
    try:
        if t is BaseType.REAL:
            return float(value)
        if t is BaseType.BOOL:
            return bool(value)
        if t is BaseType.LIST_REAL:
            return tuple(float(x) for x in value)
        return tuple(bool(x) for x in value)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{name}: expected {t.value}, got {value!r}") from exc


def bind_inputs(decl: FunctionDecl, public: Mapping[str, Any], private: Mapping[str, Any]) -> Dict[str, Any]:
    """Environment holding every parameter, the budget and the empty return list."""
    env: Dict[str, Any] = {}
    for p in decl.params:
        source = private if p.is_private else public
        if p.name not in source:
            raise InputError(f"missing value for parameter {p.name}")
        env[p.name] = convert_value(p.name, source[p.name], p.type)
    env[decl.budget] = float(public.get(decl.budget, settings.SEARCH_EPS))
    if decl.ret_type.is_list:
        env[decl.ret_name] = ()
    return env


def _distance(name: str, value: Any, given: Mapping[str, Any]) -> Any:
    d = given.get(name)
    if isinstance(value, tuple):
        if d is None:
            return tuple(0.0 for _ in value)
        d = tuple(float(x) for x in d)
        if len(d) != len(value):
            raise InputError(f"distance of {name} has length {len(d)}, expected {len(value)}")
        return d
    return float(d) if d is not None else 0.0


def transformed_inputs(t: TransformedProgram, cx: Counterexample) -> Dict[str, Any]:
    env = bind_inputs(t.decl, cx.public_inputs, cx.private_inputs)
    for p in t.decl.private_inputs:
        d = _distance(p.name, env[p.name], cx.distances)
        env[hat(p.name)] = d
        if t.shadow:
            env[shadow(p.name)] = d
    env["_sample"] = tuple(float(x) for x in cx.samples)
    return env


def run_transformed(
    t: TransformedProgram,
    cx: Counterexample,
    theta: Sequence[float],
    lam: Sequence[float],
    gamma: Sequence[float] = (),
) -> ExecReport:
    """
    Execute a transformed program deterministically and count failed assertions.

    A failed assertion does not stop the run. An evaluation error counts one
    violation and ends the run; a loop reaching the iteration cap counts one
    violation and is left.

    Args:
        t: Transformed program
        cx: Inputs, distances and samples
        theta: Alignment hole values
        lam: Scale hole values
        gamma: While-priv bound hole values

    Returns:
        ExecReport: Violations, final privacy cost and outputs

    Raises:
        SampleExhaustedError: When cx.samples is too short
    """
    compiled = compile_program(t.program)
    env = transformed_inputs(t, cx)
    rt = Runtime(
        theta=theta,
        lam=lam,
        gamma=gamma,
        loop_cap=loop_cap(env),
        cap_is_violation=True,
        recorded=frozenset(hat(s.eta) for s in t.sites),
    )
    error = None
    try:
        compiled.run(env, rt)
    except EvaluationError as exc:
        rt.fail(NO_ASSERTION)
        error = str(exc)
    outputs = list(rt.outputs)
    if t.decl.ret_name in env:
        outputs.append(env[t.decl.ret_name])
    aligned = list(rt.aligned)
    if t.shadow and SHADOW_RESET in env:
        reset = min(int(env[SHADOW_RESET]), len(aligned))
        aligned[:reset] = [0.0] * reset
    return ExecReport(
        violations=len(rt.failed),
        failed_ids=list(rt.failed),
        epsilon_hat=float(env.get("_epshat", 0.0)),
        outputs=outputs,
        steps=rt.steps,
        aligned=aligned,
        error=error,
    )
