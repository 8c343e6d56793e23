"""
Structural validation of source programs.
"""
from dataclasses import dataclass
from typing import List, Optional

from app.core.exceptions import DSLTypeError
from app.lang.ast import (
    Assert, Cost, Hole, OtherOp, Program, Sample, Span, WhilePriv, all_expressions, all_names,
    free_vars, hat, is_distance_name, iter_commands,
)
from app.lang.dataflow import DefiniteAssignment
from app.lang.typecheck import expr_type, infer_types
from app.lang.types import AdjacencyKind, BaseType

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    message: str
    span: Optional[Span] = None

    def __str__(self) -> str:
        where = f"{self.span}: " if self.span else ""
        return f"{where}{self.severity}: {self.message}"


def errors(diagnostics: List[Diagnostic]) -> List[Diagnostic]:
    return [d for d in diagnostics if d.severity == ERROR]


def _target_only(p: Program) -> List[Diagnostic]:
    found: List[Diagnostic] = []
    for _, node in iter_commands(p.body):
        if isinstance(node, Sample):
            found.append(Diagnostic(ERROR, "target-only construct in source: sampling statement", node.span))
        elif isinstance(node, Assert):
            found.append(Diagnostic(ERROR, "target-only construct in source: assertion", node.span))
    for e in all_expressions(p.body):
        if isinstance(e, Hole):
            found.append(Diagnostic(ERROR, f"target-only construct in source: hole {e.kind}[{e.index}]", e.span))
        elif isinstance(e, Cost):
            found.append(Diagnostic(ERROR, "target-only construct in source: cost", e.span))
    for name in sorted(all_names(p.body)):
        if name.startswith("_") or is_distance_name(name):
            found.append(Diagnostic(ERROR, f"reserved identifier '{name}' in source"))
    return found


def _nested_while_priv(p: Program) -> List[Diagnostic]:
    found = []
    for _, node in iter_commands(p.body):
        if not isinstance(node, WhilePriv):
            continue
        for _, inner in iter_commands(node.body):
            if isinstance(inner, WhilePriv):
                found.append(Diagnostic(ERROR, "while-priv loops cannot be nested", inner.span))
    return found


def _declaration(p: Program) -> List[Diagnostic]:
    d = p.decl
    if d is None:
        return []
    found: List[Diagnostic] = []
    names = [param.name for param in d.params]
    for name in sorted(set(n for n in names if names.count(n) > 1)):
        found.append(Diagnostic(ERROR, f"duplicate parameter '{name}'", d.span))
    for param in d.private_inputs:
        models = [m for m in d.adjacency if m.input == param.name]
        if len(models) != 1:
            found.append(Diagnostic(ERROR, f"private input '{param.name}' needs exactly one adjacency model", d.span))
            continue
        model = models[0]
        if param.type.is_list and model.kind is AdjacencyKind.SCALAR_DIFFER:
            found.append(Diagnostic(ERROR, f"'{param.name}' is a list; use all_differ or one_differ", d.span))
        if not param.type.is_list and model.kind is not AdjacencyKind.SCALAR_DIFFER:
            found.append(Diagnostic(ERROR, f"'{param.name}' is a scalar; use scalar_differ", d.span))
        if not param.type.is_real:
            found.append(Diagnostic(ERROR, f"private input '{param.name}' must be real-valued", d.span))
        if model.delta <= 0:
            found.append(Diagnostic(ERROR, f"sensitivity of '{param.name}' must be positive", d.span))
    for model in d.adjacency:
        param = d.param(model.input)
        if param is None or not param.is_private:
            found.append(Diagnostic(ERROR, f"adjacency given for non-private '{model.input}'", d.span))
    if d.precondition is not None:
        allowed = set(names) | {hat(x.name) for x in d.private_inputs}
        for name in sorted(free_vars(d.precondition) - allowed):
            found.append(Diagnostic(ERROR, f"precondition reads unknown '{name}'", d.precondition.span))
        env = {param.name: param.type for param in d.params}
        try:
            if expr_type(d.precondition, env) not in (BaseType.BOOL, None):
                found.append(Diagnostic(ERROR, "precondition must be boolean", d.precondition.span))
        except DSLTypeError as exc:
            found.append(Diagnostic(ERROR, exc.message, d.precondition.span))
    if d.ret_name in names:
        found.append(Diagnostic(ERROR, f"return value '{d.ret_name}' shadows a parameter", d.span))
    if d.param(d.budget) is not None:
        found.append(Diagnostic(ERROR, f"budget symbol '{d.budget}' shadows a parameter", d.span))
    return found


def _assignment(p: Program) -> List[Diagnostic]:
    analysis = DefiniteAssignment(p)
    found = []
    seen = set()
    for name, node in analysis.undefined:
        if name in seen:
            continue
        seen.add(name)
        found.append(Diagnostic(ERROR, f"'{name}' may be used before assignment", node.span))
    if p.decl is not None and not p.decl.ret_type.is_list:
        if p.decl.ret_name not in analysis.at_exit:
            found.append(Diagnostic(ERROR, f"return value '{p.decl.ret_name}' may be unassigned"))
    if p.decl is not None:
        params = {param.name for param in p.decl.params}
        for _, node in iter_commands(p.body):
            if getattr(node, "lhs", None) in params:
                found.append(Diagnostic(ERROR, f"parameter '{node.lhs}' cannot be assigned", node.span))
    return found


def _tainted_divisors(p: Program) -> List[Diagnostic]:
    if p.decl is None:
        return []
    private = {x.name for x in p.decl.private_inputs}
    found = []
    for node in all_expressions(p.body):
        if isinstance(node, OtherOp) and node.op in ("/", "mod") and free_vars(node.right) & private:
            found.append(Diagnostic(WARNING, "division by a value read from a private input", node.span))
    return found


def validate(p: Program) -> List[Diagnostic]:
    """
    Check the structural rules of a source program.

    Args:
        p: Parsed source program

    Returns:
        List[Diagnostic]: Errors and warnings; no error means well-formed
    """
    diagnostics: List[Diagnostic] = []
    diagnostics.extend(_target_only(p))
    diagnostics.extend(_nested_while_priv(p))
    diagnostics.extend(_declaration(p))
    try:
        infer_types(p)
    except DSLTypeError as exc:
        diagnostics.append(Diagnostic(ERROR, exc.message, Span(exc.line, exc.column)))
    diagnostics.extend(_assignment(p))
    diagnostics.extend(_tainted_divisors(p))
    return diagnostics
