"""
Flow-sensitive taint analysis of source programs.

Only private inputs start tainted. Explicit flows propagate through
assignments; implicit flows are reported at the branch or loop condition
but never propagated. The declared return variable is a sink: writes to
it are checked and never taint it.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

from app.lang.ast import (
    Assign, Cmd, Cons, Expr, If, Index, Out, Path, Program, Sample, Seq, Span, Var, While, WhilePriv,
    children, free_vars,
)
from app.lang.typecheck import infer_types
from app.lang.types import BaseType

logger = logging.getLogger(__name__)

IMPLICIT_FLOW = "implicit-flow"
TAINTED_OUTPUT = "tainted-output"
TAINTED_OUTPUT_PATH = "tainted-assignment-to-output-path"


@dataclass(frozen=True)
class Violation:
    kind: str
    path: Path
    expr: Expr
    span: Optional[Span] = field(default=None, compare=False)

    def __str__(self) -> str:
        where = f" at {self.span}" if self.span else ""
        return f"{self.kind}{where} (path {'.'.join(map(str, self.path)) or 'root'})"


@dataclass
class TaintReport:
    """Tainted variables before every command, and the privacy violations found."""

    tainted: Dict[Path, FrozenSet[str]]
    violations: List[Violation]

    @property
    def ok(self) -> bool:
        return not self.violations

    def at(self, path: Path) -> FrozenSet[str]:
        return self.tainted.get(path, frozenset())


class _Analyzer:
    def __init__(self, p: Program):
        self.ret = p.decl.ret_name if p.decl else None
        self.tainted: Dict[Path, FrozenSet[str]] = {}
        self.found: Dict[Tuple[str, Path], Violation] = {}

    def report(self, kind: str, path: Path, e: Expr, node: Cmd) -> None:
        self.found[(kind, path)] = Violation(kind, path, e, getattr(node, "span", None))

    def run(self, c: Cmd, path: Path, state: FrozenSet[str]) -> FrozenSet[str]:
        self.tainted[path] = self.tainted.get(path, frozenset()) | state
        if isinstance(c, Seq):
            for i, x in enumerate(c.cmds):
                state = self.run(x, path + (i,), state)
            return state
        if isinstance(c, Assign):
            reads = bool(free_vars(c.rhs) & state)
            if c.lhs == self.ret:
                self._sink(c, path, state)
                return state
            return state | {c.lhs} if reads else state - {c.lhs}
        if isinstance(c, Sample):
            return state | {c.name} if free_vars(c.scale) & state else state - {c.name}
        if isinstance(c, Out):
            if free_vars(c.expr) & state:
                self.report(TAINTED_OUTPUT, path, c.expr, c)
            return state
        if isinstance(c, If):
            if free_vars(c.cond) & state:
                self.report(IMPLICIT_FLOW, path, c.cond, c)
            return self.run(c.then, path + (0,), state) | self.run(c.orelse, path + (1,), state)
        if isinstance(c, (While, WhilePriv)):
            entry = state
            while True:
                if free_vars(c.cond) & entry:
                    self.report(IMPLICIT_FLOW, path, c.cond, c)
                after = entry | self.run(c.body, path + (0,), entry)
                if after == entry:
                    return entry
                entry = after
        return state

    def _sink(self, c: Assign, path: Path, state: FrozenSet[str]) -> None:
        rhs = c.rhs
        if isinstance(rhs, Cons) and isinstance(rhs.tail, Var) and rhs.tail.name == self.ret:
            if free_vars(rhs.head) & state:
                self.report(TAINTED_OUTPUT_PATH, path, rhs, c)
        elif free_vars(rhs) & state:
            self.report(TAINTED_OUTPUT, path, rhs, c)


def analyze_taint(p: Program) -> TaintReport:
    """
    Run the taint analysis over a validated source program.

    Args:
        p: Source program

    Returns:
        TaintReport: Tainted sets per command path and violations in program order
    """
    analyzer = _Analyzer(p)
    private = frozenset(x.name for x in p.decl.private_inputs) if p.decl else frozenset()
    analyzer.run(p.body, (), private)
    violations = sorted(analyzer.found.values(), key=lambda v: (v.path, v.kind))
    for v in violations:
        logger.debug("%s: %s", p.name, v)
    return TaintReport(analyzer.tainted, violations)


def _visit_positions(node: Expr, in_index: bool, inside: Set[str], outside: Set[str]) -> None:
    if isinstance(node, Var):
        (inside if in_index else outside).add(node.name)
        return
    if isinstance(node, Index):
        _visit_positions(node.target, in_index, inside, outside)
        _visit_positions(node.index, True, inside, outside)
        return
    for child in children(node):
        _visit_positions(child, in_index, inside, outside)


def index_only_vars(e: Expr) -> Set[str]:
    """Variables read only inside index positions of e."""
    inside: Set[str] = set()
    outside: Set[str] = set()
    _visit_positions(e, False, inside, outside)
    return inside - outside


def offending_variables(p: Program, report: TaintReport) -> FrozenSet[str]:
    """
    Variables read by some offending expression.

    A list element read q[i] counts as a read of q; variables used only as
    indices, the return variable and boolean variables are excluded.

    Args:
        p: Source program
        report: Result of analyze_taint(p)

    Returns:
        FrozenSet[str]: Names to receive noise
    """
    types = infer_types(p)
    names: Set[str] = set()
    for v in report.violations:
        names.update(free_vars(v.expr) - index_only_vars(v.expr))
    if p.decl is not None:
        names.discard(p.decl.ret_name)
    return frozenset(n for n in names if types.get(n) in (BaseType.REAL, BaseType.LIST_REAL))
