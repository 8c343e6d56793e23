"""
Abstract syntax of source, sketch and target programs.

Nodes are frozen dataclasses compared structurally; source positions are
kept for diagnostics but never take part in equality.
"""
from dataclasses import dataclass, field, fields, replace
from typing import Callable, Dict, FrozenSet, Iterator, Optional, Tuple, Union

from app.lang.types import AdjacencyModel, BaseType, Privacy

HOLE_KINDS = ("theta", "lambda", "gamma")
ALIGNED_SUFFIX = "^"
SHADOW_SUFFIX = "~"


@dataclass(frozen=True)
class Span:
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


def _span() -> Optional[Span]:
    return field(default=None, compare=False, repr=False)


# Expressions

@dataclass(frozen=True)
class Num:
    value: float
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class BoolLit:
    value: bool
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Var:
    name: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Hole:
    """An unknown filled by the optimizer: theta[k], lambda[k] or gamma[k]."""

    kind: str
    index: int
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class LinOp:
    """Addition or subtraction."""

    op: str
    left: "Expr"
    right: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class OtherOp:
    """Multiplication, division or modulo."""

    op: str
    left: "Expr"
    right: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Cmp:
    op: str
    left: "Expr"
    right: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Logic:
    """Boolean `and` / `or`."""

    op: str
    left: "Expr"
    right: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Not:
    operand: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Ternary:
    cond: "Expr"
    then: "Expr"
    orelse: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Cons:
    head: "Expr"
    tail: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Index:
    target: "Expr"
    index: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Abs:
    operand: "Expr"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Cost:
    """Privacy cost |alignment| / scale of one draw; `aid` numbers its accounting check."""

    alignment: "Expr"
    scale: "Expr"
    aid: int = 0
    span: Optional[Span] = _span()


Expr = Union[Num, BoolLit, Var, Hole, Neg, LinOp, OtherOp, Cmp, Logic, Not, Ternary, Cons, Index, Abs, Cost]
EXPR_TYPES = (Num, BoolLit, Var, Hole, Neg, LinOp, OtherOp, Cmp, Logic, Not, Ternary, Cons, Index, Abs, Cost)


# Commands

@dataclass(frozen=True)
class Skip:
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Assign:
    lhs: str
    rhs: Expr
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Seq:
    """A block of commands executed in order."""

    cmds: Tuple["Cmd", ...] = ()
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Out:
    expr: Expr
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class If:
    cond: Expr
    then: "Cmd"
    orelse: "Cmd"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class While:
    cond: Expr
    body: "Cmd"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class WhilePriv:
    """Loop that runs until the privacy budget is exhausted."""

    cond: Expr
    body: "Cmd"
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Sample:
    name: str
    scale: Expr
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Assert:
    cond: Expr
    aid: int = 0
    span: Optional[Span] = _span()


Cmd = Union[Skip, Assign, Seq, Out, If, While, WhilePriv, Sample, Assert]
CMD_TYPES = (Skip, Assign, Seq, Out, If, While, WhilePriv, Sample, Assert)

Path = Tuple[int, ...]


# Declarations

@dataclass(frozen=True)
class Param:
    name: str
    type: BaseType
    privacy: Privacy = Privacy.PUBLIC

    @property
    def is_private(self) -> bool:
        return self.privacy is Privacy.PRIVATE


@dataclass(frozen=True)
class FunctionDecl:
    name: str
    params: Tuple[Param, ...]
    ret_name: str
    ret_type: BaseType
    budget: str = "eps"
    precondition: Optional[Expr] = None
    adjacency: Tuple[AdjacencyModel, ...] = ()
    span: Optional[Span] = _span()

    def param(self, name: str) -> Optional[Param]:
        for p in self.params:
            if p.name == name:
                return p
        return None

    @property
    def private_inputs(self) -> Tuple[Param, ...]:
        return tuple(p for p in self.params if p.is_private)

    @property
    def public_params(self) -> Tuple[Param, ...]:
        return tuple(p for p in self.params if not p.is_private)

    @property
    def public_reals(self) -> Tuple[str, ...]:
        """Non-private real parameters, in declaration order."""
        return tuple(p.name for p in self.params if not p.is_private and p.type is BaseType.REAL)

    def adjacency_of(self, name: str) -> Optional[AdjacencyModel]:
        for model in self.adjacency:
            if model.input == name:
                return model
        return None


@dataclass(frozen=True)
class Program:
    """A parsed program: optional signature header plus body."""

    decl: Optional[FunctionDecl]
    body: Seq

    @property
    def name(self) -> str:
        return self.decl.name if self.decl else "main"


SourceProgram = Program


# Smart constructors

def is_zero(e: Expr) -> bool:
    return isinstance(e, Num) and e.value == 0


def num(value: float) -> Num:
    return Num(float(value))


def neg(e: Expr) -> Expr:
    if isinstance(e, Num):
        return Num(-e.value)
    if isinstance(e, Neg):
        return e.operand
    return Neg(e)


def add(a: Expr, b: Expr) -> Expr:
    if is_zero(a):
        return b
    if is_zero(b):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    return LinOp("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if is_zero(b):
        return a
    if is_zero(a):
        return neg(b)
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    return LinOp("-", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if is_zero(a) or is_zero(b):
        return Num(0.0)
    if isinstance(a, Num) and a.value == 1:
        return b
    if isinstance(b, Num) and b.value == 1:
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    return OtherOp("*", a, b)


def conj(a: Expr, b: Expr) -> Expr:
    if isinstance(a, BoolLit) and a.value:
        return b
    if isinstance(b, BoolLit) and b.value:
        return a
    return Logic("and", a, b)


def seq(*cmds: Cmd) -> Seq:
    """Build a flat block, splicing nested blocks and dropping skips."""
    flat = []
    for c in cmds:
        if isinstance(c, Seq):
            flat.extend(c.cmds)
        elif not isinstance(c, Skip):
            flat.append(c)
    return Seq(tuple(flat))


def block(c: Cmd) -> Seq:
    return c if isinstance(c, Seq) else Seq((c,))


# Traversals

def children(e: Expr) -> Tuple[Expr, ...]:
    return tuple(getattr(e, f.name) for f in fields(e) if isinstance(getattr(e, f.name), EXPR_TYPES))


def walk_expr(e: Expr) -> Iterator[Expr]:
    """Yield e and all its subexpressions, parents first."""
    yield e
    for child in children(e):
        yield from walk_expr(child)


def map_expr(e: Expr, fn: Callable[[Expr], Expr]) -> Expr:
    """Rebuild e bottom-up, applying fn to every node after its children."""
    updates = {}
    for f in fields(e):
        value = getattr(e, f.name)
        if isinstance(value, EXPR_TYPES):
            new = map_expr(value, fn)
            if new is not value:
                updates[f.name] = new
    node = replace(e, **updates) if updates else e
    return fn(node)


def substitute(e: Expr, mapping: Dict[str, Expr]) -> Expr:
    """Replace variables by expressions."""
    if not mapping:
        return e
    return map_expr(e, lambda n: mapping.get(n.name, n) if isinstance(n, Var) else n)


def free_vars(e: Expr) -> FrozenSet[str]:
    """Variables read by e; an element read q[i] reads q and i."""
    return frozenset(n.name for n in walk_expr(e) if isinstance(n, Var))


def holes(e: Expr) -> FrozenSet[Tuple[str, int]]:
    return frozenset((n.kind, n.index) for n in walk_expr(e) if isinstance(n, Hole))


def expr_children_of(c: Cmd) -> Tuple[Expr, ...]:
    return tuple(getattr(c, f.name) for f in fields(c) if isinstance(getattr(c, f.name), EXPR_TYPES))


def sub_commands(c: Cmd) -> Tuple[Cmd, ...]:
    if isinstance(c, Seq):
        return c.cmds
    if isinstance(c, If):
        return (c.then, c.orelse)
    if isinstance(c, (While, WhilePriv)):
        return (c.body,)
    return ()


def iter_commands(c: Cmd, path: Path = ()) -> Iterator[Tuple[Path, Cmd]]:
    """Yield (path, command) in program order; children are addressed by position."""
    yield path, c
    for i, child in enumerate(sub_commands(c)):
        yield from iter_commands(child, path + (i,))


def command_at(c: Cmd, path: Path) -> Cmd:
    for i in path:
        c = sub_commands(c)[i]
    return c


def map_command_exprs(c: Cmd, fn: Callable[[Expr], Expr]) -> Cmd:
    """Apply fn to every top-level expression inside c, recursively through blocks."""
    if isinstance(c, Seq):
        return replace(c, cmds=tuple(map_command_exprs(x, fn) for x in c.cmds))
    if isinstance(c, If):
        return replace(c, cond=fn(c.cond), then=map_command_exprs(c.then, fn), orelse=map_command_exprs(c.orelse, fn))
    if isinstance(c, (While, WhilePriv)):
        return replace(c, cond=fn(c.cond), body=map_command_exprs(c.body, fn))
    if isinstance(c, Assign):
        return replace(c, rhs=fn(c.rhs))
    if isinstance(c, Out):
        return replace(c, expr=fn(c.expr))
    if isinstance(c, Sample):
        return replace(c, scale=fn(c.scale))
    if isinstance(c, Assert):
        return replace(c, cond=fn(c.cond))
    return c


def assigned_vars(c: Cmd) -> FrozenSet[str]:
    names = set()
    for _, node in iter_commands(c):
        if isinstance(node, (Assign, Sample)):
            names.add(node.lhs if isinstance(node, Assign) else node.name)
    return frozenset(names)


def all_expressions(c: Cmd) -> Iterator[Expr]:
    for _, node in iter_commands(c):
        for e in expr_children_of(node):
            yield from walk_expr(e)


def all_names(c: Cmd) -> FrozenSet[str]:
    names = set(assigned_vars(c))
    names.update(n.name for n in all_expressions(c) if isinstance(n, Var))
    return frozenset(names)


def hat(name: str) -> str:
    return name + ALIGNED_SUFFIX


def shadow(name: str) -> str:
    return name + SHADOW_SUFFIX


def is_distance_name(name: str) -> bool:
    return name.endswith(ALIGNED_SUFFIX) or name.endswith(SHADOW_SUFFIX)


def base_name(name: str) -> str:
    return name[:-1] if is_distance_name(name) else name


def map_commands(c: Cmd, fn: Callable[[Cmd], Cmd]) -> Cmd:
    """Rebuild c bottom-up, applying fn to every command after its sub-commands."""
    if isinstance(c, Seq):
        c = replace(c, cmds=tuple(map_commands(x, fn) for x in c.cmds))
    elif isinstance(c, If):
        c = replace(c, then=map_commands(c.then, fn), orelse=map_commands(c.orelse, fn))
    elif isinstance(c, (While, WhilePriv)):
        c = replace(c, body=map_commands(c.body, fn))
    return fn(c)
