"""
Type inference for DSL programs.

Locals are declared implicitly by their first assignment. Unknown
variables are left untyped here; use-before-assignment is reported by
validate().
"""
from typing import Dict, Optional

from app.core.exceptions import DSLTypeError
from app.lang.ast import (
    Abs, Assert, Assign, BoolLit, Cmd, Cmp, Cons, Cost, Expr, Hole, If, Index, LinOp, Logic, Neg, Not,
    Num, OtherOp, Out, Program, Sample, Seq, Skip, Ternary, Var, While, WhilePriv, base_name,
)
from app.lang.types import BaseType

INTERNAL_TYPES = {
    "_sample": BaseType.LIST_REAL,
    "_idx": BaseType.REAL,
    "_epshat": BaseType.REAL,
    "_spent": BaseType.REAL,
    "_t": BaseType.REAL,
}

TypeEnv = Dict[str, BaseType]


def _fail(message: str, node) -> None:
    span = getattr(node, "span", None)
    raise DSLTypeError(message, span.line if span else 0, span.column if span else 0)


def _expect(actual: Optional[BaseType], expected: BaseType, node) -> None:
    if actual is not None and actual is not expected:
        _fail(f"expected {expected.value}, found {actual.value}", node)


def _lookup(env: TypeEnv, name: str) -> Optional[BaseType]:
    if name in env:
        return env[name]
    if name in INTERNAL_TYPES:
        return INTERNAL_TYPES[name]
    base = base_name(name)
    if base != name:
        return env.get(base)
    return None


def expr_type(e: Expr, env: TypeEnv) -> Optional[BaseType]:
    """Infer the type of e, raising DSLTypeError on a mismatch."""
    if isinstance(e, Num) or isinstance(e, Hole):
        return BaseType.REAL
    if isinstance(e, BoolLit):
        return BaseType.BOOL
    if isinstance(e, Var):
        return _lookup(env, e.name)
    if isinstance(e, (Neg, Abs)):
        _expect(expr_type(e.operand, env), BaseType.REAL, e)
        return BaseType.REAL
    if isinstance(e, (LinOp, OtherOp)):
        _expect(expr_type(e.left, env), BaseType.REAL, e)
        _expect(expr_type(e.right, env), BaseType.REAL, e)
        return BaseType.REAL
    if isinstance(e, Cost):
        _expect(expr_type(e.alignment, env), BaseType.REAL, e)
        _expect(expr_type(e.scale, env), BaseType.REAL, e)
        return BaseType.REAL
    if isinstance(e, Cmp):
        left, right = expr_type(e.left, env), expr_type(e.right, env)
        if e.op in ("=", "!="):
            if left is not None and right is not None and left is not right:
                _fail(f"cannot compare {left.value} with {right.value}", e)
            if (left or right) is not None and (left or right).is_list:
                _fail("lists cannot be compared", e)
        else:
            _expect(left, BaseType.REAL, e)
            _expect(right, BaseType.REAL, e)
        return BaseType.BOOL
    if isinstance(e, Logic):
        _expect(expr_type(e.left, env), BaseType.BOOL, e)
        _expect(expr_type(e.right, env), BaseType.BOOL, e)
        return BaseType.BOOL
    if isinstance(e, Not):
        _expect(expr_type(e.operand, env), BaseType.BOOL, e)
        return BaseType.BOOL
    if isinstance(e, Ternary):
        _expect(expr_type(e.cond, env), BaseType.BOOL, e)
        then, orelse = expr_type(e.then, env), expr_type(e.orelse, env)
        if then is not None and orelse is not None and then is not orelse:
            _fail(f"ternary branches differ: {then.value} and {orelse.value}", e)
        return then or orelse
    if isinstance(e, Cons):
        head, tail = expr_type(e.head, env), expr_type(e.tail, env)
        if head is not None and head.is_list:
            _fail("lists cannot be nested", e)
        if tail is not None and not tail.is_list:
            _fail(f"cons tail must be a list, found {tail.value}", e)
        if head is not None and tail is not None and tail.element is not head:
            _fail(f"cannot cons {head.value} onto {tail.value}", e)
        if head is not None:
            return BaseType.list_of(head)
        return tail
    if isinstance(e, Index):
        target = expr_type(e.target, env)
        _expect(expr_type(e.index, env), BaseType.REAL, e)
        if target is None:
            return None
        if not target.is_list:
            _fail(f"cannot index a {target.value}", e)
        return target.element
    raise TypeError(f"unknown expression node {type(e).__name__}")


def _check_cmd(c: Cmd, env: TypeEnv) -> None:
    if isinstance(c, Skip):
        return
    if isinstance(c, Seq):
        for x in c.cmds:
            _check_cmd(x, env)
    elif isinstance(c, Assign):
        t = expr_type(c.rhs, env)
        known = _lookup(env, c.lhs)
        if t is not None and known is not None and known is not t:
            _fail(f"'{c.lhs}' has type {known.value} but is assigned {t.value}", c)
        if t is not None and c.lhs not in env and c.lhs not in INTERNAL_TYPES:
            env[c.lhs] = t
    elif isinstance(c, Sample):
        _expect(expr_type(c.scale, env), BaseType.REAL, c)
        env[c.name] = BaseType.REAL
    elif isinstance(c, Out):
        expr_type(c.expr, env)
    elif isinstance(c, Assert):
        _expect(expr_type(c.cond, env), BaseType.BOOL, c)
    elif isinstance(c, If):
        _expect(expr_type(c.cond, env), BaseType.BOOL, c)
        _check_cmd(c.then, env)
        _check_cmd(c.orelse, env)
    elif isinstance(c, (While, WhilePriv)):
        for _ in range(2):
            _expect(expr_type(c.cond, env), BaseType.BOOL, c)
            _check_cmd(c.body, env)
    else:
        raise TypeError(f"unknown command node {type(c).__name__}")


def infer_types(p: Program) -> TypeEnv:
    """
    Infer variable types of a program.

    Args:
        p: Parsed program

    Returns:
        TypeEnv: Type of every parameter and assigned variable

    Raises:
        DSLTypeError: On the first mismatch found
    """
    env: TypeEnv = {}
    if p.decl is not None:
        for param in p.decl.params:
            env[param.name] = param.type
        env[p.decl.ret_name] = p.decl.ret_type
        env[p.decl.budget] = BaseType.REAL
    _check_cmd(p.body, env)
    return env
