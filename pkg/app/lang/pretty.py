"""
Pretty printer producing text that parses back to the same AST.
"""
from typing import List, Union

import numpy as np

from app.lang.ast import (
    Abs, Assert, Assign, BoolLit, Cmd, Cmp, Cons, Cost, Expr, FunctionDecl, Hole, If, Index, LinOp, Logic,
    Neg, Not, Num, OtherOp, Out, Program, Sample, Seq, Skip, Ternary, Var, While, WhilePriv, CMD_TYPES,
)

INDENT = "    "

# Binding strength, loosest first.
_TERNARY, _OR, _AND, _NOT, _CMP, _CONS, _ADD, _MUL, _NEG, _ATOM = range(1, 11)


def format_number(value: float) -> str:
    """Plain decimal notation, shortest form that round-trips."""
    return np.format_float_positional(float(value), trim="-")


def _precedence(e: Expr) -> int:
    if isinstance(e, Ternary):
        return _TERNARY
    if isinstance(e, Logic):
        return _OR if e.op == "or" else _AND
    if isinstance(e, Not):
        return _NOT
    if isinstance(e, Cmp):
        return _CMP
    if isinstance(e, Cons):
        return _CONS
    if isinstance(e, LinOp):
        return _ADD
    if isinstance(e, OtherOp):
        return _MUL
    if isinstance(e, Neg):
        return _NEG
    if isinstance(e, Num) and e.value < 0:
        return _NEG
    return _ATOM


def _wrap(e: Expr, minimum: int) -> str:
    text = format_expr(e)
    return f"({text})" if _precedence(e) < minimum else text


def format_expr(e: Expr) -> str:
    if isinstance(e, Num):
        return format_number(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Hole):
        return f"{e.kind}[{e.index}]"
    if isinstance(e, Neg):
        return "-" + _wrap(e.operand, _NEG)
    if isinstance(e, Not):
        return "not " + _wrap(e.operand, _NOT)
    if isinstance(e, Abs):
        return f"abs({format_expr(e.operand)})"
    if isinstance(e, Cost):
        return f"cost({format_expr(e.alignment)}, {format_expr(e.scale)})"
    if isinstance(e, LinOp):
        return f"{_wrap(e.left, _ADD)} {e.op} {_wrap(e.right, _ADD + 1)}"
    if isinstance(e, OtherOp):
        return f"{_wrap(e.left, _MUL)} {e.op} {_wrap(e.right, _MUL + 1)}"
    if isinstance(e, Cmp):
        return f"{_wrap(e.left, _CMP + 1)} {e.op} {_wrap(e.right, _CMP + 1)}"
    if isinstance(e, Logic):
        level = _precedence(e)
        return f"{_wrap(e.left, level)} {e.op} {_wrap(e.right, level + 1)}"
    if isinstance(e, Cons):
        return f"{_wrap(e.head, _CONS + 1)} :: {_wrap(e.tail, _CONS)}"
    if isinstance(e, Ternary):
        return f"{_wrap(e.cond, _OR)} ? {_wrap(e.then, _TERNARY)} : {_wrap(e.orelse, _TERNARY)}"
    if isinstance(e, Index):
        return f"{_wrap(e.target, _ATOM)}[{format_expr(e.index)}]"
    raise TypeError(f"unknown expression node {type(e).__name__}")


def _format_block(c: Cmd, depth: int) -> List[str]:
    cmds = c.cmds if isinstance(c, Seq) else (c,)
    lines: List[str] = []
    for x in cmds:
        lines.extend(_format_cmd(x, depth))
    return lines


def _format_if(c: If, depth: int) -> List[str]:
    pad = INDENT * depth
    lines = [f"{pad}if ({format_expr(c.cond)}) {{"]
    lines.extend(_format_block(c.then, depth + 1))
    orelse = c.orelse
    if isinstance(orelse, If):
        nested = _format_if(orelse, depth)
        lines.append(f"{pad}}} else {nested[0].lstrip()}")
        lines.extend(nested[1:])
        return lines
    if isinstance(orelse, Seq) and not orelse.cmds:
        lines.append(f"{pad}}}")
        return lines
    lines.append(f"{pad}}} else {{")
    lines.extend(_format_block(orelse, depth + 1))
    lines.append(f"{pad}}}")
    return lines


def _format_cmd(c: Cmd, depth: int) -> List[str]:
    pad = INDENT * depth
    if isinstance(c, Skip):
        return [f"{pad}skip;"]
    if isinstance(c, Assign):
        return [f"{pad}{c.lhs} := {format_expr(c.rhs)};"]
    if isinstance(c, Sample):
        return [f"{pad}{c.name} := Lap({format_expr(c.scale)});"]
    if isinstance(c, Out):
        return [f"{pad}out {format_expr(c.expr)};"]
    if isinstance(c, Assert):
        return [f"{pad}assert({format_expr(c.cond)});"]
    if isinstance(c, Seq):
        return _format_block(c, depth)
    if isinstance(c, If):
        return _format_if(c, depth)
    if isinstance(c, (While, WhilePriv)):
        keyword = "while-priv" if isinstance(c, WhilePriv) else "while"
        return [f"{pad}{keyword} ({format_expr(c.cond)}) {{", *_format_block(c.body, depth + 1), f"{pad}}}"]
    raise TypeError(f"unknown command node {type(c).__name__}")


def format_header(d: FunctionDecl) -> List[str]:
    params = ", ".join(
        f"{p.name} : {'private ' if p.is_private else ''}{p.type.value}" for p in d.params
    )
    lines = [
        f"func {d.name}({params}) returns ({d.ret_name} : {d.ret_type.value});",
        f"budget {d.budget};",
    ]
    if d.precondition is not None:
        lines.append(f"precondition {format_expr(d.precondition)};")
    for model in d.adjacency:
        delta = "" if model.delta == 1 else f" {format_number(model.delta)}"
        lines.append(f"adjacency {model.input} : {model.kind.value}{delta};")
    return lines


def pretty(p: Union[Program, Cmd, Expr]) -> str:
    """
    Render a program, command or expression as DSL text.

    Args:
        p: Source, sketch or target program, or any node

    Returns:
        str: Text such that parse(pretty(p)) equals p
    """
    if isinstance(p, Program):
        lines = format_header(p.decl) if p.decl is not None else []
        if lines:
            lines.append("")
        lines.extend(_format_block(p.body, 0))
        return "\n".join(lines) + "\n"
    if isinstance(p, Skip):
        return "skip"
    if isinstance(p, CMD_TYPES):
        return "\n".join(_format_cmd(p, 0))
    return format_expr(p)
