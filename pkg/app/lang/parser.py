"""
Parser for the annotated DSL (`.dp` files).
"""
from typing import Optional

import pyparsing as pp

from app.core.exceptions import ParseError
from app.lang.ast import (
    Abs, Assert, Assign, BoolLit, Cmp, Cons, Cost, Expr, FunctionDecl, Hole, If, Index, LinOp, Logic,
    Neg, Not, Num, OtherOp, Out, Param, Program, Sample, Seq, Skip, Span, Ternary, Var, While, WhilePriv,
)
from app.lang.types import AdjacencyKind, AdjacencyModel, BaseType, Privacy

pp.ParserElement.enable_packrat()

RESERVED = (
    "func", "returns", "budget", "precondition", "adjacency", "private", "real", "bool", "list",
    "if", "else", "while", "while-priv", "skip", "assert", "Lap", "abs", "cost",
    "theta", "lambda", "gamma", "true", "false", "and", "or", "not", "mod",
    "all_differ", "one_differ", "scalar_differ",
)


def _span(s: str, loc: int) -> Span:
    return Span(pp.lineno(loc, s), pp.col(loc, s))


def _kw(word: str) -> pp.Keyword:
    return pp.Keyword(word)


LPAR, RPAR, LBRACK, RBRACK, LBRACE, RBRACE, SEMI, COMMA = map(pp.Suppress, "()[]{};,")
COLON = pp.Suppress(pp.Regex(r":(?![:=])"))
ASSIGN = pp.Suppress(":=")

_reserved = pp.MatchFirst([_kw(w) for w in sorted(RESERVED, key=len, reverse=True)])
IDENT = (~_reserved + pp.Regex(r"[A-Za-z_][A-Za-z0-9_]*[\^~]?")).set_name("identifier")
NUMBER = pp.Regex(r"\d+(\.\d*)?|\.\d+").set_name("number")
INTEGER = pp.Regex(r"\d+")


# Expressions

def _on_number(s, loc, toks):
    return Num(float(toks[0]), _span(s, loc))


def _on_bool(s, loc, toks):
    return BoolLit(toks[0] == "true", _span(s, loc))


def _on_var(s, loc, toks):
    return Var(toks[0], _span(s, loc))


def _on_hole(s, loc, toks):
    return Hole(toks[0], int(toks[1]), _span(s, loc))


def _on_abs(s, loc, toks):
    return Abs(toks[0], _span(s, loc))


def _on_cost(s, loc, toks):
    return Cost(toks[0], toks[1], 0, _span(s, loc))


def _on_postfix(s, loc, toks):
    result = toks[0]
    for group in toks[1:]:
        result = Index(result, group[0], _span(s, loc))
    return result


def _on_unary(s, loc, toks):
    op, operand = toks[0][0], toks[0][-1]
    if op == "not":
        return Not(operand, _span(s, loc))
    if isinstance(operand, Num):
        return Num(-operand.value, _span(s, loc))
    return Neg(operand, _span(s, loc))


def _make_binary(op: str, left: Expr, right: Expr, span: Span) -> Expr:
    if op in ("+", "-"):
        return LinOp(op, left, right, span)
    if op in ("*", "/", "mod"):
        return OtherOp(op, left, right, span)
    if op in ("and", "or"):
        return Logic(op, left, right, span)
    return Cmp(op, left, right, span)


def _on_left_binary(s, loc, toks):
    t = toks[0]
    result = t[0]
    for i in range(1, len(t), 2):
        result = _make_binary(t[i], result, t[i + 1], _span(s, loc))
    return result


def _on_cons(s, loc, toks):
    t = toks[0]
    result = t[-1]
    for i in range(len(t) - 3, -1, -2):
        result = Cons(t[i], result, _span(s, loc))
    return result


def _on_ternary(s, loc, toks):
    t = [x for x in toks[0] if not (isinstance(x, str) and x in ("?", ":"))]
    return Ternary(t[0], t[1], t[2], _span(s, loc))


expr = pp.Forward().set_name("expression")

_hole = (_kw("theta") | _kw("lambda") | _kw("gamma")) + LBRACK + INTEGER + RBRACK
_abs = _kw("abs").suppress() + LPAR + expr + RPAR
_cost = _kw("cost").suppress() + LPAR + expr + COMMA + expr + RPAR
_atom = (
    NUMBER.copy().set_parse_action(_on_number)
    | (_kw("true") | _kw("false")).set_parse_action(_on_bool)
    | _hole.set_parse_action(_on_hole)
    | _abs.set_parse_action(_on_abs)
    | _cost.set_parse_action(_on_cost)
    | IDENT.copy().set_parse_action(_on_var)
    | (LPAR + expr + RPAR)
)
_postfix = (_atom + pp.ZeroOrMore(pp.Group(LBRACK + expr + RBRACK))).set_parse_action(_on_postfix)

expr <<= pp.infix_notation(
    _postfix,
    [
        (pp.Literal("-"), 1, pp.OpAssoc.RIGHT, _on_unary),
        (pp.one_of("* /") | _kw("mod"), 2, pp.OpAssoc.LEFT, _on_left_binary),
        (pp.one_of("+ -"), 2, pp.OpAssoc.LEFT, _on_left_binary),
        (pp.Literal("::"), 2, pp.OpAssoc.RIGHT, _on_cons),
        (pp.one_of("<= >= != < > ="), 2, pp.OpAssoc.LEFT, _on_left_binary),
        (_kw("not"), 1, pp.OpAssoc.RIGHT, _on_unary),
        (_kw("and"), 2, pp.OpAssoc.LEFT, _on_left_binary),
        (_kw("or"), 2, pp.OpAssoc.LEFT, _on_left_binary),
        ((pp.Literal("?"), pp.Regex(r":(?![:=])")), 3, pp.OpAssoc.RIGHT, _on_ternary),
    ],
)


# Commands

def _on_block(s, loc, toks):
    return Seq(tuple(toks[0]), _span(s, loc))


def _on_if(s, loc, toks):
    orelse = toks[2] if len(toks) > 2 else Seq(())
    return If(toks[0], toks[1], orelse, _span(s, loc))


stmt = pp.Forward().set_name("statement")
block = (LBRACE + pp.Group(pp.ZeroOrMore(stmt)) + RBRACE).set_parse_action(_on_block)

if_stmt = pp.Forward()
if_stmt <<= (
    _kw("if").suppress() + LPAR + expr + RPAR + block
    + pp.Optional(_kw("else").suppress() + (block | if_stmt))
).set_parse_action(_on_if)

while_priv_stmt = (_kw("while-priv").suppress() + LPAR + expr + RPAR + block).set_parse_action(
    lambda s, loc, t: WhilePriv(t[0], t[1], _span(s, loc))
)
while_stmt = (_kw("while").suppress() + LPAR + expr + RPAR + block).set_parse_action(
    lambda s, loc, t: While(t[0], t[1], _span(s, loc))
)
assert_stmt = (_kw("assert").suppress() + LPAR + expr + RPAR + SEMI).set_parse_action(
    lambda s, loc, t: Assert(t[0], 0, _span(s, loc))
)
skip_stmt = (_kw("skip") + pp.Optional(SEMI)).set_parse_action(lambda s, loc, t: Skip(_span(s, loc)))
sample_stmt = (IDENT + ASSIGN + _kw("Lap").suppress() + LPAR + expr + RPAR + SEMI).set_parse_action(
    lambda s, loc, t: Sample(t[0], t[1], _span(s, loc))
)
assign_stmt = (IDENT + ASSIGN + expr + SEMI).set_parse_action(
    lambda s, loc, t: Assign(t[0], t[1], _span(s, loc))
)
out_stmt = (pp.Keyword("out").suppress() + expr + SEMI).set_parse_action(
    lambda s, loc, t: Out(t[0], _span(s, loc))
)

stmt <<= skip_stmt | if_stmt | while_priv_stmt | while_stmt | assert_stmt | sample_stmt | assign_stmt | out_stmt


# Header

def _on_type(toks):
    return BaseType(" ".join(toks))


def _on_param(toks):
    privacy = Privacy.PRIVATE if "private" in toks[1:-1] else Privacy.PUBLIC
    return Param(str(toks[0]), toks[-1], privacy)


def _on_adjacency(toks):
    delta = toks[2].value if len(toks) > 2 else 1.0
    return AdjacencyModel(str(toks[0]), AdjacencyKind(toks[1]), delta)


def _on_header(s, loc, toks):
    precondition = toks.get("precondition")
    return FunctionDecl(
        name=str(toks["name"]),
        params=tuple(toks["params"]),
        ret_name=str(toks["ret_name"]),
        ret_type=toks["ret_type"],
        budget=str(toks["budget"]),
        precondition=precondition,
        adjacency=tuple(toks["adjacency"]),
        span=_span(s, loc),
    )


type_ = ((_kw("list") + (_kw("real") | _kw("bool"))) | _kw("real") | _kw("bool")).set_parse_action(_on_type)
param = (IDENT + COLON + pp.Optional(_kw("private")) + type_).set_parse_action(_on_param)
adjacency = (
    _kw("adjacency").suppress() + IDENT + COLON
    + (_kw("all_differ") | _kw("one_differ") | _kw("scalar_differ"))
    + pp.Optional(NUMBER.copy().set_parse_action(_on_number)) + SEMI
).set_parse_action(_on_adjacency)

header = (
    _kw("func").suppress() + IDENT("name")
    + LPAR + pp.Group(param + pp.ZeroOrMore(COMMA + param))("params") + RPAR
    + _kw("returns").suppress() + LPAR + IDENT("ret_name") + COLON + type_("ret_type") + RPAR + SEMI
    + _kw("budget").suppress() + IDENT("budget") + SEMI
    + pp.Optional(_kw("precondition").suppress() + expr("precondition") + SEMI)
    + pp.Group(pp.ZeroOrMore(adjacency))("adjacency")
).set_parse_action(_on_header)

program = pp.Optional(header)("decl") + pp.Group(pp.ZeroOrMore(stmt))("body")
program.ignore(pp.dbl_slash_comment)


def parse(text: str, check_types: bool = True) -> Program:
    """
    Parse a DSL text into a program.

    Args:
        text: Program text, optionally starting with a `func` header
        check_types: Run type inference and reject mismatches

    Returns:
        Program: Parsed program with source positions attached

    Raises:
        ParseError: On syntax errors
        DSLTypeError: On type mismatches
    """
    try:
        result = program.parse_string(text, parse_all=True)
    except pp.ParseBaseException as exc:
        raise ParseError(exc.msg, exc.lineno, exc.col) from exc
    decl: Optional[FunctionDecl] = result.get("decl")
    if isinstance(decl, pp.ParseResults):
        decl = decl[0] if len(decl) else None
    parsed = Program(decl, Seq(tuple(result["body"])))
    if check_types:
        from app.lang.typecheck import infer_types
        infer_types(parsed)
    return parsed


def parse_expr(text: str) -> Expr:
    """Parse a single expression."""
    try:
        return (expr + pp.StringEnd()).parse_string(text)[0]
    except pp.ParseBaseException as exc:
        raise ParseError(exc.msg, exc.lineno, exc.col) from exc


def parse_file(path: str) -> Program:
    with open(path, encoding="utf-8") as handle:
        return parse(handle.read())
