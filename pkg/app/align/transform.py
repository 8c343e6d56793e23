"""
Relational transformation of sketches.

The sketch becomes a deterministic program that tracks the distance
between an execution and its aligned counterpart on an adjacent input,
reads every draw from the `_sample` array, accumulates the privacy cost
in `_epshat` and asserts what an alignment has to satisfy.

The program is built in two passes. The first pass leaves a placeholder
variable where each alignment goes; the data dependence of the first-pass
program then yields the alignment templates, which replace the
placeholders. Assertions are numbered in program order at the end.
"""
import logging
from dataclasses import fields, replace
from typing import Dict, FrozenSet, List, Optional, Tuple

from app.align.dependence import analyze_site
from app.align.env import TypingEnv, merge_code
from app.align.program import SamplingSite, TransformedProgram, number_assertions
from app.align.templates import AlignmentTemplate, BudgetBoundTemplate, LinearTemplate, ScaleTemplate
from app.core.exceptions import TransformError
from app.lang.ast import (
    Abs, Assert, Assign, BoolLit, Cmd, Cmp, Cons, Cost, Expr, FunctionDecl, Hole, If, Index, LinOp, Logic,
    Neg, Not, Num, OtherOp, Out, Path, Program, Sample, Seq, Skip, Ternary, Var, While, WhilePriv, EXPR_TYPES,
    add, all_names, conj, free_vars, hat, is_zero, iter_commands, map_command_exprs, mul, neg, sub,
    substitute,
)
from app.lang.pretty import format_expr, format_number
from app.lang.typecheck import infer_types
from app.sketch.generator import Sketch

logger = logging.getLogger(__name__)

SAMPLE = "_sample"
IDX = "_idx"
EPSHAT = "_epshat"
SPENT = "_spent"
ITERATION_START = "_t"

# Origin rules of assertions
LAPLACE = "laplace"
IF_THEN = "if-then"
IF_ELSE = "if-else"
WHILE_BODY = "while-body"
WHILE_EXIT = "while-exit"
WHILE_PRIV_BOUND = "while-priv-bound"
ZERO_OPERAND = "zero-operand"
COMPARISON = "comparison"
CONS = "cons"
INDEX = "index"
ABS = "abs"
OUT = "out"
RETURN = "return"
BUDGET = "budget"
COST = "cost"
SPENT_COST = "spent-cost"

Constraints = List[Tuple[Expr, str]]


def alignment_placeholder(eta: str) -> str:
    return f"_align_{eta}"


def bound_placeholder(eta: str) -> str:
    return f"_bound_{eta}"


def equivalent(a: Expr, b: Expr) -> Expr:
    return Logic("or", Logic("and", a, b), Logic("and", Not(a), Not(b)))


class _Transformer:
    def __init__(self, sk: Sketch):
        p = sk.program
        if p.decl is None:
            raise TransformError("a function header is required")
        self.sk = sk
        self.decl = p.decl
        types = infer_types(p)
        self.lists = frozenset(n for n, t in types.items() if t.is_list)
        self.while_priv = any(isinstance(c, WhilePriv) for _, c in iter_commands(p.body))
        self.rules: Dict[int, str] = {}
        self.bounds: Dict[Path, BudgetBoundTemplate] = {}

    # Assertions and costs get provisional ids; number_assertions renumbers them.

    def _assert(self, cond: Expr, rule: str) -> Assert:
        aid = len(self.rules) + 1
        self.rules[aid] = rule
        return Assert(cond, aid)

    def _cost(self, alignment: Expr, scale: Expr, rule: str) -> Cost:
        aid = len(self.rules) + 1
        self.rules[aid] = rule
        return Cost(alignment, scale, aid)

    def _emit(self, constraints: Constraints) -> List[Cmd]:
        return [self._assert(cond, rule) for cond, rule in constraints]

    # Expressions

    def _require_zero(self, n: Expr, what: str, rule: str, node: Expr, cs: Constraints) -> None:
        if is_zero(n):
            return
        if isinstance(n, Num):
            raise TransformError(
                f"{what} of '{format_expr(node)}' must have zero distance, found {format_number(n.value)}"
            )
        cs.append((Cmp("=", n, Num(0.0)), rule))

    def shift(self, e: Expr, env: TypingEnv) -> Expr:
        """e evaluated in the aligned execution."""
        if isinstance(e, Var):
            if env.is_star(e.name) and e.name not in self.lists:
                return LinOp("+", e, Var(hat(e.name)))
            return e
        if isinstance(e, Index):
            if isinstance(e.target, Var) and env.is_star(e.target.name):
                return LinOp("+", e, Index(Var(hat(e.target.name)), e.index))
            return e
        updates = {}
        for f in fields(e):
            value = getattr(e, f.name)
            if isinstance(value, EXPR_TYPES):
                updates[f.name] = self.shift(value, env)
        return replace(e, **updates) if updates else e

    def condition(self, e: Expr, env: TypingEnv, cs: Constraints) -> None:
        """Side constraints of the numeric parts of a boolean expression."""
        if isinstance(e, Cmp):
            self.distance(e.left, env, cs)
            self.distance(e.right, env, cs)
        elif isinstance(e, Logic):
            self.condition(e.left, env, cs)
            self.condition(e.right, env, cs)
        elif isinstance(e, Not):
            self.condition(e.operand, env, cs)
        elif isinstance(e, Ternary):
            self.distance(e, env, cs)

    def distance(self, e: Expr, env: TypingEnv, cs: Constraints) -> Expr:
        """Distance of e between the two executions; side constraints go to cs."""
        if isinstance(e, (Num, BoolLit, Hole)):
            return Num(0.0)
        if isinstance(e, Var):
            if not env.is_star(e.name):
                return Num(0.0)
            if e.name in self.lists:
                raise TransformError(f"list {e.name} with a tracked distance is used as a value")
            return Var(hat(e.name))
        if isinstance(e, Neg):
            return neg(self.distance(e.operand, env, cs))
        if isinstance(e, LinOp):
            a = self.distance(e.left, env, cs)
            b = self.distance(e.right, env, cs)
            return add(a, b) if e.op == "+" else sub(a, b)
        if isinstance(e, OtherOp):
            a = self.distance(e.left, env, cs)
            b = self.distance(e.right, env, cs)
            if e.op == "*" and is_zero(b):
                return mul(a, e.right)
            if e.op == "*" and is_zero(a):
                return mul(e.left, b)
            if e.op == "/" and is_zero(b):
                return Num(0.0) if is_zero(a) else OtherOp("/", a, e.right)
            self._require_zero(a, "left operand", ZERO_OPERAND, e, cs)
            self._require_zero(b, "right operand", ZERO_OPERAND, e, cs)
            return Num(0.0)
        if isinstance(e, (Cmp, Logic, Not)):
            self.condition(e, env, cs)
            shifted = self.shift(e, env)
            if shifted != e:
                cs.append((equivalent(e, shifted), COMPARISON))
            return Num(0.0)
        if isinstance(e, Ternary):
            self.condition(e.cond, env, cs)
            shifted = self.shift(e.cond, env)
            if shifted != e.cond:
                cs.append((equivalent(e.cond, shifted), COMPARISON))
            a = self.distance(e.then, env, cs)
            b = self.distance(e.orelse, env, cs)
            return a if a == b else Ternary(e.cond, a, b)
        if isinstance(e, Cons):
            self._require_zero(self.distance(e.head, env, cs), "list element", CONS, e, cs)
            self.distance(e.tail, env, cs)
            return Num(0.0)
        if isinstance(e, Index):
            self._require_zero(self.distance(e.index, env, cs), "index", INDEX, e, cs)
            if isinstance(e.target, Var) and env.is_star(e.target.name):
                return Index(Var(hat(e.target.name)), e.index)
            return Num(0.0)
        if isinstance(e, Abs):
            self._require_zero(self.distance(e.operand, env, cs), "operand", ABS, e, cs)
            return Num(0.0)
        raise TransformError(f"cannot transform expression '{format_expr(e)}'")

    # Commands

    def _bound(self, path: Path) -> BudgetBoundTemplate:
        if path not in self.bounds:
            names = self.decl.public_reals
            start = len(self.bounds) * (1 + len(names))
            terms = tuple(zip(range(start + 1, start + 1 + len(names)), names))
            self.bounds[path] = BudgetBoundTemplate(len(self.bounds), start, terms, self.decl.budget)
        return self.bounds[path]

    def block(self, c: Cmd, env: TypingEnv, path: Path) -> Tuple[List[Cmd], TypingEnv]:
        if not isinstance(c, Seq):
            return self.cmd(c, env, path)
        out: List[Cmd] = []
        for i, x in enumerate(c.cmds):
            cmds, env = self.cmd(x, env, path + (i,))
            out.extend(cmds)
        return out, env

    def _invariant(self, c: Cmd, env: TypingEnv, path: Path) -> TypingEnv:
        inv = env
        for _ in range(len(all_names(c)) + 2):
            _, out = self.block(c.body, inv, path + (0,))
            joined = inv.join(out)
            if joined == inv:
                return inv
            inv = joined
        raise TransformError("no loop invariant distance environment found")

    def cmd(self, c: Cmd, env: TypingEnv, path: Path) -> Tuple[List[Cmd], TypingEnv]:
        if isinstance(c, Skip):
            return [], env
        if isinstance(c, Seq):
            return self.block(c, env, path)
        if isinstance(c, Assign):
            cs: Constraints = []
            n = self.distance(c.rhs, env, cs)
            cmds = self._emit(cs)
            if is_zero(n):
                return cmds + [c], env.zero(c.lhs)
            update = Assign(hat(c.lhs), n)
            if c.lhs in free_vars(n):
                return cmds + [update, c], env.star(c.lhs)
            return cmds + [c, update], env.star(c.lhs)
        if isinstance(c, Sample):
            return self._sample(c), env.star(c.name)
        if isinstance(c, Out):
            cs = []
            n = self.distance(c.expr, env, cs)
            cmds = self._emit(cs)
            if not is_zero(n):
                cmds.append(self._assert(Cmp("=", n, Num(0.0)), OUT))
            return cmds + [c], env
        if isinstance(c, If):
            cs = []
            self.condition(c.cond, env, cs)
            cmds = self._emit(cs)
            shifted = self.shift(c.cond, env)
            then_head: List[Cmd] = []
            else_head: List[Cmd] = []
            if shifted != c.cond:
                then_head.append(self._assert(shifted, IF_THEN))
                else_head.append(self._assert(Not(shifted), IF_ELSE))
            then, then_env = self.block(c.then, env, path + (0,))
            orelse, else_env = self.block(c.orelse, env, path + (1,))
            joined = then_env.join(else_env)
            then = then_head + then + merge_code(then_env, joined)
            orelse = else_head + orelse + merge_code(else_env, joined)
            cmds.append(replace(c, then=Seq(tuple(then)), orelse=Seq(tuple(orelse))))
            return cmds, joined
        if isinstance(c, (While, WhilePriv)):
            return self._loop(c, env, path)
        raise TransformError(f"cannot transform command {type(c).__name__}")

    def _sample(self, c: Sample) -> List[Cmd]:
        eta = c.name
        cmds: List[Cmd] = [
            self._assert(BoolLit(True), LAPLACE),
            Assign(eta, Index(Var(SAMPLE), Var(IDX))),
            Assign(IDX, LinOp("+", Var(IDX), Num(1.0))),
            Assign(hat(eta), Var(alignment_placeholder(eta))),
            Assign(EPSHAT, LinOp("+", Var(EPSHAT), self._cost(Var(hat(eta)), c.scale, COST))),
        ]
        if self.while_priv:
            spent = self._cost(Var(bound_placeholder(eta)), c.scale, SPENT_COST)
            cmds.append(Assign(SPENT, LinOp("+", Var(SPENT), spent)))
        return cmds

    def _loop(self, c: Cmd, env: TypingEnv, path: Path) -> Tuple[List[Cmd], TypingEnv]:
        inv = self._invariant(c, env, path)
        guard = c.cond
        bound: Optional[Expr] = None
        if isinstance(c, WhilePriv):
            bound = self._bound(path).expr()
            guard = conj(c.cond, Cmp("<=", Var(SPENT), sub(Var(self.decl.budget), bound)))
        cs: Constraints = []
        self.condition(guard, inv, cs)
        shifted = self.shift(guard, inv)
        aligned = shifted != guard
        head: List[Cmd] = [self._assert(shifted, WHILE_BODY)] if aligned else []
        if bound is not None:
            head.append(Assign(ITERATION_START, Var(SPENT)))
        body, out = self.block(c.body, inv, path + (0,))
        tail = merge_code(out, inv) + self._emit(cs)
        if bound is not None:
            tail.append(self._assert(Cmp("<=", sub(Var(SPENT), Var(ITERATION_START)), bound), WHILE_PRIV_BOUND))
        loop = While(guard, Seq(tuple(head + body + tail)), c.span)
        after = [self._assert(Not(shifted), WHILE_EXIT)] if aligned else []
        return merge_code(env, inv) + self._emit(cs) + [loop] + after, inv

    def first_pass(self) -> Seq:
        env = TypingEnv.of(x.name for x in self.decl.private_inputs)
        prologue: List[Cmd] = [Assign(EPSHAT, Num(0.0)), Assign(IDX, Num(0.0))]
        if self.while_priv:
            prologue.append(Assign(SPENT, Num(0.0)))
        body, env = self.block(self.sk.program.body, env, ())
        epilogue: List[Cmd] = []
        ret = self.decl.ret_name
        if env.is_star(ret) and ret not in self.lists:
            epilogue.append(self._assert(Cmp("=", Var(hat(ret)), Num(0.0)), RETURN))
        epilogue.append(self._assert(Cmp("<=", Var(EPSHAT), Var(self.decl.budget)), BUDGET))
        return Seq(tuple(prologue + body + epilogue))

    def templates(self, first: Seq) -> Tuple[AlignmentTemplate, ...]:
        p = Program(self.decl, first)
        input_only: Optional[FrozenSet[str]] = None
        if self.while_priv:
            input_only = frozenset(x.name for x in self.decl.private_inputs)
        theta = 0
        result = []
        for site in self.sk.sites:
            dep = analyze_site(p, site.eta, alignment_placeholder(site.eta), self.rules, self.lists, input_only)
            terms = dep.terms()
            cases = []
            for _ in range(len(dep.conditions) + 1):
                indices = range(theta + 1, theta + 1 + len(terms))
                cases.append(LinearTemplate(theta, tuple(zip(indices, terms))))
                theta += 1 + len(terms)
            template = AlignmentTemplate(
                site.eta,
                tuple(cases),
                tuple(c.evaluable for c in dep.conditions),
                tuple(c.written for c in dep.conditions),
            )
            logger.debug("%s: %s^ := %s", self.sk.name, site.eta, format_expr(template.expr()))
            result.append(template)
        return tuple(result)


def term_deltas(templates: Tuple[AlignmentTemplate, ...], decl: FunctionDecl) -> Dict[str, float]:
    """Worst-case value of every template term, keyed by the printed term."""
    inputs = {}
    for x in decl.private_inputs:
        model = decl.adjacency_of(x.name)
        inputs[hat(x.name)] = model.delta if model else 1.0
    deltas: Dict[str, float] = {}
    for t in templates:
        for case in t.cases:
            for _, term in case.terms:
                name = term.target.name if isinstance(term, Index) else term.name
                deltas[format_expr(term)] = inputs.get(name, 1.0)
    return deltas


def transform(sk: Sketch) -> TransformedProgram:
    """
    Build the relational checking program of a sketch.

    Args:
        sk: Sketch produced by generate_sketch

    Returns:
        TransformedProgram: Program M'' with its alignment, scale and bound templates

    Raises:
        TransformError: When a side constraint can never hold
    """
    t = _Transformer(sk)
    first = t.first_pass()
    alignments = t.templates(first)
    deltas = term_deltas(alignments, t.decl)
    mapping: Dict[str, Expr] = {}
    for a in alignments:
        mapping[alignment_placeholder(a.eta)] = a.expr()
        mapping[bound_placeholder(a.eta)] = a.bound_expr(deltas)
    body = map_command_exprs(first, lambda e: substitute(e, mapping))
    body, assertions = number_assertions(body, t.rules)

    scales = tuple(
        ScaleTemplate(s.eta, s.lambdas[0], tuple(zip(s.lambdas[1:], sk.template_vars)), sk.budget)
        for s in sk.sites
    )
    bounds = tuple(t.bounds[path] for path in sorted(t.bounds))
    theta_count = sum(len(a.indices) for a in alignments)
    gamma_count = sum(len(b.indices) for b in bounds)
    logger.info(
        "%s (%s): %d assertions, %d theta, %d lambda, %d gamma holes",
        sk.name, sk.label, len(assertions), theta_count, sk.scale_holes, gamma_count,
    )
    return TransformedProgram(
        decl=sk.program.decl,
        body=body,
        sites=tuple(SamplingSite(s.eta, s.in_loop) for s in sk.sites),
        alignments=alignments,
        scales=scales,
        bounds=bounds,
        assertions=assertions,
        theta_count=theta_count,
        lambda_count=sk.scale_holes,
        gamma_count=gamma_count,
        sketch=sk,
    )
