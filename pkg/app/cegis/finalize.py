"""
Finalization: turn a sketch and a verified candidate into the target mechanism.
"""
import logging
from dataclasses import replace
from typing import Dict, FrozenSet, List, Optional, Sequence

from app.align.program import TransformedProgram
from app.align.transform import SPENT, term_deltas
from app.cegis.candidate import Candidate
from app.exec.mechanism import plain_loops
from app.lang.ast import (
    Abs, Assign, Cmd, Cmp, Expr, Hole, LinOp, Num, OtherOp, Program, Sample, Seq, Var, WhilePriv, While,
    add, conj, free_vars, map_command_exprs, map_commands, map_expr, mul, num, sub, substitute,
)
from app.sketch.generator import Sketch

logger = logging.getLogger(__name__)


def fold(e: Expr, theta: Sequence[float] = (), lam: Sequence[float] = (), gamma: Sequence[float] = ()) -> Expr:
    """Replace holes by their values and fold the resulting constants."""
    values = {"theta": theta, "lambda": lam, "gamma": gamma}

    def step(n: Expr) -> Expr:
        if isinstance(n, Hole):
            held = values[n.kind]
            return num(held[n.index]) if n.index < len(held) else n
        if isinstance(n, Abs) and isinstance(n.operand, Num):
            return num(abs(n.operand.value))
        if isinstance(n, LinOp):
            return add(n.left, n.right) if n.op == "+" else sub(n.left, n.right)
        if isinstance(n, OtherOp) and n.op == "*":
            return mul(n.left, n.right)
        return n

    return map_expr(e, step)


def _drop(removed: FrozenSet[str]):
    zeros = {eta: Num(0.0) for eta in removed}

    def on_expr(e: Expr) -> Expr:
        if free_vars(e) & removed:
            return fold(substitute(e, zeros))
        return e

    return on_expr


def _charges(t: TransformedProgram, cand: Candidate, removed: FrozenSet[str]) -> Dict[str, Expr]:
    """Public per-draw budget charge of every retained sample in a while-priv program."""
    deltas = term_deltas(t.alignments, t.decl)
    charges = {}
    for a in t.alignments:
        if a.eta in removed:
            continue
        bound = _drop(removed)(fold(a.bound_expr(deltas), cand.theta))
        if isinstance(bound, Num) and bound.value == 0:
            continue
        charges[a.eta] = OtherOp("/", bound, fold(t.scale(a.eta).instantiate(cand.lam)))
    return charges


def finalize(sk: Sketch, t: TransformedProgram, cand: Candidate, keep_all: bool = False) -> Program:
    """
    Build the synthesized mechanism.

    Samples whose alignment is identically zero are removed and read as 0;
    the others get their instantiated scales. While-priv loops become while
    loops guarded by the public budget counter `_spent`, which every
    retained sample increments.

    Args:
        sk: Sketch the candidate was found for
        t: Transformed program of sk
        cand: Verified candidate
        keep_all: Keep every sample, so draws line up with t's sample array

    Returns:
        Program: Target program without holes
    """
    removed = frozenset() if keep_all else frozenset(cand.removed(t))
    if len(removed) == len(sk.sites):
        logger.info("%s: every noise site has a zero alignment, returning the source", sk.name)
        return plain_loops(sk.source)

    scales = {s.eta: fold(s.instantiate(cand.lam)) for s in t.scales}
    charges = _charges(t, cand, removed) if t.has_while_priv else {}

    def expand(c: Cmd) -> Cmd:
        if isinstance(c, Sample):
            if c.name in removed:
                return Seq(())
            sample = replace(c, scale=scales[c.name])
            if c.name not in charges:
                return sample
            charge = Assign(SPENT, LinOp("+", Var(SPENT), charges[c.name]))
            return Seq((sample, charge))
        if isinstance(c, Seq):
            return Seq(_flatten(c.cmds))
        return c

    body = map_commands(sk.program.body, expand)
    body = map_command_exprs(body, _drop(removed))
    if t.has_while_priv:
        body = _guard_loops(body, t, cand)
        body = Seq((Assign(SPENT, Num(0.0)),) + body.cmds)
    logger.debug("%s: finalized with %s removed", sk.name, ", ".join(sorted(removed)) or "nothing")
    return Program(sk.program.decl, body)


def _flatten(cmds: Sequence[Cmd]) -> tuple:
    out: List[Cmd] = []
    for c in cmds:
        if isinstance(c, Seq):
            out.extend(_flatten(c.cmds))
        else:
            out.append(c)
    return tuple(out)


def _guard_loops(body: Seq, t: TransformedProgram, cand: Candidate) -> Seq:
    bounds = iter(t.bounds)

    def guard(c: Cmd) -> Cmd:
        if not isinstance(c, WhilePriv):
            return c
        bound = fold(next(bounds).instantiate(cand.gamma))
        limit = Cmp("<=", Var(SPENT), sub(Var(t.decl.budget), bound))
        return While(conj(c.cond, limit), c.body, c.span)

    return map_commands(body, guard)


def proof(
    t: TransformedProgram, cand: Candidate, removed: Optional[FrozenSet[str]] = None
) -> Dict[str, Dict[str, str]]:
    """Alignments and scales of the retained samples, and the while-priv bounds, as text."""
    removed = frozenset(cand.removed(t)) if removed is None else removed
    return {
        "alignments": {a.eta: a.describe(cand.theta) for a in t.alignments if a.eta not in removed},
        "scales": {s.eta: s.describe(cand.lam) for s in t.scales if s.eta not in removed},
        "bounds": {f"loop{b.loop + 1}": b.describe(cand.gamma) for b in t.bounds},
    }
