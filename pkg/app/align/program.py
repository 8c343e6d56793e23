"""
Transformed programs: the deterministic checking program and its hole layout.
"""
import json
import logging
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Mapping, Optional, Tuple

from app.align.templates import AlignmentTemplate, BudgetBoundTemplate, ScaleTemplate
from app.core.exceptions import InputError
from app.lang.ast import Assert, Assign, Cmd, Cost, FunctionDecl, Program, Seq, map_commands, map_expr
from app.lang.parser import parse
from app.lang.pretty import format_expr, format_header, pretty

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AssertionInfo:
    aid: int
    rule: str
    text: str


@dataclass(frozen=True)
class SamplingSite:
    eta: str
    in_loop: bool


@dataclass(frozen=True)
class TransformedProgram:
    """
    Deterministic program M'' over inputs, input distances, the sample
    array `_sample` and the holes theta, lambda and gamma. Every assertion
    and every cost accounting carries the id listed in `assertions`.
    """

    decl: FunctionDecl
    body: Seq
    sites: Tuple[SamplingSite, ...]
    alignments: Tuple[AlignmentTemplate, ...]
    scales: Tuple[ScaleTemplate, ...]
    bounds: Tuple[BudgetBoundTemplate, ...]
    assertions: Tuple[AssertionInfo, ...]
    theta_count: int
    lambda_count: int
    gamma_count: int
    shadow: bool = False
    reference: Optional[Dict[str, Tuple[float, ...]]] = None
    mechanism: Optional[Program] = field(default=None, compare=False, repr=False)
    sketch: Optional[Any] = field(default=None, compare=False, repr=False)

    @property
    def name(self) -> str:
        return self.decl.name

    @property
    def program(self) -> Program:
        return Program(self.decl, self.body)

    @property
    def has_while_priv(self) -> bool:
        return bool(self.bounds)

    def alignment(self, eta: str) -> AlignmentTemplate:
        for t in self.alignments:
            if t.eta == eta:
                return t
        raise KeyError(eta)

    def scale(self, eta: str) -> ScaleTemplate:
        for t in self.scales:
            if t.eta == eta:
                return t
        raise KeyError(eta)

    def rule(self, aid: int) -> str:
        return self.assertions[aid - 1].rule

    def dump(self) -> Dict[str, Any]:
        """JSON debug dump: hole layout, sites, templates, assertion table and body."""
        return {
            "name": self.name,
            "header": "\n".join(format_header(self.decl)),
            "holes": {"theta": self.theta_count, "lambda": self.lambda_count, "gamma": self.gamma_count},
            "sites": [{"eta": s.eta, "inLoop": s.in_loop} for s in self.sites],
            "alignments": {t.eta: format_expr(t.expr()) for t in self.alignments},
            "scales": {t.eta: format_expr(t.expr()) for t in self.scales},
            "bounds": [format_expr(b.expr()) for b in self.bounds],
            "assertions": [{"id": a.aid, "rule": a.rule, "text": a.text} for a in self.assertions],
            "shadow": self.shadow,
            "body": pretty(self.body),
        }


def number_assertions(body: Cmd, rules: Optional[Mapping[int, str]] = None) -> Tuple[Seq, Tuple[AssertionInfo, ...]]:
    """
    Renumber assertions and cost accountings 1..n in program order.

    `rules` maps the provisional ids to their origin rule; without it
    assertions are labelled `assert` and accountings `cost`.
    """
    table: List[AssertionInfo] = []

    def record(aid: int, default: str, text: str) -> int:
        rule = rules[aid] if rules is not None else default
        table.append(AssertionInfo(len(table) + 1, rule, text))
        return len(table)

    def on_expr(e):
        if isinstance(e, Cost):
            return replace(e, aid=record(e.aid, "cost", format_expr(e)))
        return e

    def on_cmd(c: Cmd) -> Cmd:
        if isinstance(c, Assert):
            return replace(c, aid=record(c.aid, "assert", format_expr(c.cond)))
        if isinstance(c, Assign):
            return replace(c, rhs=map_expr(c.rhs, on_expr))
        return c

    numbered = map_commands(body, on_cmd)
    return numbered, tuple(table)


def load_transformed(path: str) -> TransformedProgram:
    """
    Read a pre-transformed program fixture.

    The file holds the signature header, the body text with holes, the
    hole counts, the sampling sites, a reference candidate and optionally
    the mechanism text whose draws line up with `_sample`.

    Args:
        path: JSON file

    Returns:
        TransformedProgram: Program without generated templates
    """
    with open(path, encoding="utf-8") as handle:
        data = json.load(handle)
    try:
        p = parse(data["header"] + "\n" + data["body"], check_types=False)
        holes = data["holes"]
        sites = tuple(SamplingSite(s["eta"], bool(s.get("inLoop", False))) for s in data["sites"])
    except KeyError as exc:
        raise InputError(f"{path}: missing field {exc}") from exc
    if p.decl is None:
        raise InputError(f"{path}: header has no function signature")
    mechanism = None
    if "mechanism" in data:
        mechanism = parse(data["header"] + "\n" + data["mechanism"])
    body, assertions = number_assertions(p.body)
    reference = data.get("reference")
    if reference is not None:
        reference = {k: tuple(float(x) for x in reference.get(k, ())) for k in ("theta", "lambda", "gamma")}
    logger.debug("%s: loaded %d assertions from %s", p.decl.name, len(assertions), path)
    return TransformedProgram(
        decl=p.decl,
        body=body,
        sites=sites,
        alignments=(),
        scales=(),
        bounds=(),
        assertions=assertions,
        theta_count=int(holes.get("theta", 0)),
        lambda_count=int(holes.get("lambda", 0)),
        gamma_count=int(holes.get("gamma", 0)),
        shadow=bool(data.get("shadow", False)),
        reference=reference,
        mechanism=mechanism,
    )
