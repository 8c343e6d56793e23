"""
Sketch generation: inject Laplace noise with template scales into a source program.

Noise goes to the definitions of offending variables and in front of the
commands whose expressions leak. Mandatory noise locations are numbered
first, then the optional ones, each group in program order.
"""
import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, List, Optional, Tuple

from app.core.config import settings
from app.lang.ast import (
    Assign, Cmd, Expr, Hole, If, Index, LinOp, Num, OtherOp, Out, Path, Program, Sample, Seq, Var, While,
    WhilePriv, add, free_vars, map_command_exprs, map_commands, map_expr, substitute, walk_expr,
)
from app.lang.pretty import format_expr
from app.lang.typecheck import infer_types
from app.sketch.taint import TaintReport, analyze_taint, index_only_vars, offending_variables

logger = logging.getLogger(__name__)

DEFINITION = "definition"
USE = "use"
NOISY_SUFFIX = "_noisy"


@dataclass(frozen=True)
class NoiseLocation:
    """A place where noise may be injected; `key` is stable across sub-sketches."""

    key: str
    variable: str
    site: str
    optional: bool


@dataclass(frozen=True)
class NoiseSite:
    """One sampling statement of a sketch."""

    eta: str
    location: NoiseLocation
    target: str
    lambdas: Tuple[int, ...]
    in_loop: bool

    @property
    def variable(self) -> str:
        return self.location.variable

    @property
    def site(self) -> str:
        return self.location.site


@dataclass(frozen=True)
class Sketch:
    """
    A source program with sampling statements whose scales are templates
    over lambda holes. `optional` lists every optional location of the
    full sketch; `enabled` the ones this sketch keeps.
    """

    source: Program
    program: Program
    sites: Tuple[NoiseSite, ...]
    template_vars: Tuple[str, ...]
    offending: FrozenSet[str]
    optional: Tuple[NoiseLocation, ...] = ()
    enabled: FrozenSet[str] = frozenset()
    report: Optional[TaintReport] = field(default=None, compare=False, repr=False)

    @property
    def name(self) -> str:
        return self.source.name

    @property
    def budget(self) -> str:
        return self.source.decl.budget if self.source.decl else "eps"

    @property
    def scale_holes(self) -> int:
        return len(self.sites) * (1 + len(self.template_vars))

    @property
    def etas(self) -> Tuple[str, ...]:
        return tuple(s.eta for s in self.sites)

    @property
    def is_full(self) -> bool:
        return self.enabled == frozenset(loc.key for loc in self.optional)

    @property
    def label(self) -> str:
        if self.is_full:
            return "full"
        if not self.enabled:
            return "mandatory"
        return "+".join(sorted(self.enabled))

    def site(self, eta: str) -> NoiseSite:
        for s in self.sites:
            if s.eta == eta:
                return s
        raise KeyError(eta)

    def scale(self, eta: str) -> Expr:
        return scale_template(self.site(eta).lambdas, self.template_vars, self.budget)


def scale_template(lambdas: Tuple[int, ...], template_vars: Tuple[str, ...], budget: str) -> Expr:
    """(lambda[k0] + lambda[k1] * v1 + ...) / budget"""
    total: Expr = Hole("lambda", lambdas[0])
    for k, v in zip(lambdas[1:], template_vars):
        total = LinOp("+", total, OtherOp("*", Hole("lambda", k), Var(v)))
    return OtherOp("/", total, Var(budget))


def _path_key(path: Path) -> str:
    return ".".join(map(str, path)) or "root"


# (list name, index expression) -> name of a noisy copy holding that element
Avail = Dict[Tuple[str, Expr], str]


def _invalidate(avail: Avail, assigned: str) -> Avail:
    return {k: v for k, v in avail.items() if assigned not in free_vars(k[1])}


def _join(a: Avail, b: Avail) -> Avail:
    return {k: v for k, v in a.items() if b.get(k) == v}


class _Generator:
    def __init__(self, p: Program, offending: FrozenSet[str], enabled: Optional[FrozenSet[str]]):
        self.p = p
        self.enabled = enabled
        types = infer_types(p)
        declared = [param.name for param in p.decl.params] if p.decl else []
        self.lists = {x for x in offending if types.get(x) is not None and types[x].is_list}
        self.params = [x for x in declared if x in offending and x not in self.lists]
        self.locals = offending - self.lists - set(declared)
        self.rename = {x: Var(x + NOISY_SUFFIX) for x in self.params}
        self.violations: Dict[Path, object] = {}
        self.copies = 0
        # (temporary eta name, location, target, in_loop)
        self.emitted: List[Tuple[str, NoiseLocation, str, bool]] = []
        self.optional: Dict[str, NoiseLocation] = {}

    def _keep(self, loc: NoiseLocation) -> bool:
        if not loc.optional:
            return True
        self.optional.setdefault(loc.key, loc)
        return self.enabled is None or loc.key in self.enabled

    def _noise(self, loc: NoiseLocation, target: str, value: Expr, in_loop: bool) -> List[Cmd]:
        tmp = f"@{len(self.emitted) + 1}"
        self.emitted.append((tmp, loc, target, in_loop))
        return [Sample(tmp, Num(0.0)), Assign(target, add(value, Var(tmp)))]

    def _renamed(self, e: Expr) -> Expr:
        return substitute(e, self.rename)

    def _reads(self, e: Expr) -> Tuple[List[str], List[Index]]:
        """Offending scalars and distinct offending element reads of e, in reading order."""
        skip = index_only_vars(e)
        scalars: List[str] = []
        elements: List[Index] = []
        for node in walk_expr(e):
            if isinstance(node, Var) and node.name not in skip and node.name not in scalars:
                if node.name in self.params or node.name in self.locals:
                    scalars.append(node.name)
            elif isinstance(node, Index) and isinstance(node.target, Var) and node.target.name in self.lists:
                if all(x.target.name != node.target.name or x.index != node.index for x in elements):
                    elements.append(node)
        return scalars, elements

    def _use_noise(
        self, e: Expr, path: Path, avail: Avail, in_loop: bool, tag: str = USE,
        copies: Optional[Dict[Tuple[str, Expr], str]] = None,
    ) -> Tuple[List[Cmd], Dict[str, Expr], Avail]:
        """
        Noise in front of an offending expression.

        Scalar reads get use-site noise. Element reads get a fresh noisy
        copy unless one with the same index is available, in which case
        the fresh copy is optional. `copies` forces fixed copy names and
        makes every element location mandatory (loop conditions).
        """
        scalars, elements = self._reads(e)
        where = _path_key(path)
        cmds: List[Cmd] = []
        local_map: Dict[str, Expr] = {}
        for x in scalars:
            loc = NoiseLocation(f"{where}:{x}:{tag}", x, USE, True)
            if not self._keep(loc):
                continue
            target = x + NOISY_SUFFIX
            cmds.extend(self._noise(loc, target, Var(target) if x in self.params else Var(x), in_loop))
            if x in self.locals:
                local_map[x] = Var(target)
        for node in elements:
            q = node.target.name
            key = (q, node.index)
            optional = copies is None and key in avail
            loc = NoiseLocation(f"{where}:{format_expr(node)}:{tag}", q, USE, optional)
            if not self._keep(loc):
                continue
            copy = (copies or {}).get(key)
            if copy is None:
                self.copies += 1
                copy = f"{q}{NOISY_SUFFIX}{self.copies}"
            cmds.extend(self._noise(loc, copy, Index(node.target, self._renamed(node.index)), in_loop))
            avail = {**avail, key: copy}
        return cmds, local_map, avail

    def _rewrite(self, e: Expr, local_map: Dict[str, Expr], avail: Avail) -> Expr:
        def to_copy(node: Expr) -> Expr:
            if isinstance(node, Index) and isinstance(node.target, Var):
                copy = avail.get((node.target.name, node.index))
                if copy is not None:
                    return Var(copy)
            return node

        return self._renamed(substitute(map_expr(e, to_copy), local_map))

    def block(self, c: Cmd, path: Path, avail: Avail, in_loop: bool) -> Tuple[Seq, Avail]:
        if not isinstance(c, Seq):
            cmds, avail = self.cmd(c, path, avail, in_loop)
            return Seq(tuple(cmds)), avail
        cmds = []
        for i, x in enumerate(c.cmds):
            new, avail = self.cmd(x, path + (i,), avail, in_loop)
            cmds.extend(new)
        return Seq(tuple(cmds)), avail

    def cmd(self, c: Cmd, path: Path, avail: Avail, in_loop: bool) -> Tuple[List[Cmd], Avail]:
        offending = path in self.violations
        if isinstance(c, Assign):
            if offending:
                cmds, local_map, avail = self._use_noise(c.rhs, path, avail, in_loop)
                cmds.append(replace(c, rhs=self._rewrite(c.rhs, local_map, avail)))
                return cmds, _invalidate(avail, c.lhs)
            rhs = self._renamed(c.rhs)
            avail = _invalidate(avail, c.lhs)
            if c.lhs in self.locals:
                loc = NoiseLocation(f"{_path_key(path)}:{c.lhs}:def", c.lhs, DEFINITION, False)
                return self._noise(loc, c.lhs, rhs, in_loop), avail
            return [replace(c, rhs=rhs)], avail
        if isinstance(c, Out):
            if not offending:
                return [replace(c, expr=self._renamed(c.expr))], avail
            cmds, local_map, avail = self._use_noise(c.expr, path, avail, in_loop)
            cmds.append(replace(c, expr=self._rewrite(c.expr, local_map, avail)))
            return cmds, avail
        if isinstance(c, If):
            cmds, local_map = [], {}
            if offending:
                cmds, local_map, avail = self._use_noise(c.cond, path, avail, in_loop)
            then, then_avail = self.block(c.then, path + (0,), avail, in_loop)
            orelse, else_avail = self.block(c.orelse, path + (1,), avail, in_loop)
            cmds.append(replace(c, cond=self._rewrite(c.cond, local_map, avail), then=then, orelse=orelse))
            return cmds, _join(then_avail, else_avail)
        if isinstance(c, (While, WhilePriv)):
            cmds, local_map, entry = [], {}, {}
            if offending:
                cmds, local_map, entry = self._use_noise(c.cond, path, {}, in_loop, tag="loop", copies={})
            body, _ = self.block(c.body, path + (0,), {}, True)
            if offending:
                again, _, _ = self._use_noise(c.cond, path, {}, True, tag="loop", copies=dict(entry))
                body = Seq(body.cmds + tuple(again))
            cmds.append(replace(c, cond=self._rewrite(c.cond, local_map, entry), body=body))
            return cmds, {}
        if isinstance(c, Seq):
            new, avail = self.block(c, path, avail, in_loop)
            return [new], avail
        return [map_command_exprs(c, self._renamed)], avail

    def run(self, report: TaintReport) -> Seq:
        self.violations = {v.path: v for v in report.violations}
        prologue: List[Cmd] = []
        for x in self.params:
            loc = NoiseLocation(f"entry:{x}:def", x, DEFINITION, False)
            prologue.extend(self._noise(loc, x + NOISY_SUFFIX, Var(x), False))
        body, _ = self.block(self.p.body, (), {}, False)
        return Seq(tuple(prologue) + body.cmds)


def _number(body: Seq, emitted, template_vars: Tuple[str, ...], budget: str) -> Tuple[Seq, Tuple[NoiseSite, ...]]:
    ordered = [e for e in emitted if not e[1].optional] + [e for e in emitted if e[1].optional]
    width = 1 + len(template_vars)
    names: Dict[str, str] = {}
    sites: List[NoiseSite] = []
    for k, (tmp, loc, target, in_loop) in enumerate(ordered):
        names[tmp] = f"eta{k + 1}"
        lambdas = tuple(range(k * width, (k + 1) * width))
        sites.append(NoiseSite(names[tmp], loc, target, lambdas, in_loop))
    scales = {s.eta: scale_template(s.lambdas, template_vars, budget) for s in sites}
    mapping = {tmp: Var(name) for tmp, name in names.items()}

    def rename(c: Cmd) -> Cmd:
        if isinstance(c, Sample):
            return replace(c, name=names[c.name], scale=scales[names[c.name]])
        return c

    body = map_commands(map_command_exprs(body, lambda e: substitute(e, mapping)), rename)
    return body, tuple(sites)


def generate_sketch(
    p: Program,
    offending: Optional[FrozenSet[str]] = None,
    enabled: Optional[FrozenSet[str]] = None,
    report: Optional[TaintReport] = None,
) -> Sketch:
    """
    Inject noise with template scales at the noise locations of p.

    Args:
        p: Validated source program
        offending: Variables to noise; computed from the taint report when omitted
        enabled: Optional locations to keep, by key; None keeps all of them
        report: Taint report of p, computed when omitted

    Returns:
        Sketch: The instrumented program and its hole layout
    """
    report = report or analyze_taint(p)
    if offending is None:
        offending = offending_variables(p, report)
    template_vars = p.decl.public_reals if p.decl else ()
    if not offending:
        return Sketch(p, p, (), template_vars, frozenset(), report=report)
    generator = _Generator(p, frozenset(offending), enabled)
    body = generator.run(report)
    budget = p.decl.budget if p.decl else "eps"
    body, sites = _number(body, generator.emitted, template_vars, budget)
    optional = tuple(generator.optional.values())
    keys = frozenset(loc.key for loc in optional if enabled is None or loc.key in enabled)
    logger.debug("%s: sketch with %d noise sites (%s)", p.name, len(sites), ", ".join(s.eta for s in sites))
    return Sketch(p, Program(p.decl, body), sites, template_vars, frozenset(offending), optional, keys, report)


def enumerate_subsketches(p: Program, cap: Optional[int] = None) -> List[Sketch]:
    """
    The full sketch followed by its sub-sketches over subsets of the optional
    locations, largest first. Only the full sketch is returned when the number
    of subsets exceeds `cap`.
    """
    cap = cap if cap is not None else settings.SUBSKETCH_CAP
    full = generate_sketch(p)
    keys = [loc.key for loc in full.optional]
    if 2 ** len(keys) > cap:
        logger.info("%s: %d optional noise locations, searching the full sketch only", p.name, len(keys))
        return [full]
    sketches = [full]
    for size in range(len(keys) - 1, -1, -1):
        for subset in itertools.combinations(keys, size):
            sketches.append(generate_sketch(p, full.offending, frozenset(subset), full.report))
    return sketches
