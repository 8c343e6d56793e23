"""
Data dependence of assertions on sampling sites.

For one sampling site the analysis seeds a token for the site's draw and
one for every distance variable defined there, propagates them forward
through assignments, and collects the tokens reaching every assertion.
Element reads `q^[e]` after the site produce index tokens as long as `e`
still has the value it had at the site.
"""
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Mapping, Optional, Set, Tuple

from app.lang.ast import (
    Assert, Assign, Cmd, Expr, If, Index, Path, Program, Seq, Var, While, WhilePriv, assigned_vars,
    base_name, command_at, free_vars, hat, iter_commands, substitute, walk_expr,
)
from app.lang.dataflow import DefiniteAssignment
from app.lang.pretty import format_expr

# ("eta", name) | ("hat", variable) | ("idx", list, index expression)
Token = Tuple
ACCOUNTING = ("_epshat", "_spent")
BRANCH_RULES = ("if-then", "if-else")


def is_site(c: Cmd, eta: str, placeholder: str) -> bool:
    return isinstance(c, Assign) and c.lhs == hat(eta) and c.rhs == Var(placeholder)


def site_path(body: Cmd, eta: str, placeholder: str) -> Path:
    for path, c in iter_commands(body):
        if is_site(c, eta, placeholder):
            return path
    raise KeyError(f"no sampling site for {eta}")


@dataclass
class _State:
    tokens: Dict[str, FrozenSet[Token]]
    dirty: Optional[Set[str]] = None

    def copy(self) -> "_State":
        return _State(dict(self.tokens), None if self.dirty is None else set(self.dirty))

    def join(self, other: "_State") -> "_State":
        tokens = dict(self.tokens)
        for k, v in other.tokens.items():
            tokens[k] = tokens.get(k, frozenset()) | v
        if self.dirty is None and other.dirty is None:
            dirty = None
        else:
            dirty = (self.dirty or set()) | (other.dirty or set())
        return _State(tokens, dirty)


class _Flow:
    def __init__(self, eta: str, placeholder: str, at_site: FrozenSet[str], lists: FrozenSet[str]):
        self.eta = eta
        self.placeholder = placeholder
        self.at_site = at_site
        self.lists = lists
        self.reaching: Dict[int, FrozenSet[Token]] = {}

    def reads(self, e: Expr, state: _State) -> FrozenSet[Token]:
        found: Set[Token] = set()
        for name in free_vars(e):
            found |= state.tokens.get(name, frozenset())
        if state.dirty is None:
            return frozenset(found)
        for node in walk_expr(e):
            if not (isinstance(node, Index) and isinstance(node.target, Var)):
                continue
            target = node.target.name
            if not target.endswith("^") or base_name(target) not in self.lists:
                continue
            index_vars = free_vars(node.index)
            if index_vars <= self.at_site and not index_vars & state.dirty:
                found.add(("idx", base_name(target), node.index))
        return frozenset(found)

    def seed(self, state: _State) -> _State:
        tokens = dict(state.tokens)
        own = frozenset({("eta", self.eta)})
        tokens[self.eta] = tokens.get(self.eta, frozenset()) | own
        tokens[hat(self.eta)] = own
        for name in self.at_site:
            if not name.endswith("^") or name == hat(self.eta):
                continue
            x = base_name(name)
            if x in self.lists or x.startswith("_"):
                continue
            tokens[name] = tokens.get(name, frozenset()) | {("hat", x)}
        return _State(tokens, set())

    def run(self, c: Cmd, state: _State) -> _State:
        if isinstance(c, Seq):
            for x in c.cmds:
                state = self.run(x, state)
            return state
        if isinstance(c, Assign):
            if is_site(c, self.eta, self.placeholder):
                return self.seed(state)
            if c.lhs in ACCOUNTING:
                return state
            state = state.copy()
            state.tokens[c.lhs] = self.reads(c.rhs, state)
            if state.dirty is not None:
                state.dirty.add(c.lhs)
            return state
        if isinstance(c, Assert):
            self.reaching[c.aid] = self.reaching.get(c.aid, frozenset()) | self.reads(c.cond, state)
            return state
        if isinstance(c, If):
            return self.run(c.then, state.copy()).join(self.run(c.orelse, state.copy()))
        if isinstance(c, (While, WhilePriv)):
            entry = state
            while True:
                after = entry.join(self.run(c.body, entry.copy()))
                if after == entry:
                    return entry
                entry = after
        return state


@dataclass(frozen=True)
class BranchCondition:
    """A branch condition in scope at a site: evaluable form and form as written."""

    evaluable: Expr
    written: Expr


@dataclass(frozen=True)
class SiteDependence:
    eta: str
    reaching: FrozenSet[int]
    hats: Tuple[str, ...]
    elements: Tuple[Tuple[str, Expr], ...]
    conditions: Tuple[BranchCondition, ...]

    def terms(self) -> Tuple[Expr, ...]:
        return tuple(Var(hat(x)) for x in self.hats) + tuple(Index(Var(hat(q)), e) for q, e in self.elements)


def _branch_aids(c: If, rules: Mapping[int, str]) -> FrozenSet[int]:
    aids = set()
    for branch in (c.then, c.orelse):
        for x in (branch.cmds if isinstance(branch, Seq) else (branch,)):
            if isinstance(x, Assert) and rules.get(x.aid) in BRANCH_RULES:
                aids.add(x.aid)
    return frozenset(aids)


def _in_scope_ifs(
    cmds: Tuple[Cmd, ...], items: List[Tuple], found: List[Tuple[If, List[Tuple]]]
) -> None:
    """
    Collect the branches reachable from a site without entering loops or
    then-branches, with the commands executed in between.
    """
    items = list(items)
    for c in cmds:
        if isinstance(c, If):
            found.append((c, list(items)))
            orelse = c.orelse.cmds if isinstance(c.orelse, Seq) else (c.orelse,)
            _in_scope_ifs(orelse, items, found)
            items.append(("block", assigned_vars(c)))
        elif isinstance(c, Assign):
            items.append(("assign", c.lhs, c.rhs))
        elif isinstance(c, Assert):
            continue
        else:
            items.append(("block", assigned_vars(c)))


def _evaluable(cond: Expr, items: List[Tuple], at_site: FrozenSet[str]) -> Optional[Expr]:
    e = cond
    for item in reversed(items):
        if item[0] == "assign":
            e = substitute(e, {item[1]: item[2]})
        elif free_vars(e) & item[1]:
            return None
    names = free_vars(e)
    if any(n.startswith("_") for n in names) or not names <= at_site:
        return None
    return e


def _enclosing_block(body: Seq, path: Path) -> Tuple[Tuple[Cmd, ...], int]:
    return command_at(body, path[:-1]).cmds, path[-1]


def analyze_site(
    p: Program,
    eta: str,
    placeholder: str,
    rules: Mapping[int, str],
    lists: FrozenSet[str],
    input_only: Optional[FrozenSet[str]] = None,
) -> SiteDependence:
    """
    Dependence summary of one sampling site of a pass-one transformed program.

    Args:
        p: Transformed program whose site assigns `eta^ := placeholder`
        eta: Sample name
        placeholder: Variable standing for the site's alignment
        rules: Origin rule of every assertion id
        lists: List-typed variable names
        input_only: When given, only distances of these private inputs are kept

    Returns:
        SiteDependence: Assertions reached, template terms and in-scope conditions
    """
    path = site_path(p.body, eta, placeholder)
    internals = frozenset(("_sample", "_idx", "_epshat", "_spent", "_t"))
    at_site = DefiniteAssignment(p, internals).before[path]
    flow = _Flow(eta, placeholder, at_site, lists)
    flow.run(p.body, _State({}))
    own = ("eta", eta)
    reaching = frozenset(aid for aid, tokens in flow.reaching.items() if own in tokens)
    tokens: Set[Token] = set()
    for aid in reaching:
        tokens |= flow.reaching[aid]
    hats = sorted(t[1] for t in tokens if t[0] == "hat")
    elements = sorted(((t[1], t[2]) for t in tokens if t[0] == "idx"), key=lambda t: (t[0], format_expr(t[1])))
    if input_only is not None:
        hats = [x for x in hats if x in input_only]
        elements = [t for t in elements if t[0] in input_only]

    cmds, position = _enclosing_block(p.body, path)
    found: List[Tuple[If, List[Tuple]]] = []
    _in_scope_ifs(cmds[position + 1:], [], found)
    conditions = []
    for c, items in found:
        if not _branch_aids(c, rules) & reaching:
            continue
        evaluable = _evaluable(c.cond, items, at_site)
        if evaluable is not None:
            conditions.append(BranchCondition(evaluable, c.cond))
    return SiteDependence(eta, reaching, tuple(hats), tuple(elements), tuple(conditions))
