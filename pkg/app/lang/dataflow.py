"""
Definite-assignment analysis over program paths.
"""
from typing import Dict, FrozenSet, List, Tuple

from app.lang.ast import (
    Assert, Assign, Cmd, If, Out, Path, Program, Sample, Seq, While, WhilePriv, free_vars, hat,
)


def initially_defined(p: Program) -> FrozenSet[str]:
    """Names defined at program entry: parameters, budget, list return value, input distances."""
    if p.decl is None:
        return frozenset()
    names = {param.name for param in p.decl.params}
    names.add(p.decl.budget)
    names.update(hat(param.name) for param in p.decl.private_inputs)
    if p.decl.ret_type.is_list:
        names.add(p.decl.ret_name)
    return frozenset(names)


class DefiniteAssignment:
    """
    Records, for every command path, the variables assigned on every
    path reaching it, and every read of a variable that may be unassigned.
    """

    def __init__(self, p: Program, extra: FrozenSet[str] = frozenset()):
        self.before: Dict[Path, FrozenSet[str]] = {}
        self.undefined: List[Tuple[str, Cmd]] = []
        self.at_exit = self._run(p.body, (), initially_defined(p) | extra)

    def _reads(self, names: FrozenSet[str], defined: FrozenSet[str], node: Cmd) -> None:
        for name in sorted(names - defined):
            if name.startswith("_") or name.endswith("^") or name.endswith("~"):
                continue
            self.undefined.append((name, node))

    def _run(self, c: Cmd, path: Path, defined: FrozenSet[str]) -> FrozenSet[str]:
        self.before[path] = defined
        if isinstance(c, Seq):
            for i, x in enumerate(c.cmds):
                defined = self._run(x, path + (i,), defined)
            return defined
        if isinstance(c, Assign):
            self._reads(free_vars(c.rhs), defined, c)
            return defined | {c.lhs}
        if isinstance(c, Sample):
            self._reads(free_vars(c.scale), defined, c)
            return defined | {c.name}
        if isinstance(c, (Out, Assert)):
            self._reads(free_vars(c.expr if isinstance(c, Out) else c.cond), defined, c)
            return defined
        if isinstance(c, If):
            self._reads(free_vars(c.cond), defined, c)
            then = self._run(c.then, path + (0,), defined)
            orelse = self._run(c.orelse, path + (1,), defined)
            return then & orelse
        if isinstance(c, (While, WhilePriv)):
            self._reads(free_vars(c.cond), defined, c)
            self._run(c.body, path + (0,), defined)
            return defined
        return defined
