"""
Distance typing environments.
"""
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List

from app.lang.ast import Assign, Cmd, Num, hat


@dataclass(frozen=True)
class TypingEnv:
    """
    Variables with a tracked (starred) distance. Every other variable has
    distance zero and no distance variable.
    """

    starred: FrozenSet[str] = frozenset()

    @classmethod
    def of(cls, names: Iterable[str]) -> "TypingEnv":
        return cls(frozenset(names))

    def is_star(self, name: str) -> bool:
        return name in self.starred

    def star(self, name: str) -> "TypingEnv":
        return TypingEnv(self.starred | {name})

    def zero(self, name: str) -> "TypingEnv":
        return TypingEnv(self.starred - {name})

    def join(self, other: "TypingEnv") -> "TypingEnv":
        return TypingEnv(self.starred | other.starred)

    def __le__(self, other: "TypingEnv") -> bool:
        return self.starred <= other.starred


def merge_code(current: TypingEnv, target: TypingEnv) -> List[Cmd]:
    """Zero-initialise the distances starred in target but not in current."""
    return [Assign(hat(x), Num(0.0)) for x in sorted(target.starred - current.starred)]
