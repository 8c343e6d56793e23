"""
Base types, privacy marks and adjacency models of the DSL.
"""
from dataclasses import dataclass
from enum import Enum


class BaseType(str, Enum):
    """Value types; lists are homogeneous and never nested."""

    REAL = "real"
    BOOL = "bool"
    LIST_REAL = "list real"
    LIST_BOOL = "list bool"

    @property
    def is_list(self) -> bool:
        return self in (BaseType.LIST_REAL, BaseType.LIST_BOOL)

    @property
    def element(self) -> "BaseType":
        """Element type of a list type."""
        if self is BaseType.LIST_REAL:
            return BaseType.REAL
        if self is BaseType.LIST_BOOL:
            return BaseType.BOOL
        raise TypeError(f"{self.value} is not a list type")

    @staticmethod
    def list_of(element: "BaseType") -> "BaseType":
        if element is BaseType.REAL:
            return BaseType.LIST_REAL
        if element is BaseType.BOOL:
            return BaseType.LIST_BOOL
        raise TypeError("lists cannot be nested")

    @property
    def is_real(self) -> bool:
        return self in (BaseType.REAL, BaseType.LIST_REAL)


class Privacy(str, Enum):
    PUBLIC = "public"
    PRIVATE = "private"


class AdjacencyKind(str, Enum):
    """How a private input may differ between adjacent databases."""

    ALL_DIFFER = "all_differ"
    ONE_DIFFER = "one_differ"
    SCALAR_DIFFER = "scalar_differ"


@dataclass(frozen=True)
class AdjacencyModel:
    """Adjacency of one private input with sensitivity bound `delta`."""

    input: str
    kind: AdjacencyKind
    delta: float = 1.0
