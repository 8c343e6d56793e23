# DSL module
from .ast import Program, SourceProgram, FunctionDecl, Param
from .parser import parse, parse_expr, parse_file
from .pretty import pretty
from .validate import Diagnostic, validate
from .types import AdjacencyKind, AdjacencyModel, BaseType, Privacy

__all__ = [
    "Program",
    "SourceProgram",
    "FunctionDecl",
    "Param",
    "parse",
    "parse_expr",
    "parse_file",
    "pretty",
    "Diagnostic",
    "validate",
    "AdjacencyKind",
    "AdjacencyModel",
    "BaseType",
    "Privacy",
]
