"""
Exception hierarchy for the synthesizer.
"""
from typing import Any, List, Optional


class DPSynthError(Exception):
    """Base class for every error raised by the synthesizer."""


class ParseError(DPSynthError):
    """Syntax error in a DSL text, with position."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")


class DSLTypeError(ParseError):
    """Type mismatch found while parsing."""


class ValidationFailed(DPSynthError):
    """A program failed structural validation."""

    def __init__(self, diagnostics: List[Any]):
        self.diagnostics = diagnostics
        lines = "; ".join(str(d) for d in diagnostics)
        super().__init__(f"program is not well-formed: {lines}")


class TransformError(DPSynthError):
    """The relational transformation could not be applied."""


class ExecutionError(DPSynthError):
    """Base class for interpreter errors."""


class EvaluationError(ExecutionError):
    """Division by zero, bad index or undefined variable."""


class SampleExhaustedError(ExecutionError):
    """The sample array is shorter than the number of draws."""


class InvalidScaleError(ExecutionError):
    """A retained sampling statement got a non-positive scale."""


class IterationCapError(ExecutionError):
    """A loop exceeded the configured iteration cap."""


class InputError(DPSynthError):
    """Input values do not match the program's parameters."""


class SynthesisFailed(DPSynthError):
    """No verified candidate was found within the search budget."""

    def __init__(self, message: str, best_candidate: Optional[Any] = None, violations: int = 0):
        self.best_candidate = best_candidate
        self.violations = violations
        super().__init__(message)
