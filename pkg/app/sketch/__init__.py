# Sketch module
from .taint import (
    IMPLICIT_FLOW, TAINTED_OUTPUT, TAINTED_OUTPUT_PATH, TaintReport, Violation, analyze_taint,
    offending_variables,
)
from .generator import NoiseLocation, NoiseSite, Sketch, enumerate_subsketches, generate_sketch

__all__ = [
    "IMPLICIT_FLOW",
    "TAINTED_OUTPUT",
    "TAINTED_OUTPUT_PATH",
    "TaintReport",
    "Violation",
    "analyze_taint",
    "offending_variables",
    "NoiseLocation",
    "NoiseSite",
    "Sketch",
    "enumerate_subsketches",
    "generate_sketch",
]
