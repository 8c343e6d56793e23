# Synthesis module
from .candidate import Candidate, snap
from .utility import UtilitySpec, accuracy, mean_accuracy, utility_custom, utility_default
from .counterexample import (
    InputLayout, canonical_instantiation, find_counterexample, precondition_intervals,
)
from .generation import GenerationResult, generate_candidate
from .finalize import finalize, proof
from .verify import REFUTED, VERIFIED, CheckResult, check_candidate
from .synthesis import SynthesisResult, synthesize

__all__ = [
    "Candidate",
    "snap",
    "UtilitySpec",
    "accuracy",
    "mean_accuracy",
    "utility_custom",
    "utility_default",
    "InputLayout",
    "canonical_instantiation",
    "find_counterexample",
    "precondition_intervals",
    "GenerationResult",
    "generate_candidate",
    "finalize",
    "proof",
    "REFUTED",
    "VERIFIED",
    "CheckResult",
    "check_candidate",
    "SynthesisResult",
    "synthesize",
]
