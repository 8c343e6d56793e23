# Schemas module
from .run_config import RunConfig
from .candidate import CandidateModel, CounterexampleModel
from .utility import SampleInput, UtilitySpecModel
from .report import CheckReport, SynthesisReport

__all__ = [
    "RunConfig",
    "CandidateModel",
    "CounterexampleModel",
    "SampleInput",
    "UtilitySpecModel",
    "CheckReport",
    "SynthesisReport",
]
