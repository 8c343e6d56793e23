# Execution module
from .sampling import derive_seeds, laplace_from_uniform, make_rng, sample_laplace
from .interpreter import Runtime, compile_program, values_equal
from .transformed import Counterexample, ExecReport, run_transformed
from .mechanism import noise_free, run_mechanism
from .paired import PairedResult, paired_check

__all__ = [
    "derive_seeds",
    "laplace_from_uniform",
    "make_rng",
    "sample_laplace",
    "Runtime",
    "compile_program",
    "values_equal",
    "Counterexample",
    "ExecReport",
    "run_transformed",
    "noise_free",
    "run_mechanism",
    "PairedResult",
    "paired_check",
]
