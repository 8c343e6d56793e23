# Relational transformation module
from .env import TypingEnv, merge_code
from .templates import AlignmentTemplate, BudgetBoundTemplate, LinearTemplate, ScaleTemplate
from .program import AssertionInfo, SamplingSite, TransformedProgram, load_transformed
from .transform import transform

__all__ = [
    "TypingEnv",
    "merge_code",
    "AlignmentTemplate",
    "BudgetBoundTemplate",
    "LinearTemplate",
    "ScaleTemplate",
    "AssertionInfo",
    "SamplingSite",
    "TransformedProgram",
    "load_transformed",
    "transform",
]
