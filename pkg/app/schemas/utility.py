"""
Sample inputs and the custom utility.
"""
from typing import Any, Dict, Optional

from pydantic import BaseModel, Field
from pydantic.alias_generators import to_camel

from app.cegis.utility import CUSTOM, UtilitySpec
from app.core.config import settings


class SampleInput(BaseModel):
    """Concrete public and private inputs of one run."""

    public_inputs: Dict[str, Any] = Field(default_factory=dict)
    private_inputs: Dict[str, Any] = Field(default_factory=dict)

    class Config:
        alias_generator = to_camel
        populate_by_name = True

    @property
    def inputs(self) -> Dict[str, Any]:
        return {**self.public_inputs, **self.private_inputs}


class UtilitySpecModel(SampleInput):
    """Custom utility: accuracy on a sample input with a penalty below `min_outputs` reports."""

    min_outputs: Optional[int] = Field(None, ge=0)
    penalty: float = Field(settings.CUSTOM_PENALTY, ge=0)
    repetitions: int = Field(settings.CUSTOM_REPETITIONS, ge=1)

    def to_spec(self) -> UtilitySpec:
        """minOutputs defaults to the public parameter N of the sample input."""
        n = self.min_outputs if self.min_outputs is not None else int(self.public_inputs.get("N", 0))
        return UtilitySpec(CUSTOM, self.public_inputs, self.private_inputs, n, self.penalty, self.repetitions)
