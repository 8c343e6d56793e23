"""
Candidate and counterexample schemas.
"""
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field
from pydantic.alias_generators import to_camel

from app.cegis.candidate import Candidate
from app.exec.transformed import Counterexample


class CandidateModel(BaseModel):
    """Hole values, optionally naming the enabled optional noise locations."""

    theta: List[float] = Field(default_factory=list)
    lam: List[float] = Field(default_factory=list, alias="lambda")
    gamma: List[float] = Field(default_factory=list)
    locations: Optional[List[str]] = None

    class Config:
        populate_by_name = True

    @classmethod
    def from_candidate(cls, cand: Candidate, locations: Optional[List[str]] = None) -> "CandidateModel":
        return cls(theta=list(cand.theta), lam=list(cand.lam), gamma=list(cand.gamma), locations=locations)

    def to_candidate(self) -> Candidate:
        return Candidate(tuple(self.theta), tuple(self.lam), tuple(self.gamma))


class CounterexampleModel(BaseModel):
    public_inputs: Dict[str, Any] = Field(default_factory=dict)
    private_inputs: Dict[str, Any] = Field(default_factory=dict)
    distances: Dict[str, Any] = Field(default_factory=dict)
    samples: List[float] = Field(default_factory=list)

    class Config:
        alias_generator = to_camel
        populate_by_name = True

    @classmethod
    def from_counterexample(cls, cx: Counterexample) -> "CounterexampleModel":
        return cls(
            public_inputs=dict(cx.public_inputs),
            private_inputs=dict(cx.private_inputs),
            distances=dict(cx.distances),
            samples=list(cx.samples),
        )

    def to_counterexample(self) -> Counterexample:
        return Counterexample(self.public_inputs, self.private_inputs, self.distances, tuple(self.samples))
