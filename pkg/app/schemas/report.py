"""
Report schemas written by the command-line front end.
"""
from typing import TYPE_CHECKING, Dict, List, Optional

from pydantic import BaseModel, Field
from pydantic.alias_generators import to_camel

from app.core.config import settings
from app.lang.pretty import pretty
from app.schemas.candidate import CandidateModel, CounterexampleModel
from app.schemas.run_config import RunConfig

if TYPE_CHECKING:
    from app.cegis.synthesis import SynthesisResult
    from app.cegis.verify import CheckResult


class SynthesisReport(BaseModel):
    """Synthesized mechanism with its proof, utility and the configuration of the run."""

    schema_version: int = settings.SCHEMA_VERSION
    name: str
    mechanism: str
    scales: Dict[str, str] = Field(default_factory=dict)
    alignments: Dict[str, str] = Field(default_factory=dict)
    removed: List[str] = Field(default_factory=list)
    while_priv_bounds: Dict[str, str] = Field(default_factory=dict)
    utility: float
    rounded: bool = False
    rounds: int = 0
    refutation_trials: int = 0
    seed: int = 0
    wall_time: float = 0.0
    candidate: CandidateModel
    config: RunConfig

    class Config:
        alias_generator = to_camel
        populate_by_name = True

    @classmethod
    def from_result(cls, result: "SynthesisResult") -> "SynthesisReport":
        locations = sorted(result.sketch.enabled) if result.sketch.optional else None
        return cls(
            name=result.name,
            mechanism=pretty(result.mechanism),
            scales=result.proof["scales"],
            alignments=result.proof["alignments"],
            removed=list(result.removed),
            while_priv_bounds=result.proof["bounds"],
            utility=result.utility,
            rounded=result.rounded,
            rounds=result.rounds,
            refutation_trials=result.refutation_trials,
            seed=result.config.seed,
            wall_time=round(result.wall_time, 3),
            candidate=CandidateModel.from_candidate(result.candidate, locations),
            config=result.config,
        )


class CheckReport(BaseModel):
    """Outcome of refutation searches and paired trials for one candidate."""

    schema_version: int = settings.SCHEMA_VERSION
    name: str
    status: str
    reason: Optional[str] = None
    counterexample: Optional[CounterexampleModel] = None
    refutation_rounds: int = 0
    paired_trials: int = 0
    max_epsilon_hat: float = 0.0
    exhausted_trials: int = 0
    candidate: CandidateModel
    config: RunConfig

    class Config:
        alias_generator = to_camel
        populate_by_name = True

    @classmethod
    def from_result(cls, name: str, result: "CheckResult", candidate: CandidateModel, cfg: RunConfig) -> "CheckReport":
        cx = result.counterexample
        return cls(
            name=name,
            status=result.status,
            reason=result.reason,
            counterexample=CounterexampleModel.from_counterexample(cx) if cx is not None else None,
            refutation_rounds=result.refutation_rounds,
            paired_trials=result.paired_trials,
            max_epsilon_hat=result.max_epsilon_hat,
            exhausted_trials=result.exhausted_trials,
            candidate=candidate,
            config=cfg,
        )
