"""
Run configuration shared by the synthesis loop, the checker and the reports.
"""
from typing import Any, Dict, Optional, Tuple

from pydantic import BaseModel, Field, validator
from pydantic.alias_generators import to_camel

from app.core.config import Settings, settings
from app.swarm.pso import SwarmConfig

Box = Tuple[float, float]


class RunConfig(BaseModel):
    """Everything a run depends on; echoed into every report."""

    seed: int = 0
    jobs: int = Field(1, ge=1)

    particles: int = Field(60, ge=2)
    iterations: int = Field(500, ge=0)
    inertia: float = Field(0.9, ge=0)
    cognitive: float = Field(0.5, ge=0)
    social: float = Field(0.3, ge=0)
    early_stop_tolerance: float = Field(1.0, ge=0)
    early_stop_patience: int = Field(50, ge=0)

    theta_box: Box = (-10.0, 10.0)
    lambda_box: Box = (0.0, 10.0)
    gamma_box: Box = (0.0, 10.0)
    theta_grid: float = Field(1.0, gt=0)
    round_scales: bool = True

    query_count: int = Field(100, ge=1)
    query_box: Box = (-10.0, 10.0)
    sample_box: Box = (-10.0, 10.0)
    public_box: Box = (-10.0, 10.0)
    search_eps: float = Field(1.0, gt=0)

    max_rounds: int = Field(30, ge=1)
    max_expansions: int = Field(2, ge=0)
    subsketch_cap: int = Field(16, ge=1)
    generation_retries: int = Field(2, ge=0)
    refutation_rounds: int = Field(20, ge=0)
    paired_trials: int = Field(10000, ge=0)
    invalid_score: float = Field(1e9, gt=0)

    utility: str = "default"
    utility_instantiation: Dict[str, float] = Field(default_factory=dict)
    utility_default_value: float = 1.0
    custom_repetitions: int = Field(2500, ge=1)
    custom_penalty: float = 1.0

    @validator("theta_box", "lambda_box", "gamma_box", "query_box", "sample_box", "public_box")
    def check_box(cls, v: Box) -> Box:
        """Boxes are (low, high) with low < high."""
        low, high = v
        if low >= high:
            raise ValueError(f"empty box {v}")
        return (float(low), float(high))

    @validator("utility")
    def check_utility(cls, v: str) -> str:
        if v not in ("default", "custom"):
            raise ValueError("utility must be 'default' or 'custom'")
        return v

    class Config:
        alias_generator = to_camel
        populate_by_name = True

    @classmethod
    def from_settings(cls, source: Optional[Settings] = None, **overrides: Any) -> "RunConfig":
        """
        Build a run configuration from settings; None-valued overrides are ignored.

        Args:
            source: Settings to read, defaults to the global settings
            **overrides: Field values taking precedence over the settings

        Returns:
            RunConfig: Validated configuration
        """
        s = source or settings
        values: Dict[str, Any] = {
            "seed": s.SEED,
            "jobs": s.JOBS,
            "particles": s.PSO_PARTICLES,
            "iterations": s.PSO_ITERATIONS,
            "inertia": s.PSO_INERTIA,
            "cognitive": s.PSO_COGNITIVE,
            "social": s.PSO_SOCIAL,
            "early_stop_tolerance": s.EARLY_STOP_TOLERANCE,
            "early_stop_patience": s.EARLY_STOP_PATIENCE,
            "theta_box": (s.THETA_MIN, s.THETA_MAX),
            "lambda_box": (s.LAMBDA_MIN, s.LAMBDA_MAX),
            "gamma_box": (s.GAMMA_MIN, s.GAMMA_MAX),
            "theta_grid": s.THETA_GRID,
            "round_scales": s.ROUND_SCALES,
            "query_count": s.QUERY_COUNT,
            "query_box": (s.QUERY_MIN, s.QUERY_MAX),
            "sample_box": (s.SAMPLE_MIN, s.SAMPLE_MAX),
            "public_box": (s.PUBLIC_MIN, s.PUBLIC_MAX),
            "search_eps": s.SEARCH_EPS,
            "max_rounds": s.MAX_ROUNDS,
            "max_expansions": s.MAX_EXPANSIONS,
            "subsketch_cap": s.SUBSKETCH_CAP,
            "generation_retries": s.GENERATION_RETRIES,
            "refutation_rounds": s.REFUTATION_ROUNDS,
            "paired_trials": s.PAIRED_TRIALS,
            "invalid_score": s.INVALID_SCORE,
            "utility_instantiation": dict(s.UTILITY_INSTANTIATION),
            "utility_default_value": s.UTILITY_DEFAULT_VALUE,
            "custom_repetitions": s.CUSTOM_REPETITIONS,
            "custom_penalty": s.CUSTOM_PENALTY,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def swarm(self, seed: Optional[int] = None) -> SwarmConfig:
        return SwarmConfig(
            particles=self.particles,
            iterations=self.iterations,
            inertia=self.inertia,
            cognitive=self.cognitive,
            social=self.social,
            tolerance=self.early_stop_tolerance,
            patience=self.early_stop_patience,
            seed=seed,
        )

    def expanded(self) -> "RunConfig":
        """Hole boxes and the query count doubled."""

        def wider(box: Box) -> Box:
            return (box[0] * 2, box[1] * 2)

        return self.model_copy(update={
            "theta_box": wider(self.theta_box),
            "lambda_box": wider(self.lambda_box),
            "gamma_box": wider(self.gamma_box),
            "query_count": self.query_count * 2,
        })
