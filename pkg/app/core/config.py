"""
Configuration settings for the synthesizer.
"""
from typing import Dict, Optional
from pydantic import validator
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Synthesizer settings."""

    PROJECT_NAME: str = "dpsynth"
    VERSION: str = "1.0.0"
    SCHEMA_VERSION: int = 1

    # Logging
    LOG_LEVEL: str = "INFO"

    # Reproducibility
    SEED: int = 0
    JOBS: int = 1

    # Swarm
    PSO_PARTICLES: int = 60
    PSO_ITERATIONS: int = 500
    PSO_INERTIA: float = 0.9
    PSO_COGNITIVE: float = 0.5
    PSO_SOCIAL: float = 0.3
    EARLY_STOP_TOLERANCE: float = 1.0
    EARLY_STOP_PATIENCE: int = 50

    # Hole boxes
    THETA_MIN: float = -10.0
    THETA_MAX: float = 10.0
    THETA_GRID: float = 1.0
    LAMBDA_MIN: float = 0.0
    LAMBDA_MAX: float = 10.0
    GAMMA_MIN: float = 0.0
    GAMMA_MAX: float = 10.0
    ROUND_SCALES: bool = True

    # Counterexample search
    QUERY_COUNT: int = 100
    QUERY_MIN: float = -10.0
    QUERY_MAX: float = 10.0
    SAMPLE_MIN: float = -10.0
    SAMPLE_MAX: float = 10.0
    PUBLIC_MIN: float = -10.0
    PUBLIC_MAX: float = 10.0
    SIZE_PARAM: str = "size"
    SEARCH_EPS: float = 1.0

    # CEGIS
    MAX_ROUNDS: int = 30
    MAX_EXPANSIONS: int = 2
    SUBSKETCH_CAP: int = 16
    GENERATION_RETRIES: int = 2
    REFUTATION_ROUNDS: int = 20
    PAIRED_TRIALS: int = 10000
    INVALID_SCORE: float = 1e9

    # Utility
    UTILITY_INSTANTIATION: Dict[str, float] = {"eps": 1.0, "size": 100.0, "N": 10.0, "T": 2.0}
    UTILITY_DEFAULT_VALUE: float = 1.0
    CUSTOM_REPETITIONS: int = 2500
    CUSTOM_PENALTY: float = 1.0
    CUSTOM_SAMPLE_INPUT: Optional[str] = None

    # Interpreter
    LOOP_CAP_FACTOR: int = 10
    DEFAULT_LOOP_CAP: int = 1000
    EQ_TOLERANCE: float = 1e-6

    @validator("LOG_LEVEL", pre=True)
    def normalize_log_level(cls, v: str) -> str:
        """Normalize log level names to upper case."""
        if isinstance(v, str):
            return v.strip().upper()
        raise ValueError(v)

    @validator("THETA_GRID")
    def check_theta_grid(cls, v: float) -> float:
        """Reject non-positive snapping grids."""
        if v <= 0:
            raise ValueError("THETA_GRID must be positive")
        return v

    @validator("PSO_PARTICLES")
    def check_particles(cls, v: int) -> int:
        """A swarm needs at least two particles."""
        if v < 2:
            raise ValueError("PSO_PARTICLES must be at least 2")
        return v

    class Config:
        case_sensitive = True
        env_file = ".env"


settings = Settings()
