"""Runtime settings using Pydantic BaseSettings."""

from pathlib import Path
from typing import Literal

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


def find_env_file() -> Path | None:
    """Find .env file in current or parent directories."""
    current = Path.cwd()
    for path in [current, current.parent]:
        env_file = path / ".env"
        if env_file.exists():
            return env_file
    return None


class Settings(BaseSettings):
    """Engine defaults, overridable through ``HYPERMIX_*`` environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="HYPERMIX_",
        env_file=find_env_file(),
        env_ignore_empty=True,
        extra="ignore",
    )

    # === Witness engines ===
    DEFAULT_N_MAX: int = 64
    TOLERANCE: float = 1e-10
    KERNEL_TOLERANCE: float = 1e-12
    COEFFICIENT_TOLERANCE: float = 1e-12

    # === Quadrature ===
    QUADRATURE_TOLERANCE: float = 1e-10
    QUADRATURE_POINTS: int = 16
    QUADRATURE_MAX_DEPTH: int = 40
    SUP_SAMPLES: int = 64
    BISECTION_TOLERANCE: float = 1e-12
    CONTINUITY_TOLERANCE: float = 1e-9

    # === Arithmetic ===
    # Factorial-scale bounds switch from exact integers to lgamma above this index
    LOG_SPACE_THRESHOLD: int = 20

    # === Output ===
    FLOAT_DIGITS: int = 12
    LOG_LEVEL: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "WARNING"
    VERIFY_SEED: int = 20240101

    @field_validator(
        "TOLERANCE",
        "KERNEL_TOLERANCE",
        "COEFFICIENT_TOLERANCE",
        "QUADRATURE_TOLERANCE",
        "BISECTION_TOLERANCE",
        "CONTINUITY_TOLERANCE",
    )
    @classmethod
    def validate_tolerance(cls, v: float) -> float:
        """Tolerances must be strictly positive."""
        if v <= 0:
            raise ValueError("tolerance must be positive")
        return v

    @field_validator("DEFAULT_N_MAX", "QUADRATURE_POINTS", "SUP_SAMPLES", "FLOAT_DIGITS")
    @classmethod
    def validate_positive_count(cls, v: int) -> int:
        """Counts must be at least one."""
        if v < 1:
            raise ValueError("must be at least 1")
        return v


settings = Settings()
