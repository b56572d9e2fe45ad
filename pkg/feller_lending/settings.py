"""Provide process settings."""
from functools import lru_cache

from pydantic import BaseSettings, Field

from .const import BLOCK_SIZE, ETA_TOL, STEPS_PER_UNIT


class Settings(BaseSettings):
    """Represent process settings, overridable with FELLER_* variables."""

    out_dir: str = "feller-output"
    workers: int = Field(1, ge=1)
    steps_per_unit: int = Field(STEPS_PER_UNIT, ge=1)
    block_size: int = Field(BLOCK_SIZE, ge=1)
    log_level: str = "INFO"
    eta_tolerance: float = Field(ETA_TOL, gt=0)

    class Config:
        """Configure the settings source."""

        env_prefix = "FELLER_"


@lru_cache()
def get_settings() -> Settings:
    """Return app settings lru cached."""
    return Settings()
