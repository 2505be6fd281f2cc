"""
Configuration module.

Numerical tolerances and dimension caps, read from the environment
(optionally a .env file next to the working directory) with the
documented defaults.
"""

import os
from functools import lru_cache

from dotenv import load_dotenv
from pydantic import BaseModel

from .utils.logging_config import get_logger

logger = get_logger(__name__)

# Load environment variables from .env file
load_dotenv()


class Settings(BaseModel):
    """
    Library-wide numerical settings.

    Individual functions accept keyword overrides; these are the fallbacks.
    """

    symmetry_tol: float = 1e-12
    stationarity_tol: float = 1e-10
    moment_cap: int = 4096  # max (2n)^m
    oracle_dim_cap: int = 256  # max d^n or 2^n
    superop_dim_cap: int = 64  # max dim for the dim^2 x dim^2 Liouvillian
    tail_mass_tol: float = 1e-6  # edge population alarm during evolve
    coherent_tail_tol: float = 1e-8  # truncated mass allowed for coherent states
    rk4_max_steps: int = 2_000_000
    log_level: str = "INFO"


def _env(name: str, default):
    raw = os.getenv(name)
    if raw is None:
        return default
    return type(default)(raw)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """
    Build the settings object from GKSL_* environment variables.

    Returns:
        Settings: Cached settings instance
    """
    defaults = Settings()
    settings = Settings(
        **{
            field: _env(f"GKSL_{field.upper()}", getattr(defaults, field))
            for field in Settings.model_fields
        }
    )
    logger.debug("Settings loaded", extra=settings.model_dump())
    return settings
