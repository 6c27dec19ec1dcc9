"""
Environment driven configuration for the pi pipeline.
"""

import os
from typing import Optional

from pydantic import BaseModel, Field, field_validator


class Settings(BaseModel):
    """Runtime knobs, all overridable from the environment."""
    precision_bits: int = Field(256, ge=64)
    guard_bits: int = Field(16, ge=0)
    log_level: str = "WARNING"
    seed: int = 20240601
    baker_cap: int = Field(6, ge=2)
    divpoly_cap: int = Field(16, ge=1)
    numeric_cap: int = Field(8, ge=2)
    workers: int = Field(1, ge=1)

    @field_validator('log_level')
    @classmethod
    def _known_level(cls, value: str) -> str:
        level = value.upper()
        if level not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
            raise ValueError(f"unknown log level: {value}")
        return level


# env var -> Settings field
ENV_FIELDS = {
    'CHUDPI_PRECISION': 'precision_bits',
    'CHUDPI_GUARD_BITS': 'guard_bits',
    'CHUDPI_LOG_LEVEL': 'log_level',
    'CHUDPI_SEED': 'seed',
    'CHUDPI_BAKER_CAP': 'baker_cap',
    'CHUDPI_DIVPOLY_CAP': 'divpoly_cap',
    'CHUDPI_NUMERIC_CAP': 'numeric_cap',
    'CHUDPI_WORKERS': 'workers',
}


def get_settings(precision_override: Optional[int] = None) -> Settings:
    """
    Build settings from the current environment.

    Args:
        precision_override: value of a --precision flag, wins over CHUDPI_PRECISION

    Returns:
        Validated Settings (raises pydantic.ValidationError on bad values)
    """
    values = {}
    for env_name, field_name in ENV_FIELDS.items():
        raw = os.getenv(env_name)
        if raw is not None and raw.strip() != '':
            values[field_name] = raw.strip()
    if precision_override is not None:
        values['precision_bits'] = precision_override
    return Settings(**values)
