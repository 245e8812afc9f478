"""Configuration utilities."""

import os
from dataclasses import dataclass
from typing import Optional

from dotenv import load_dotenv


@dataclass(frozen=True)
class Settings:
    state_fmt: str = 'Q17.6'
    weight_bits: int = 8
    scalar_fmt: str = 'Q7.16'
    alpha_period: int = 100
    beta_period: int = 100
    iters: int = 500
    sync_cost: int = 64
    neurons_per_core: int = 256
    log_level: str = 'WARNING'


def _int(name: str, default: int, minimum: Optional[int] = None) -> int:
    value = os.getenv(name)
    if value is None or value == '':
        return default
    try:
        number = int(value)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got '{value}'") from None
    if minimum is not None and number < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {number}")
    return number


def load_environment(dotenv_path: Optional[str] = None) -> Settings:
    """Load settings from the environment (and a .env file, if present)."""
    load_dotenv(dotenv_path)
    defaults = Settings()
    return Settings(
        state_fmt=os.getenv('NEUROQP_STATE_FMT', defaults.state_fmt),
        weight_bits=_int('NEUROQP_WEIGHT_BITS', defaults.weight_bits),
        scalar_fmt=os.getenv('NEUROQP_SCALAR_FMT', defaults.scalar_fmt),
        alpha_period=_int('NEUROQP_ALPHA_PERIOD', defaults.alpha_period, minimum=1),
        beta_period=_int('NEUROQP_BETA_PERIOD', defaults.beta_period, minimum=1),
        iters=_int('NEUROQP_ITERS', defaults.iters, minimum=1),
        sync_cost=_int('NEUROQP_SYNC_COST', defaults.sync_cost),
        neurons_per_core=_int('NEUROQP_NEURONS_PER_CORE', defaults.neurons_per_core, minimum=1),
        log_level=os.getenv('NEUROQP_LOG_LEVEL', defaults.log_level).upper(),
    )
