"""
Runtime settings read from the environment (and an optional .env file).
"""

import os
from dataclasses import dataclass
from functools import lru_cache

from dotenv import load_dotenv

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


@dataclass(frozen=True)
class Settings:
    log_level: str = "INFO"
    sim_damping: float = 0.5
    oracle_depth: int = 6
    assumption_depth: int = 6
    max_attack_walk: int = 50


def _number(name: str, default, cast):
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return cast(raw)
    except ValueError:
        raise ValueError(f"{name} must be a number, got {raw!r}")


def load_settings() -> Settings:
    """
    Build settings from DESA_* environment variables.

    Raises:
        ValueError: a variable is malformed or out of range
    """
    load_dotenv()
    log_level = os.getenv("DESA_LOG_LEVEL", "INFO").upper()
    if log_level not in LOG_LEVELS:
        raise ValueError(f"DESA_LOG_LEVEL must be one of {', '.join(LOG_LEVELS)}, got {log_level!r}")

    damping = _number("DESA_SIM_DAMPING", 0.5, float)
    if not 0 < damping <= 1:
        raise ValueError(f"DESA_SIM_DAMPING must be in (0, 1], got {damping}")

    depths = {}
    for name, default in (("DESA_ORACLE_DEPTH", 6), ("DESA_ASSUMPTION_DEPTH", 6), ("DESA_MAX_ATTACK_WALK", 50)):
        value = _number(name, default, int)
        if value < 0:
            raise ValueError(f"{name} must be non-negative, got {value}")
        depths[name] = value

    return Settings(
        log_level=log_level,
        sim_damping=damping,
        oracle_depth=depths["DESA_ORACLE_DEPTH"],
        assumption_depth=depths["DESA_ASSUMPTION_DEPTH"],
        max_attack_walk=depths["DESA_MAX_ATTACK_WALK"],
    )


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return load_settings()
