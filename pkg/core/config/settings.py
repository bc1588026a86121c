import os
import sys
import logging
from typing import Optional
from pydantic import BaseModel, ConfigDict, field_validator
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# --- Defaults (overridable from the environment / .env) ---
DEFAULT_WORKING_PRECISION = float(os.environ.get("TSVD_WORKING_PRECISION", "1e-11"))
DEFAULT_SEED = int(os.environ.get("TSVD_SEED", "0"))
DEFAULT_BLOCK_ROWS = int(os.environ.get("TSVD_BLOCK_ROWS", "1024"))
DEFAULT_POWER_ITERS = int(os.environ.get("TSVD_POWER_ITERS", "20"))

# Seed for the power-method start vector, independent of the algorithm seed
METRIC_SEED = int(os.environ.get("TSVD_METRIC_SEED", "20171113"))

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

_workers = int(os.environ.get("TSVD_WORKERS") or 0) or (os.cpu_count() or 1)


class RunConfig(BaseModel):
    """Knobs shared by every algorithm run."""

    model_config = ConfigDict(frozen=True)

    working_precision: float = DEFAULT_WORKING_PRECISION
    seed: int = DEFAULT_SEED
    block_rows: int = DEFAULT_BLOCK_ROWS
    power_iters: int = DEFAULT_POWER_ITERS

    @field_validator("working_precision")
    @classmethod
    def _check_precision(cls, value: float) -> float:
        if not 0.0 < value < 1.0:
            raise ValueError(f"working_precision must lie in (0, 1), got {value}")
        return value

    @field_validator("seed")
    @classmethod
    def _check_seed(cls, value: int) -> int:
        if not 0 <= value < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {value}")
        return value

    @field_validator("block_rows", "power_iters")
    @classmethod
    def _check_positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError(f"must be at least 1, got {value}")
        return value

    @classmethod
    def from_env(cls, **overrides) -> "RunConfig":
        """Builds a config from the environment defaults, applying any non-None overrides."""
        values = {key: value for key, value in overrides.items() if value is not None}
        return cls(**values)


def set_workers(count: int) -> None:
    """Sets the number of threads used for per-block work."""
    global _workers
    if count < 1:
        raise ValueError(f"worker count must be at least 1, got {count}")
    _workers = count


def get_workers() -> int:
    return _workers


def configure_logging(level: Optional[str] = None) -> None:
    """Routes library logging to standard error."""
    level_name = (level or os.environ.get("TSVD_LOG_LEVEL", "WARNING")).upper()
    logging.basicConfig(
        stream=sys.stderr,
        level=getattr(logging, level_name, logging.WARNING),
        format=LOG_FORMAT,
        force=True,
    )
