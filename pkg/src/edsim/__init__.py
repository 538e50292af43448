"""Host-side simulator of a multimetric event-driven wake-up front end for a
structural monitoring node: strain and vibration triggers, RTC/nanotimer
scheduling, wake supervision and per-module power accounting."""

from .config import SimConfig, config_from_dict, load_config
from .engine import PowerTrace, SimResult, run_simulation
from .errors import (
    ConfigError,
    EdsError,
    OutputError,
    UndefinedServiceLifeError,
    UnreachableThresholdError,
)
from .harness import build_scenario, run

__all__ = [
    "ConfigError",
    "EdsError",
    "OutputError",
    "PowerTrace",
    "SimConfig",
    "SimResult",
    "UndefinedServiceLifeError",
    "UnreachableThresholdError",
    "build_scenario",
    "config_from_dict",
    "load_config",
    "run",
    "run_simulation",
]

__version__ = "0.1.0"
