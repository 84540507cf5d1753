"""Seedable swarm simulator for collective estimation of scalar fields."""

from .config import ExperimentConfig, Scenario
from .engine import World, run_control_experiment, run_dispersion, run_full_scenario
from .errors import ConfigError, DomainError, UnsupportedMappingError

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DomainError",
    "ExperimentConfig",
    "Scenario",
    "UnsupportedMappingError",
    "World",
    "run_control_experiment",
    "run_dispersion",
    "run_full_scenario",
]
