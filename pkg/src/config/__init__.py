"""Configuration modules for solver and experiment settings."""

from .experiment_config import (
    ExperimentConfig,
    IterationBudgets,
    MEGCase,
    load_experiment_config,
)
from .solver_config import (
    SolverConfig,
    get_default_solver_config,
    load_solver_config,
)

__all__ = [
    "SolverConfig",
    "load_solver_config",
    "get_default_solver_config",
    "ExperimentConfig",
    "IterationBudgets",
    "MEGCase",
    "load_experiment_config",
]
