"""Solver configuration loaded from external YAML."""

import os
from typing import Any, Optional

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, field_validator

DEFAULT_CONFIG_PATH = "config/solver_defaults.yaml"
CONFIG_ENV_VAR = "SPARSEREC_SOLVER_CONFIG"


class SolverConfig(BaseModel):
    """Step sizes, relaxation parameter and stopping rules for one solver run."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    # Absent step sizes are auto-scaled from norm estimates
    tau1: Optional[float] = Field(default=None, gt=0)
    tau2: Optional[float] = Field(default=None, gt=0)
    tau3: Optional[float] = Field(default=None, gt=0)
    alpha: float = 1.0

    max_iter: int = Field(default=5000, ge=1)
    rel_tol: float = Field(default=1e-9, ge=0)
    trace_every: int = Field(default=10, ge=1)
    seed: int = 0

    # Power iteration and safety settings
    norm_tol: float = Field(default=1e-8, gt=0)
    norm_max_iter: int = Field(default=5000, ge=1)
    safety_margin: float = Field(default=0.9, gt=0, lt=1)
    divergence_limit: float = Field(default=1e12, gt=0)

    @field_validator("alpha")
    @classmethod
    def _alpha_above_half(cls, value: float) -> float:
        if not value > 0.5:
            raise ValueError(f"alpha must exceed 1/2, got {value}")
        return value

    def with_overrides(self, **overrides: Any) -> "SolverConfig":
        """Return a validated copy; ``None`` values leave a field untouched."""
        data = self.model_dump()
        data.update({key: value for key, value in overrides.items() if value is not None})
        return SolverConfig(**data)


def load_solver_config(config_path: str) -> SolverConfig:
    """
    Load solver settings from the ``solver:`` mapping of a YAML file.

    Raises:
        FileNotFoundError: If config file doesn't exist
        pydantic.ValidationError: If a value is out of range
    """
    if not os.path.exists(config_path):
        raise FileNotFoundError(f"Config file not found: {config_path}")

    with open(config_path, "r") as f:
        config_data = yaml.safe_load(f) or {}

    return SolverConfig(**(config_data.get("solver") or {}))


def get_default_solver_config() -> SolverConfig:
    """
    Get the default solver configuration.

    Reads the path from SPARSEREC_SOLVER_CONFIG (``.env`` honoured), falls back
    to built-in defaults when the file is missing.
    """
    load_dotenv()
    config_path = os.getenv(CONFIG_ENV_VAR, DEFAULT_CONFIG_PATH)

    try:
        return load_solver_config(config_path)
    except FileNotFoundError:
        return SolverConfig()
