"""Configuration of the synthetic MEG reconstruction experiment."""

import json
import math
import os
from enum import Enum
from typing import List, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class MEGCase(str, Enum):
    """Reconstruction cases: penalty type crossed with the divergence constraint."""

    A = "a"  # separable penalty, FISTA
    B = "b"  # separable penalty, divergence constraint
    C = "c"  # joint penalty, FISTA
    D = "d"  # joint penalty, divergence constraint

    @property
    def joint(self) -> bool:
        return self in (MEGCase.C, MEGCase.D)

    @property
    def constrained(self) -> bool:
        return self in (MEGCase.B, MEGCase.D)

    @property
    def unconstrained(self) -> "MEGCase":
        """The case with the same penalty and no constraint."""
        return MEGCase.C if self.joint else MEGCase.A


class IterationBudgets(BaseModel):
    model_config = ConfigDict(extra="forbid")

    fista: int = Field(default=2000, ge=1)
    constrained: int = Field(default=20000, ge=1)


class ExperimentConfig(BaseModel):
    """Flat experiment document; sizes default to the desk-scale setup."""

    model_config = ConfigDict(extra="forbid")

    n_face: int = 16
    sensors: int = Field(default=500, ge=1)
    noise_level: float = Field(default=0.1, ge=0)
    seeds: List[int] = Field(default_factory=lambda: [0])
    cases: List[MEGCase] = Field(
        default_factory=lambda: [MEGCase.A, MEGCase.B, MEGCase.C, MEGCase.D]
    )
    budgets: IterationBudgets = Field(default_factory=IterationBudgets)
    lambda_tol: float = Field(default=0.02, gt=0, lt=1)

    levels: Optional[int] = None
    sensor_seed: int = 0
    model_seed: int = 0
    outer_radius: float = Field(default=0.09, gt=0)
    thickness: float = Field(default=0.001, gt=0)
    sensor_radius: float = Field(default=0.10, gt=0)
    workers: int = Field(default=4, ge=1)
    rel_tol: float = Field(default=1e-10, ge=0)

    @field_validator("n_face")
    @classmethod
    def _dyadic(cls, value: int) -> int:
        if value < 8 or value & (value - 1):
            raise ValueError(f"n_face must be dyadic (a power of two >= 8), got {value}")
        return value

    @field_validator("seeds")
    @classmethod
    def _non_empty(cls, value: List[int]) -> List[int]:
        if not value:
            raise ValueError("seeds must list at least one noise seed")
        return value

    @model_validator(mode="after")
    def _check_geometry(self) -> "ExperimentConfig":
        if self.thickness >= self.outer_radius:
            raise ValueError("thickness must be smaller than outer_radius")
        if self.sensor_radius <= self.outer_radius:
            raise ValueError("sensor_radius must lie outside the shell")
        if self.levels is not None:
            max_levels = int(math.log2(self.n_face)) - 2
            if not 1 <= self.levels <= max_levels:
                raise ValueError(
                    f"levels must lie in [1, {max_levels}] for n_face={self.n_face}"
                )
        return self

    @property
    def wavelet_levels(self) -> int:
        return self.levels if self.levels is not None else int(math.log2(self.n_face)) - 2


def load_experiment_config(config_path: str) -> ExperimentConfig:
    """
    Load an experiment document from JSON or YAML.

    Raises:
        FileNotFoundError: If config file doesn't exist
        ValueError: If the suffix is unknown or a value is invalid
    """
    if not os.path.exists(config_path):
        raise FileNotFoundError(f"Config file not found: {config_path}")

    with open(config_path, "r") as f:
        if config_path.endswith(".json"):
            config_data = json.load(f)
        elif config_path.endswith((".yaml", ".yml")):
            config_data = yaml.safe_load(f)
        else:
            raise ValueError(f"Unsupported config format: {config_path}")

    return ExperimentConfig(**(config_data or {}))
