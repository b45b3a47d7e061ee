"""Random magnetometer positions on the upper hemisphere."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from src.errors import ConfigurationError

SENSOR_RADIUS = 0.10


@dataclass(frozen=True)
class SensorArray:
    positions: np.ndarray  # (count, 3)
    radial_units: np.ndarray  # (count, 3)

    @property
    def count(self) -> int:
        return self.positions.shape[0]


def sample_sensors(count: int, radius: float = SENSOR_RADIUS, seed: int = 0) -> SensorArray:
    """Area-uniform points: z uniform on [0, r] and azimuth uniform (Archimedes)."""
    if count < 1:
        raise ConfigurationError(f"need at least one sensor, got {count}")
    rng = np.random.default_rng(seed)
    z = radius * rng.uniform(0.0, 1.0, size=count)
    phi = rng.uniform(0.0, 2 * np.pi, size=count)
    rho = np.sqrt(np.maximum(radius**2 - z**2, 0.0))
    units = np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z]) / radius
    units /= np.linalg.norm(units, axis=1, keepdims=True)
    return SensorArray(positions=radius * units, radial_units=units)
