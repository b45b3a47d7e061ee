"""Synthetic divergence-free cortical currents and measurement noise."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from src.errors import ConfigurationError
from src.linops import Vector
from src.meg.divergence import field_from_fluxes
from src.meg.grid import FACE_AXES, CubedSphereGrid

logger = logging.getLogger(__name__)

DEFAULT_BUMPS = 4
DEFAULT_WIDTH = 0.22
# Bump centers stay within this angle of a face center in each coordinate.
CENTER_SPREAD = 0.08
# Faces 0-4 are visible from the upper-hemisphere sensors.
VISIBLE_FACES = (0, 1, 2, 3, 4)
EDGE_RINGS = 2


@dataclass(frozen=True)
class Bump:
    """Compactly supported C² stream-function bump A·(1 - (d/w)²)³ for d < w."""

    center: Tuple[float, float, float]
    width: float
    amplitude: float

    def evaluate(self, units: np.ndarray) -> np.ndarray:
        center = np.asarray(self.center, dtype=np.float64)
        center = center / np.linalg.norm(center)
        distance = np.arccos(np.clip(units @ center, -1.0, 1.0))
        inside = np.clip(1.0 - (distance / self.width) ** 2, 0.0, None)
        return self.amplitude * inside**3


def default_bumps(count: int = DEFAULT_BUMPS, seed: int = 0) -> Tuple[Bump, ...]:
    if not 1 <= count <= len(VISIBLE_FACES):
        raise ConfigurationError(f"bump count must lie in [1, {len(VISIBLE_FACES)}], got {count}")
    rng = np.random.default_rng(seed)
    faces = rng.choice(VISIBLE_FACES, size=count, replace=False)
    bumps = []
    for face in faces:
        xi, eta = rng.uniform(-CENTER_SPREAD, CENTER_SPREAD, size=2)
        c, e1, e2 = FACE_AXES[face]
        point = c + np.tan(xi) * e1 + np.tan(eta) * e2
        sign = rng.choice((-1.0, 1.0))
        bumps.append(
            Bump(
                center=tuple(float(v) for v in point / np.linalg.norm(point)),
                width=DEFAULT_WIDTH,
                amplitude=float(sign * rng.uniform(0.5, 1.5)),
            )
        )
    return tuple(bumps)


def _centered(values: np.ndarray, axis: int, spacing: float) -> np.ndarray:
    """Centered difference along ``axis`` with zero padding outside each face."""
    pad = [(0, 0)] * values.ndim
    pad[axis] = (1, 1)
    padded = np.pad(values, pad)
    upper = np.take(padded, np.arange(2, values.shape[axis] + 2), axis=axis)
    lower = np.take(padded, np.arange(0, values.shape[axis]), axis=axis)
    return (upper - lower) / (2.0 * spacing)


def stream_function(grid: CubedSphereGrid, bumps: Sequence[Bump]) -> np.ndarray:
    """Sum of bumps at the voxel centers, shape (6, n, n)."""
    values = np.zeros(grid.radial.shape[:3])
    for bump in bumps:
        values += bump.evaluate(grid.radial)
    return values


def make_input_model(
    grid: CubedSphereGrid,
    bumps: Optional[Sequence[Bump]] = None,
    seed: int = 0,
) -> Vector:
    """Tangent field whose densitized fluxes are the discrete curl of a stream function G.

    With q1 = D_η G and q2 = -D_ξ G the discrete divergence vanishes to
    rounding, provided G is zero on the two outermost voxel rings of each
    face.
    """
    bumps = default_bumps(seed=seed) if bumps is None else tuple(bumps)
    g = stream_function(grid, bumps)

    ring = np.zeros(g.shape[1:], dtype=bool)
    ring[:EDGE_RINGS, :] = ring[-EDGE_RINGS:, :] = True
    ring[:, :EDGE_RINGS] = ring[:, -EDGE_RINGS:] = True
    if np.any(g[:, ring] != 0.0):
        raise ConfigurationError(
            f"stream-function support must stay {EDGE_RINGS} voxels inside each face; "
            "use narrower or more central bumps"
        )

    q1 = _centered(g, axis=2, spacing=grid.spacing)
    q2 = -_centered(g, axis=1, spacing=grid.spacing)
    field = field_from_fluxes(grid, q1, q2)
    logger.debug("Input model: %d bumps, |J| = %.4g", len(bumps), float(np.linalg.norm(field)))
    return field


def add_noise(y: Vector, level: float, seed: int) -> Tuple[Vector, Vector]:
    """Return (y + ε, ε) with Gaussian ε rescaled so that ‖ε‖ = level·‖y‖."""
    if level < 0:
        raise ConfigurationError(f"noise level must be nonnegative, got {level}")
    y = np.asarray(y, dtype=np.float64)
    noise = np.random.default_rng(seed).standard_normal(y.shape)
    target = level * float(np.linalg.norm(y))
    norm = float(np.linalg.norm(noise))
    noise = noise * (target / norm) if norm > 0 and target > 0 else np.zeros_like(y)
    return y + noise, noise
