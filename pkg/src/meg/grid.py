"""Equiangular cubed-sphere discretization of a thin spherical shell.

Face k maps (ξ, η) ∈ [-π/4, π/4]² to the unit vector along
c_k + tan ξ·e1_k + tan η·e2_k. Per-voxel arrays have shape (6, n, n) with
axis 1 running over ξ and axis 2 over η; flattened voxel order is face-major
then row-major.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.errors import ConfigurationError

OUTER_RADIUS = 0.09
THICKNESS = 0.001

# (center, e1, e2) for each face; every triple is right-handed.
FACE_AXES = np.array(
    [
        [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
        [[0, 1, 0], [-1, 0, 0], [0, 0, 1]],
        [[-1, 0, 0], [0, -1, 0], [0, 0, 1]],
        [[0, -1, 0], [1, 0, 0], [0, 0, 1]],
        [[0, 0, 1], [0, 1, 0], [-1, 0, 0]],
        [[0, 0, -1], [0, 1, 0], [1, 0, 0]],
    ],
    dtype=np.float64,
)


def face_point(face: np.ndarray, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """Unnormalized cube point c + tan ξ·e1 + tan η·e2 (face may be an index array)."""
    axes = FACE_AXES[face]
    return (
        axes[..., 0, :]
        + np.tan(xi)[..., None] * axes[..., 1, :]
        + np.tan(eta)[..., None] * axes[..., 2, :]
    )


def face_geometry(
    face: np.ndarray, xi: np.ndarray, eta: np.ndarray, radius: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Radial unit vector and covariant basis a_ξ = ∂r/∂ξ, a_η = ∂r/∂η at ``radius``.

    Valid for extended coordinates slightly beyond ±π/4 as well.
    """
    face, xi, eta = np.broadcast_arrays(face, xi, eta)
    axes = FACE_AXES[face]
    point = face_point(face, xi, eta)
    length = np.linalg.norm(point, axis=-1, keepdims=True)
    unit = point / length

    def tangent(direction: np.ndarray, coord: np.ndarray) -> np.ndarray:
        projected = direction - unit * np.sum(unit * direction, axis=-1, keepdims=True)
        return radius * projected / (np.cos(coord) ** 2)[..., None] / length

    return unit, tangent(axes[..., 1, :], xi), tangent(axes[..., 2, :], eta)


def _corner_area(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.arctan(x * y / np.sqrt(1.0 + x * x + y * y))


@dataclass(frozen=True)
class CubedSphereGrid:
    n_face: int
    outer_radius: float
    thickness: float
    coords: np.ndarray  # (n,) cell-center angles, shared by ξ and η
    centers: np.ndarray  # (6, n, n, 3)
    radial: np.ndarray  # (6, n, n, 3)
    t1: np.ndarray  # (6, n, n, 3) unit vector along ∂r/∂ξ
    t2: np.ndarray  # (6, n, n, 3) radial × t1
    volumes: np.ndarray  # (6, n, n)
    a_xi: np.ndarray  # (6, n, n, 3)
    a_eta: np.ndarray  # (6, n, n, 3)

    @property
    def spacing(self) -> float:
        return math.pi / (2 * self.n_face)

    @property
    def mid_radius(self) -> float:
        return self.outer_radius - self.thickness / 2

    @property
    def voxel_count(self) -> int:
        return 6 * self.n_face**2

    @property
    def field_size(self) -> int:
        """Length of a two-component tangent field."""
        return 2 * self.voxel_count

    @property
    def sqrt_g(self) -> np.ndarray:
        """Area element |a_ξ × a_η| per voxel."""
        return np.linalg.norm(np.cross(self.a_xi, self.a_eta), axis=-1)

    def flat(self, array: np.ndarray) -> np.ndarray:
        """Collapse the (6, n, n) voxel axes."""
        return array.reshape(self.voxel_count, *array.shape[3:])

    def voxel_index(self, face: np.ndarray, i: np.ndarray, j: np.ndarray) -> np.ndarray:
        n = self.n_face
        return (np.asarray(face) * n + np.asarray(i)) * n + np.asarray(j)

    def tangent_components(self, vectors: np.ndarray) -> np.ndarray:
        """Channel-major (J1 | J2) field from (6, n, n, 3) tangential vectors."""
        j1 = np.sum(vectors * self.t1, axis=-1).reshape(-1)
        j2 = np.sum(vectors * self.t2, axis=-1).reshape(-1)
        return np.concatenate([j1, j2])

    def field_vectors(self, field: np.ndarray) -> np.ndarray:
        """(6, n, n, 3) vectors of a channel-major tangent field."""
        shape = (6, self.n_face, self.n_face, 1)
        j1 = field[: self.voxel_count].reshape(shape)
        j2 = field[self.voxel_count:].reshape(shape)
        return j1 * self.t1 + j2 * self.t2


def build_grid(
    n_face: int,
    outer_radius: float = OUTER_RADIUS,
    thickness: float = THICKNESS,
) -> CubedSphereGrid:
    if n_face < 8 or n_face & (n_face - 1):
        raise ConfigurationError(f"n_face must be dyadic (a power of two >= 8), got {n_face}")
    if not 0 < thickness < outer_radius:
        raise ConfigurationError("need 0 < thickness < outer_radius")

    spacing = math.pi / (2 * n_face)
    edges = -math.pi / 4 + spacing * np.arange(n_face + 1)
    coords = edges[:-1] + spacing / 2

    face, xi, eta = np.meshgrid(np.arange(6), coords, coords, indexing="ij")
    mid = outer_radius - thickness / 2
    radial, a_xi, a_eta = face_geometry(face, xi, eta, mid)
    t1 = a_xi / np.linalg.norm(a_xi, axis=-1, keepdims=True)
    t2 = np.cross(radial, t1)

    tan_edges = np.tan(edges)
    corner = _corner_area(tan_edges[:, None], tan_edges[None, :])
    cell_area = corner[1:, 1:] - corner[:-1, 1:] - corner[1:, :-1] + corner[:-1, :-1]
    shell_factor = (outer_radius**3 - (outer_radius - thickness) ** 3) / 3.0
    volumes = np.broadcast_to(cell_area * shell_factor, (6, n_face, n_face)).copy()

    arrays = dict(
        centers=mid * radial, radial=radial, t1=t1, t2=t2,
        volumes=volumes, a_xi=a_xi, a_eta=a_eta,
    )
    for value in arrays.values():
        value.setflags(write=False)
    coords.setflags(write=False)
    return CubedSphereGrid(
        n_face=n_face, outer_radius=outer_radius, thickness=thickness, coords=coords, **arrays
    )
