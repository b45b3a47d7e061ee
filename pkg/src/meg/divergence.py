"""Discrete surface divergence of a tangent field on the cubed sphere.

In face coordinates div J = (1/√g)[∂ξ(√g J^ξ) + ∂η(√g J^η)], discretized by
centered differences of the densitized fluxes q = √g·(J^ξ, J^η). Stencils
that leave a face read a ghost value: the ghost point lies exactly on the
first row of the adjacent face, the vector field there is bilinearly
interpolated from that face's voxels and re-expressed in the local basis.
"""

from __future__ import annotations

import math
from typing import List, Tuple

import numpy as np
from scipy import sparse

from src.linops import Vector, from_callbacks
from src.linops.operators import CallbackMap
from src.meg.grid import FACE_AXES, CubedSphereGrid, face_geometry


def _flux_coefficients(grid: CubedSphereGrid) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """q1 = c11·J1 + c12·J2 and q2 = c22·J2 at every voxel (flattened)."""
    eta_t1 = np.sum(grid.a_eta * grid.t1, axis=-1)
    eta_t2 = np.sum(grid.a_eta * grid.t2, axis=-1)
    xi_len = np.linalg.norm(grid.a_xi, axis=-1)
    return eta_t2.reshape(-1), -eta_t1.reshape(-1), xi_len.reshape(-1)


def field_from_fluxes(grid: CubedSphereGrid, q1: np.ndarray, q2: np.ndarray) -> Vector:
    """Channel-major (J1 | J2) field with densitized contravariant fluxes (q1, q2)."""
    sqrt_g = grid.sqrt_g
    j_xi = np.asarray(q1).reshape(sqrt_g.shape) / sqrt_g
    j_eta = np.asarray(q2).reshape(sqrt_g.shape) / sqrt_g
    vectors = j_xi[..., None] * grid.a_xi + j_eta[..., None] * grid.a_eta
    return grid.tangent_components(vectors)


def _ghost_stencils(grid: CubedSphereGrid):
    """Yield (face, i, j, axis, sign, xi, eta) per face edge.

    (i, j) are the edge voxels, (xi, eta) the ghost points just outside the face.
    """
    n, spacing = grid.n_face, grid.spacing
    outside = math.pi / 4 + spacing / 2
    k = np.arange(n)
    for face in range(6):
        for sign in (-1, 1):
            edge = 0 if sign < 0 else n - 1
            yield face, np.full(n, edge), k, 0, sign, np.full(n, sign * outside), grid.coords
            yield face, k, np.full(n, edge), 1, sign, grid.coords, np.full(n, sign * outside)


def _locate(grid: CubedSphereGrid, unit: np.ndarray):
    """Bilinear stencil (indices, weights), each (m, 4), of unit vectors on their home faces."""
    n, spacing = grid.n_face, grid.spacing
    home = np.argmax(unit @ FACE_AXES[:, 0, :].T, axis=1)
    axes = FACE_AXES[home]
    depth = np.sum(unit * axes[:, 0, :], axis=1)
    local = []
    for column in (1, 2):
        coord = np.arctan(np.sum(unit * axes[:, column, :], axis=1) / depth)
        frac = (coord + math.pi / 4) / spacing - 0.5
        low = np.clip(np.floor(frac).astype(np.int64), 0, n - 2)
        local.append((low, frac - low))
    (i0, fi), (j0, fj) = local
    indices = np.stack(
        [
            grid.voxel_index(home, i0, j0),
            grid.voxel_index(home, i0 + 1, j0),
            grid.voxel_index(home, i0, j0 + 1),
            grid.voxel_index(home, i0 + 1, j0 + 1),
        ],
        axis=1,
    )
    weights = np.stack(
        [(1 - fi) * (1 - fj), fi * (1 - fj), (1 - fi) * fj, fi * fj], axis=1
    )
    return indices, weights


def divergence_matrix(grid: CubedSphereGrid) -> sparse.csr_matrix:
    """Sparse (voxels × 2·voxels) matrix of the discrete surface divergence."""
    n, voxels = grid.n_face, grid.voxel_count
    c11, c12, c22 = _flux_coefficients(grid)
    inv_scale = 1.0 / (2.0 * grid.spacing * grid.sqrt_g.reshape(-1))

    rows: List[np.ndarray] = []
    cols: List[np.ndarray] = []
    vals: List[np.ndarray] = []

    def add(row: np.ndarray, col: np.ndarray, value: np.ndarray) -> None:
        rows.append(np.ravel(row))
        cols.append(np.ravel(col))
        vals.append(np.ravel(value))

    grids = np.meshgrid(np.arange(6), np.arange(n), np.arange(n), indexing="ij")
    face, i, j = (a.reshape(-1) for a in grids)
    here = grid.voxel_index(face, i, j)
    for sign in (-1, 1):
        mask = (i + sign >= 0) & (i + sign < n)
        row, nb = here[mask], grid.voxel_index(face[mask], i[mask] + sign, j[mask])
        add(row, nb, sign * inv_scale[row] * c11[nb])
        add(row, voxels + nb, sign * inv_scale[row] * c12[nb])

        mask = (j + sign >= 0) & (j + sign < n)
        row, nb = here[mask], grid.voxel_index(face[mask], i[mask], j[mask] + sign)
        add(row, voxels + nb, sign * inv_scale[row] * c22[nb])

    t1, t2 = grid.flat(grid.t1), grid.flat(grid.t2)
    for g_face, g_i, g_j, axis, sign, xi, eta in _ghost_stencils(grid):
        unit, a_xi, a_eta = face_geometry(np.full(xi.shape, g_face), xi, eta, grid.mid_radius)
        basis = np.stack([a_xi, a_eta], axis=1)  # (m, 2, 3)
        metric = basis @ np.swapaxes(basis, 1, 2)
        sqrt_g = np.linalg.norm(np.cross(a_xi, a_eta), axis=-1)
        # q = √g·G⁻¹·[a_ξ·J, a_η·J]; keep the row for this axis
        projector = sqrt_g[:, None] * np.linalg.solve(metric, basis)[:, axis, :]

        row = grid.voxel_index(g_face, g_i, g_j)
        indices, weights = _locate(grid, unit)
        factor = sign * inv_scale[row][:, None] * weights
        rows4 = np.repeat(row, 4)
        add(rows4, indices, factor * np.einsum("mk,mck->mc", projector, t1[indices]))
        add(rows4, voxels + indices, factor * np.einsum("mk,mck->mc", projector, t2[indices]))

    matrix = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(voxels, 2 * voxels),
    )
    return matrix.tocsr()


def divergence_operator(grid: CubedSphereGrid) -> CallbackMap:
    matrix = divergence_matrix(grid)
    transpose = matrix.T.tocsr()
    return from_callbacks(
        matrix.shape[0], matrix.shape[1],
        lambda field: matrix @ field,
        lambda values: transpose @ values,
        name="surface-divergence",
    )
