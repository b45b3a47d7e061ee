"""Elementwise and groupwise thresholding and projection operators."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from src.errors import SparseRecoveryError


def _check_nonnegative(value: float, name: str) -> float:
    if not value >= 0:
        raise SparseRecoveryError(f"{name} must be nonnegative, got {value}")
    return float(value)


def soft_threshold(z: np.ndarray | Sequence[float], lam: float) -> np.ndarray:
    """Shrink each component toward zero by lam, zeroing |z| ≤ lam."""
    lam = _check_nonnegative(lam, "lambda")
    z = np.asarray(z, dtype=np.float64)
    return np.sign(z) * np.maximum(np.abs(z) - lam, 0.0)


def project_linf(z: np.ndarray | Sequence[float], lam: float) -> np.ndarray:
    """Clamp each component to [-lam, lam]."""
    lam = _check_nonnegative(lam, "lambda")
    return np.clip(np.asarray(z, dtype=np.float64), -lam, lam)


def _l1_threshold(magnitudes: np.ndarray, radius: float) -> float:
    # Requires sum(magnitudes) > radius > 0.
    order = np.argsort(-magnitudes, kind="stable")
    ranked = magnitudes[order]
    levels = (np.cumsum(ranked) - radius) / np.arange(1, ranked.size + 1)
    rho = np.nonzero(ranked > levels)[0][-1]
    return float(levels[rho])


def project_l1_ball(z: np.ndarray | Sequence[float], radius: float) -> np.ndarray:
    """Euclidean projection onto {u : ‖u‖₁ ≤ radius} by sort-and-threshold."""
    radius = _check_nonnegative(radius, "radius")
    z = np.asarray(z, dtype=np.float64)
    magnitudes = np.abs(z)
    if magnitudes.sum() <= radius:
        return z.copy()
    if radius == 0.0:
        return np.zeros_like(z)
    theta = _l1_threshold(magnitudes, radius)
    return np.sign(z) * np.maximum(magnitudes - theta, 0.0)


def joint_threshold(z_row: np.ndarray | Sequence[float], lam: float) -> np.ndarray:
    """Joint-sparsity thresholding T_lam of one group, the prox of lam·max|z_j|.

    Entries are ranked by magnitude (stable, index tie-break); the top l
    entries share the common magnitude (Σ_{k≤l}|z_k| - lam)/l where l is the
    largest rank satisfying |z_(l)| ≥ (Σ_{k≤l}|z_k| - lam)/l. The rest are kept.
    """
    lam = _check_nonnegative(lam, "lambda")
    z = np.asarray(z_row, dtype=np.float64)
    if z.ndim != 1 or z.size == 0:
        raise SparseRecoveryError("joint_threshold expects a non-empty 1-D row")
    magnitudes = np.abs(z)
    if magnitudes.sum() <= lam:
        return np.zeros_like(z)

    order = np.argsort(-magnitudes, kind="stable")
    ranked = magnitudes[order]
    levels = (np.cumsum(ranked) - lam) / np.arange(1, z.size + 1)
    last = np.nonzero(ranked >= levels)[0][-1]

    out = z.copy()
    top = order[: last + 1]
    out[top] = np.sign(z[top]) * levels[last]
    return out


def _as_group_matrix(u: np.ndarray | Sequence[Sequence[float]]) -> np.ndarray:
    try:
        groups = np.asarray(u, dtype=np.float64)
    except ValueError as exc:
        raise SparseRecoveryError("grouped vector has ragged rows") from exc
    if groups.ndim != 2 or groups.shape[1] == 0:
        raise SparseRecoveryError(f"grouped vector must be N x m, got shape {groups.shape}")
    if not np.all(np.isfinite(groups)):
        raise SparseRecoveryError("grouped vector contains non-finite entries")
    return groups


def _row_thresholds(magnitudes: np.ndarray, radius: float) -> np.ndarray:
    """Per-row ℓ1-ball threshold θ; only meaningful for rows with ‖row‖₁ > radius."""
    ranked = -np.sort(-magnitudes, axis=1)
    levels = (np.cumsum(ranked, axis=1) - radius) / np.arange(1, ranked.shape[1] + 1)
    satisfied = ranked >= levels
    last = ranked.shape[1] - 1 - np.argmax(satisfied[:, ::-1], axis=1)
    return levels[np.arange(ranked.shape[0]), last]


def grouped_joint_threshold(
    u: np.ndarray | Sequence[Sequence[float]], lam: float
) -> np.ndarray:
    """Apply joint_threshold to each row of an N x m grouped vector."""
    lam = _check_nonnegative(lam, "lambda")
    groups = _as_group_matrix(u)
    magnitudes = np.abs(groups)
    theta = _row_thresholds(magnitudes, lam)[:, None]
    out = np.where(magnitudes > theta, np.sign(groups) * theta, groups)
    out[magnitudes.sum(axis=1) <= lam] = 0.0
    return out


def project_l1_rows(u: np.ndarray | Sequence[Sequence[float]], radius: float) -> np.ndarray:
    """Project each row of an N x m grouped vector onto the ℓ1 ball of the given radius."""
    radius = _check_nonnegative(radius, "radius")
    groups = _as_group_matrix(u)
    magnitudes = np.abs(groups)
    inside = magnitudes.sum(axis=1) <= radius
    if radius == 0.0:
        out = np.zeros_like(groups)
        out[inside] = groups[inside]
        return out
    theta = _row_thresholds(magnitudes, radius)[:, None]
    out = np.sign(groups) * np.maximum(magnitudes - theta, 0.0)
    out[inside] = groups[inside]
    return out


def as_groups(u: np.ndarray, group_size: int) -> np.ndarray:
    """View a channel-major vector of length N·m as an N x m array (copy)."""
    u = np.asarray(u, dtype=np.float64)
    if group_size < 1 or u.size % group_size:
        raise SparseRecoveryError(
            f"vector length {u.size} is not divisible by group size {group_size}"
        )
    return u.reshape(group_size, -1).T.copy()


def from_groups(groups: np.ndarray) -> np.ndarray:
    """Inverse of as_groups."""
    return np.asarray(groups, dtype=np.float64).T.reshape(-1).copy()
