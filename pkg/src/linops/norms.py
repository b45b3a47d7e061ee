"""Power-iteration estimates of squared spectral norms."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from src.errors import DimensionMismatchError, SparseRecoveryError
from src.linops.operators import LinearMap, Vector

logger = logging.getLogger(__name__)

DEFAULT_NORM_TOL = 1e-8
DEFAULT_NORM_MAX_ITER = 5000
# Inflation applied before an estimate feeds a step-size bound.
SAFETY_FACTOR = 1.01


@dataclass(frozen=True)
class NormEstimate:
    value: float
    iterations_used: int
    converged: bool

    @property
    def safe_value(self) -> float:
        return SAFETY_FACTOR * self.value


def _power_iteration(
    normal_apply: Callable[[Vector], Vector],
    dim: int,
    tol: float,
    max_iter: int,
    seed: int,
) -> NormEstimate:
    if tol <= 0:
        raise SparseRecoveryError(f"tol must be positive, got {tol}")
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, size=dim)
    x /= np.linalg.norm(x)

    previous = 0.0
    rayleigh = 0.0
    for iteration in range(1, max_iter + 1):
        z = normal_apply(x)
        rayleigh = float(x @ z)
        z_norm = float(np.linalg.norm(z))
        if z_norm == 0.0:
            return NormEstimate(value=0.0, iterations_used=iteration, converged=True)
        if iteration > 1 and abs(rayleigh - previous) < tol * max(abs(rayleigh), np.finfo(float).tiny):
            return NormEstimate(value=max(rayleigh, 0.0), iterations_used=iteration, converged=True)
        previous = rayleigh
        x = z / z_norm

    logger.warning(
        "Power iteration did not converge in %d iterations (estimate %.6g)", max_iter, rayleigh
    )
    return NormEstimate(value=max(rayleigh, 0.0), iterations_used=max_iter, converged=False)


def estimate_sq_norm(
    op: LinearMap,
    tol: float = DEFAULT_NORM_TOL,
    max_iter: int = DEFAULT_NORM_MAX_ITER,
    seed: int = 0,
) -> NormEstimate:
    """Estimate ‖op‖², the largest eigenvalue of opᵀop."""
    return _power_iteration(lambda x: op.rmatvec(op.matvec(x)), op.cols, tol, max_iter, seed)


def gram_combination_sq_norm(
    K: LinearMap,
    B: Optional[LinearMap],
    c_K: float,
    c_B: float,
    tol: float = DEFAULT_NORM_TOL,
    max_iter: int = DEFAULT_NORM_MAX_ITER,
    seed: int = 0,
) -> NormEstimate:
    """Estimate ‖c_K·KᵀK + c_B·BᵀB‖ for c_K, c_B ≥ 0."""
    if c_K < 0 or c_B < 0:
        raise SparseRecoveryError("Gram combination weights must be nonnegative")
    if B is not None and B.cols != K.cols:
        raise DimensionMismatchError("constraint map domain", K.cols, B.cols)

    def normal_apply(x: Vector) -> Vector:
        out = c_K * K.rmatvec(K.matvec(x)) if c_K else np.zeros(K.cols)
        if B is not None and c_B:
            out = out + c_B * B.rmatvec(B.matvec(x))
        return out

    return _power_iteration(normal_apply, K.cols, tol, max_iter, seed)
