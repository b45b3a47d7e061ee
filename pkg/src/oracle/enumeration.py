"""Brute-force reference solutions for tiny instances.

Everything here is deliberately exhaustive and slow; tests compare the
iterative solvers against it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from src.errors import ConfigurationError, OracleDegeneracyError
from src.linops import LinearMap, Vector, as_vector, dense, to_dense
from src.solvers import PenaltyVariant, ProblemSpec, SolverState, check_feasible, kkt_residuals, objective

MAX_TINY_UNKNOWNS = 6
MAX_TINY_PENALTY_ROWS = 8
MAX_BP_UNKNOWNS = 12
MAX_BP_ROWS = 8
SIGN_TOL = 1e-10
KKT_TOL = 1e-9


@dataclass(frozen=True)
class OracleSolution:
    x: Vector
    objective: float
    active_signs: Tuple[int, ...]
    kkt_ok: bool
    w: Optional[Vector] = None
    v: Optional[Vector] = None

    @property
    def state(self) -> SolverState:
        w = self.w if self.w is not None else np.zeros(0)
        v = self.v if self.v is not None else np.zeros(1)
        return SolverState(x=self.x, w=w, v=v)


def _consistent_solve(matrix: np.ndarray, rhs: np.ndarray) -> Optional[np.ndarray]:
    """Least-norm solution, or None when the system is inconsistent."""
    solution, *_ = np.linalg.lstsq(matrix, rhs, rcond=None)
    if np.linalg.norm(matrix @ solution - rhs) > 1e-8 * max(1.0, float(np.linalg.norm(rhs))):
        return None
    return solution


def oracle_solve_tiny(problem: ProblemSpec) -> OracleSolution:
    """Enumerate all sign patterns of Ax and solve each KKT system in closed form.

    For a pattern s, w = λs off the zero set Z and (Ax)_Z = 0; stationarity,
    the zero-set equations and Bx = b form one linear system in (x, w_Z, v).
    The candidate with least objective wins; ties keep the lexicographically
    first pattern.
    """
    if problem.n > MAX_TINY_UNKNOWNS:
        raise ConfigurationError(f"oracle_solve_tiny handles n <= {MAX_TINY_UNKNOWNS}, got {problem.n}")
    if problem.penalty.variant is not PenaltyVariant.SEPARABLE:
        raise ConfigurationError("oracle_solve_tiny supports the separable penalty only")
    if problem.A.rows > MAX_TINY_PENALTY_ROWS:
        raise ConfigurationError(f"oracle_solve_tiny handles A with <= {MAX_TINY_PENALTY_ROWS} rows")

    n, lam = problem.n, problem.lam
    K = to_dense(problem.K)
    A = to_dense(problem.A)
    B = to_dense(problem.B) if problem.has_constraint else np.zeros((0, n))
    b = problem.b if problem.has_constraint else np.zeros(0)
    gram, kty = K.T @ K, K.T @ problem.y
    p = B.shape[0]

    best: Optional[OracleSolution] = None
    for pattern in itertools.product((-1, 0, 1), repeat=A.shape[0]):
        signs = np.array(pattern, dtype=np.float64)
        free = signs == 0
        A_zero = A[free]
        z = A_zero.shape[0]

        system = np.zeros((n + z + p, n + z + p))
        system[:n, :n] = gram
        system[:n, n:n + z] = A_zero.T
        system[:n, n + z:] = -B.T
        system[n:n + z, :n] = A_zero
        system[n + z:, :n] = B
        rhs = np.concatenate([kty - lam * A[~free].T @ signs[~free], np.zeros(z), b])

        solution = _consistent_solve(system, rhs)
        if solution is None:
            continue
        x, w_zero, v = solution[:n], solution[n:n + z], solution[n + z:]

        ax = A @ x
        if np.any(signs[~free] * ax[~free] < -SIGN_TOL):
            continue
        if np.any(np.abs(w_zero) > lam + SIGN_TOL):
            continue

        value = objective(problem, x)
        if best is not None and not value < best.objective - 1e-12:
            continue
        w = lam * signs
        w[free] = w_zero
        v_state = v if problem.has_constraint else np.zeros(1)
        residuals = kkt_residuals(problem, SolverState(x=x, w=w, v=v_state))
        best = OracleSolution(
            x=x, objective=value, active_signs=tuple(int(s) for s in pattern),
            kkt_ok=max(residuals) < KKT_TOL, w=w, v=v_state,
        )

    if best is None:
        raise OracleDegeneracyError("no sign pattern produced a KKT-consistent candidate")
    return best


def oracle_project_l1(z: Sequence[float] | Vector, R: float, iterations: int = 200) -> Vector:
    """ℓ1-ball projection by bisection on the shrinkage threshold t ∈ [0, ‖z‖∞]."""
    if not R >= 0:
        raise ConfigurationError(f"radius must be nonnegative, got {R}")
    z = np.asarray(z, dtype=np.float64)
    magnitudes = np.abs(z)
    if magnitudes.sum() <= R:
        return z.copy()
    low, high = 0.0, float(magnitudes.max())
    for _ in range(iterations):
        t = 0.5 * (low + high)
        if np.maximum(magnitudes - t, 0.0).sum() > R:
            low = t
        else:
            high = t
    t = 0.5 * (low + high)
    return np.sign(z) * np.maximum(magnitudes - t, 0.0)


def oracle_basis_pursuit_tiny(B: LinearMap, b: Sequence[float] | Vector) -> OracleSolution:
    """min ‖x‖₁ s.t. Bx = b by enumerating basic solutions on supports of size ≤ rows."""
    matrix = to_dense(B)
    rows, n = matrix.shape
    if n > MAX_BP_UNKNOWNS or rows > MAX_BP_ROWS:
        raise ConfigurationError(
            f"oracle_basis_pursuit_tiny handles n <= {MAX_BP_UNKNOWNS} and rows <= {MAX_BP_ROWS}"
        )
    b = as_vector(b, "b")
    check_feasible(dense(matrix), b)

    best_x = np.zeros(n)
    best_norm = 0.0 if not np.any(b) else np.inf
    if np.isinf(best_norm):
        for size in range(1, rows + 1):
            for support in itertools.combinations(range(n), size):
                cols = list(support)
                solution = _consistent_solve(matrix[:, cols], b)
                if solution is None:
                    continue
                norm = float(np.abs(solution).sum())
                if norm < best_norm - 1e-12:
                    best_norm = norm
                    best_x = np.zeros(n)
                    best_x[cols] = solution
    if np.isinf(best_norm):
        raise OracleDegeneracyError("no basic feasible solution found")

    signs = np.sign(np.where(np.abs(best_x) > 1e-12, best_x, 0.0))
    return OracleSolution(
        x=best_x,
        objective=best_norm,
        active_signs=tuple(int(s) for s in signs),
        kkt_ok=_bp_certificate(matrix, signs),
    )


def _bp_certificate(matrix: np.ndarray, signs: np.ndarray) -> bool:
    """Look for v with (Bᵀv)_S = sign(x_S) and ‖Bᵀv‖∞ ≤ 1 (LP dual certificate)."""
    support = signs != 0
    if not np.any(support):
        return True
    v = _consistent_solve(matrix[:, support].T, signs[support])
    if v is None:
        return False
    return float(np.abs(matrix.T @ v).max()) <= 1.0 + KKT_TOL
