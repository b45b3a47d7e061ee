"""Objective, KKT residuals, the Lyapunov monitor and convergence profiles."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.errors import ConvergenceConditionError
from src.linops import Vector
from src.solvers.problem import ProblemSpec, SolverState, StepSizes

# Negative Lyapunov values beyond this slack mean an indefinite form.
LYAPUNOV_SLACK = 1e-10


def objective(problem: ProblemSpec, x: Vector) -> float:
    """‖Kx - y‖² + 2·H(Ax)."""
    residual = problem.K.matvec(x) - problem.y
    return float(residual @ residual) + 2.0 * problem.penalty.value(problem.A.matvec(x), problem.lam)


def kkt_residuals(problem: ProblemSpec, state: SolverState) -> Tuple[float, float, float]:
    """(stationarity, dual feasibility, primal feasibility); all vanish at a solution."""
    K, A = problem.K, problem.A
    B, b = problem.constraint_map(), problem.constraint_rhs()
    x, w, v = state.x, state.w, state.v

    stationarity = K.rmatvec(K.matvec(x) - problem.y) + A.rmatvec(w) - B.rmatvec(v)
    ax = A.matvec(x)
    dual = w - problem.penalty.prox_conj(w + ax, problem.lam, 1.0)
    primal = B.matvec(x) - b
    return (
        float(np.linalg.norm(stationarity)),
        float(np.linalg.norm(dual)),
        float(np.linalg.norm(primal)),
    )


def lyapunov_value(
    problem: ProblemSpec,
    ref: SolverState,
    state: SolverState,
    alpha: float,
    steps: StepSizes,
) -> float:
    """Weighted squared distance of ``state`` to ``ref`` that cannot increase along iterates.

    In problem units this is
    ‖d_x‖² - τ3‖B d_x‖² + (τ1²/τ2)(‖d_w‖² - τ2‖Aᵀd_w‖²) + α(τ1²/τ3)‖d_v‖².
    ``steps`` must be the ones the run used, e.g. ``RunReport.steps``.
    """
    tau1, tau2, tau3 = steps.tau1, steps.tau2, steps.tau3
    B = problem.constraint_map()
    dx = ref.x - state.x
    dw = ref.w - state.w
    dv = ref.v - state.v

    bdx = B.matvec(dx)
    atdw = problem.A.rmatvec(dw)
    value = (
        float(dx @ dx) - tau3 * float(bdx @ bdx)
        + (tau1 * tau1 / tau2) * (float(dw @ dw) - tau2 * float(atdw @ atdw))
        + alpha * (tau1 * tau1 / tau3) * float(dv @ dv)
    )
    if value < -LYAPUNOV_SLACK:
        raise ConvergenceConditionError(
            f"Lyapunov form is indefinite (value {value:.3e}); step-size conditions are violated"
        )
    return value


@dataclass(frozen=True)
class ConvergenceProfile:
    """Relative distance to a fixed point, and functional gap to its value, per iteration."""

    iterations: np.ndarray
    rel_distance: np.ndarray
    functional_gap: np.ndarray

    def iterations_to(self, threshold: float) -> Optional[int]:
        """First iteration from which the relative distance stays below ``threshold``."""
        above = np.nonzero(self.rel_distance >= threshold)[0]
        if above.size == 0:
            return int(self.iterations[0]) if self.iterations.size else None
        if above[-1] + 1 >= self.iterations.size:
            return None
        return int(self.iterations[above[-1] + 1])


def convergence_profile(
    problem: ProblemSpec,
    iterates: Sequence[Vector],
    limit: Vector,
    iterations: Optional[Sequence[int]] = None,
) -> ConvergenceProfile:
    """Profile ``iterates`` against ``limit``; functional gaps may be negative for constrained runs."""
    limit_norm = max(float(np.linalg.norm(limit)), np.finfo(float).tiny)
    limit_value = objective(problem, limit)
    distances = np.array([np.linalg.norm(x - limit) / limit_norm for x in iterates])
    gaps = np.array([objective(problem, x) - limit_value for x in iterates])
    steps = np.arange(1, len(iterates) + 1) if iterations is None else np.asarray(iterations)
    return ConvergenceProfile(iterations=steps, rel_distance=distances, functional_gap=gaps)


class ConvergenceRecorder:
    """Solver callback that profiles iterates against a known limit without storing them."""

    def __init__(self, problem: ProblemSpec, limit: Vector) -> None:
        self._problem = problem
        self._limit = np.asarray(limit, dtype=np.float64)
        self._limit_norm = max(float(np.linalg.norm(self._limit)), np.finfo(float).tiny)
        self._limit_value = objective(problem, self._limit)
        self._iterations: List[int] = []
        self._distances: List[float] = []
        self._gaps: List[float] = []

    def __call__(self, state: SolverState) -> None:
        self._iterations.append(state.iteration)
        self._distances.append(float(np.linalg.norm(state.x - self._limit)) / self._limit_norm)
        self._gaps.append(objective(self._problem, state.x) - self._limit_value)

    def profile(self) -> ConvergenceProfile:
        return ConvergenceProfile(
            iterations=np.asarray(self._iterations, dtype=np.int64),
            rel_distance=np.asarray(self._distances),
            functional_gap=np.asarray(self._gaps),
        )
