"""The predictor-corrector scheme and its special cases.

All solvers share one driver. Internally the Lagrange multiplier is carried
in the rescaled units of the iteration; states handed out (reports,
callbacks, warm starts) hold it in problem units, v = (τ3/τ1)·v_internal, so
that Kᵀ(Kx - y) + Aᵀw - Bᵀv = 0 at a solution.
"""

from __future__ import annotations

import logging
from typing import Callable, List, Optional, Tuple

import numpy as np

from src.config import SolverConfig, get_default_solver_config
from src.errors import ConfigurationError, DivergenceError
from src.linops import LinearMap, Vector, as_vector, is_identity, zero
from src.solvers.diagnostics import kkt_residuals, objective
from src.solvers.problem import (
    PenaltyKind,
    ProblemSpec,
    RunReport,
    SolverState,
    StepSizes,
    check_feasible,
)
from src.solvers.steps import resolve_step_sizes

logger = logging.getLogger(__name__)

Triple = Tuple[Vector, Vector, Vector]
UpdateFn = Callable[[Vector, Vector, Vector], Triple]
Callback = Callable[[SolverState], None]


def _rel_change(new: Vector, old: Vector) -> float:
    return float(np.linalg.norm(new - old)) / max(float(np.linalg.norm(new)), 1.0)


def _guard(iteration: int, limit: float, *vectors: Vector) -> None:
    for vec in vectors:
        if not np.all(np.isfinite(vec)):
            raise DivergenceError("non-finite iterate", iteration)
        if float(np.linalg.norm(vec)) > limit:
            raise DivergenceError(f"iterate norm exceeded {limit:.3g}", iteration)


def run_iteration(
    problem: ProblemSpec,
    config: SolverConfig,
    steps: StepSizes,
    update: UpdateFn,
    solver: str,
    initial_state: Optional[SolverState] = None,
    callback: Optional[Callback] = None,
    v_scale: float = 1.0,
) -> RunReport:
    """Drive ``update`` until the relative change drops below rel_tol or max_iter is hit.

    ``update`` maps (x, w, v_internal) to the next triple; ``v_scale`` converts
    the internal multiplier to problem units.
    """
    start = initial_state or SolverState.zeros(problem)
    start.check_shapes(problem)
    x = np.array(start.x, dtype=np.float64)
    w = np.array(start.w, dtype=np.float64)
    v_problem = np.array(start.v, dtype=np.float64)
    v = v_problem / v_scale

    B, b = problem.constraint_map(), problem.constraint_rhs()
    logger.info(
        "%s start: n=%d, data=%d, constraints=%d, lambda=%.6g",
        solver, problem.n, problem.K.rows, B.rows if problem.has_constraint else 0, problem.lam,
        extra={"data": {"solver": solver, "steps": vars(steps), "penalty": problem.penalty.label}},
    )

    trace_iterations: List[int] = []
    objectives: List[float] = []
    constraint_norms: List[float] = []
    stationarity: List[float] = []
    rel_changes: List[float] = []

    converged = False
    iteration = 0
    for iteration in range(1, config.max_iter + 1):
        x_new, w_new, v_new = update(x, w, v)
        v_problem_new = v_scale * v_new
        _guard(iteration, config.divergence_limit, x_new, w_new, v_problem_new)

        change = max(
            _rel_change(x_new, x),
            _rel_change(w_new, w),
            _rel_change(v_problem_new, v_problem),
        )
        x, w, v, v_problem = x_new, w_new, v_new, v_problem_new

        if (iteration - 1) % config.trace_every == 0 or callback is not None:
            state = SolverState(x=x.copy(), w=w.copy(), v=v_problem.copy(), iteration=iteration)
            if (iteration - 1) % config.trace_every == 0:
                trace_iterations.append(iteration)
                objectives.append(objective(problem, x))
                constraint_norms.append(float(np.linalg.norm(B.matvec(x) - b)))
                stationarity.append(kkt_residuals(problem, state)[0])
                rel_changes.append(change)
                logger.debug(
                    "%s iteration %d: objective=%.10g constraint=%.3e change=%.3e",
                    solver, iteration, objectives[-1], constraint_norms[-1], change,
                )
            if callback is not None:
                callback(state)

        if change < config.rel_tol:
            converged = True
            break

    final = SolverState(x=x, w=w, v=v_problem, iteration=iteration)
    residuals = kkt_residuals(problem, final)
    report = RunReport(
        final_state=final,
        objective_trace=objectives,
        constraint_norm_trace=constraint_norms,
        kkt_residuals=residuals,
        iterations_run=iteration,
        converged=converged,
        steps=steps,
        solver=solver,
        final_objective=objective(problem, x),
        final_constraint_norm=residuals[2],
        trace_iterations=trace_iterations,
        rel_change_trace=rel_changes,
        stationarity_trace=stationarity,
    )
    logger.info(
        "%s stop: iterations=%d converged=%s stationarity=%.3e constraint=%.3e",
        solver, iteration, converged, residuals[0], residuals[2],
        extra={"data": {"solver": solver, "iterations": iteration, "converged": converged,
                        "kkt_residuals": list(residuals)}},
    )
    return report


def _shared_base(problem: ProblemSpec, steps: StepSizes) -> Callable[[Vector, Vector], Vector]:
    """Return (x, v) ↦ x + τ1Kᵀ(y - Kx) + τ3Bᵀv̄ with the predictor v̄ = v - (Bx - b)."""
    K, y = problem.K, problem.y
    B, b = problem.constraint_map(), problem.constraint_rhs()

    def base(x: Vector, v: Vector) -> Vector:
        v_bar = v - (B.matvec(x) - b)
        return x + steps.tau1 * K.rmatvec(y - K.matvec(x)) + steps.tau3 * B.rmatvec(v_bar)

    return base


def _predictor_corrector(problem: ProblemSpec, steps: StepSizes) -> UpdateFn:
    A, penalty, lam = problem.A, problem.penalty, problem.lam
    B, b = problem.constraint_map(), problem.constraint_rhs()
    sigma = steps.tau2 / steps.tau1
    base_of = _shared_base(problem, steps)

    def update(x: Vector, w: Vector, v: Vector) -> Triple:
        base = base_of(x, v)
        x_bar = base - steps.tau1 * A.rmatvec(w)
        w_new = penalty.prox_conj(w + sigma * A.matvec(x_bar), lam, sigma)
        x_new = base - steps.tau1 * A.rmatvec(w_new)
        v_new = v - (B.matvec(x_new) - b) / steps.alpha
        return x_new, w_new, v_new

    return update


def _shrinkage(problem: ProblemSpec, steps: StepSizes) -> UpdateFn:
    """A = Id: x⁺ = prox_{τ1H}(base), the dual eliminated as prox_{H*/τ1}(base/τ1)."""
    penalty, lam = problem.penalty, problem.lam
    B, b = problem.constraint_map(), problem.constraint_rhs()
    base_of = _shared_base(problem, steps)

    def update(x: Vector, w: Vector, v: Vector) -> Triple:
        base = base_of(x, v)
        x_new = penalty.prox(base, steps.tau1, lam)
        w_new = penalty.prox_conj(base / steps.tau1, lam, 1.0 / steps.tau1)
        v_new = v - (B.matvec(x_new) - b) / steps.alpha
        return x_new, w_new, v_new

    return update


def _prepare(problem: ProblemSpec, config: Optional[SolverConfig]) -> Tuple[SolverConfig, StepSizes]:
    config = config or get_default_solver_config()
    if problem.has_constraint:
        check_feasible(problem.B, problem.b)
    return config, resolve_step_sizes(problem, config)


def _require_identity_penalty(problem: ProblemSpec, solver: str) -> None:
    if not is_identity(problem.A):
        raise ConfigurationError(f"{solver} requires the penalty map A to be the identity")


def solve_constrained_gist(
    problem: ProblemSpec,
    config: Optional[SolverConfig] = None,
    initial_state: Optional[SolverState] = None,
    callback: Optional[Callback] = None,
) -> RunReport:
    """General scheme: ‖Kx - y‖² + 2H(Ax) subject to Bx = b."""
    config, steps = _prepare(problem, config)
    return run_iteration(
        problem, config, steps, _predictor_corrector(problem, steps), "constrained-gist",
        initial_state, callback, v_scale=steps.tau3 / steps.tau1,
    )


def solve_gist(
    problem: ProblemSpec,
    config: Optional[SolverConfig] = None,
    initial_state: Optional[SolverState] = None,
    callback: Optional[Callback] = None,
) -> RunReport:
    """Generalized iterative soft-thresholding: the unconstrained case B = 0."""
    if problem.has_constraint:
        raise ConfigurationError("solve_gist expects a problem without linear constraints")
    config, steps = _prepare(problem, config)
    return run_iteration(
        problem, config, steps, _predictor_corrector(problem, steps), "gist",
        initial_state, callback, v_scale=steps.tau3 / steps.tau1,
    )


def solve_ista(
    problem: ProblemSpec,
    config: Optional[SolverConfig] = None,
    initial_state: Optional[SolverState] = None,
    callback: Optional[Callback] = None,
) -> RunReport:
    """x⁺ = S_{τ1λ}(x + τ1Kᵀ(y - Kx))."""
    if problem.has_constraint:
        raise ConfigurationError("solve_ista expects a problem without linear constraints")
    _require_identity_penalty(problem, "solve_ista")
    config, steps = _prepare(problem, config)
    return run_iteration(
        problem, config, steps, _shrinkage(problem, steps), "ista",
        initial_state, callback, v_scale=steps.tau3 / steps.tau1,
    )


def solve_cista(
    problem: ProblemSpec,
    config: Optional[SolverConfig] = None,
    initial_state: Optional[SolverState] = None,
    callback: Optional[Callback] = None,
) -> RunReport:
    """Constrained soft-thresholding (T_λ for the joint penalty)."""
    if not problem.has_constraint:
        raise ConfigurationError("solve_cista expects a constraint map B and right-hand side b")
    _require_identity_penalty(problem, "solve_cista")
    config, steps = _prepare(problem, config)
    return run_iteration(
        problem, config, steps, _shrinkage(problem, steps), "cista",
        initial_state, callback, v_scale=steps.tau3 / steps.tau1,
    )


def solve_basis_pursuit(
    B: LinearMap,
    b: Vector,
    config: Optional[SolverConfig] = None,
    lam: float = 1.0,
    initial_state: Optional[SolverState] = None,
    callback: Optional[Callback] = None,
) -> RunReport:
    """min ‖x‖₁ subject to Bx = b.

    ``lam`` is an internal thresholding scale. It does not change the limit
    when the ℓ1 minimizer is unique; among non-unique minimizers no
    particular one is promised.
    """
    if not lam > 0:
        raise ConfigurationError(f"basis pursuit needs a positive internal lambda, got {lam}")
    b = as_vector(b, "b")
    problem = ProblemSpec(K=zero(1, B.cols), y=np.zeros(1), lam=lam, B=B, b=b)
    config, steps = _prepare(problem, config)
    return run_iteration(
        problem, config, steps, _shrinkage(problem, steps), "basis-pursuit",
        initial_state, callback, v_scale=steps.tau3 / steps.tau1,
    )


def solve_l1_constrained(
    K: LinearMap,
    y: Vector,
    B: Optional[LinearMap],
    b: Optional[Vector],
    R: float,
    config: Optional[SolverConfig] = None,
    initial_state: Optional[SolverState] = None,
    callback: Optional[Callback] = None,
) -> RunReport:
    """min ‖Kx - y‖² subject to Bx = b and ‖x‖₁ ≤ R (projection Q_R replaces S_λ)."""
    problem = ProblemSpec(K=K, y=y, B=B, b=b, penalty=PenaltyKind.l1_ball(R))
    config, steps = _prepare(problem, config)
    return run_iteration(
        problem, config, steps, _shrinkage(problem, steps), "l1-constrained",
        initial_state, callback, v_scale=steps.tau3 / steps.tau1,
    )
