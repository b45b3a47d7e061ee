"""FISTA baseline for the unconstrained problems with A = Id."""

from __future__ import annotations

import math
from typing import Dict, Optional

import numpy as np

from src.config import SolverConfig, get_default_solver_config
from src.errors import ConfigurationError
from src.linops import SAFETY_FACTOR, Vector, estimate_sq_norm, is_identity
from src.solvers.iterations import Callback, Triple, run_iteration
from src.solvers.problem import PenaltyVariant, ProblemSpec, RunReport, SolverState, StepSizes


def fista_step(problem: ProblemSpec, config: SolverConfig) -> float:
    """τ1 when configured, else 1/(1.01·‖KᵀK‖); the accelerated scheme needs τ‖KᵀK‖ ≤ 1."""
    if config.tau1 is not None:
        return config.tau1
    norm = estimate_sq_norm(
        problem.K, tol=config.norm_tol, max_iter=config.norm_max_iter, seed=config.seed
    ).value
    return 1.0 / (SAFETY_FACTOR * norm) if norm > 0 else 1.0


def solve_fista(
    problem: ProblemSpec,
    config: Optional[SolverConfig] = None,
    initial_state: Optional[SolverState] = None,
    callback: Optional[Callback] = None,
) -> RunReport:
    """Accelerated soft-thresholding with the standard momentum rule, no restarts."""
    if problem.has_constraint:
        raise ConfigurationError("solve_fista expects a problem without linear constraints")
    if not is_identity(problem.A):
        raise ConfigurationError("solve_fista requires the penalty map A to be the identity")
    if problem.penalty.variant not in (PenaltyVariant.SEPARABLE, PenaltyVariant.JOINT):
        raise ConfigurationError(f"solve_fista does not support the {problem.penalty.label} penalty")

    config = config or get_default_solver_config()
    tau = fista_step(problem, config)
    steps = StepSizes(tau1=tau, tau2=1.0, tau3=tau, alpha=config.alpha)

    K, y, penalty, lam = problem.K, problem.y, problem.penalty, problem.lam
    momentum: Dict[str, object] = {"z": None, "t": 1.0}

    def update(x: Vector, w: Vector, v: Vector) -> Triple:
        z = momentum["z"] if momentum["z"] is not None else x
        base = z + tau * K.rmatvec(y - K.matvec(z))
        x_new = penalty.prox(base, tau, lam)
        w_new = penalty.prox_conj(base / tau, lam, 1.0 / tau)

        t = float(momentum["t"])
        t_next = (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0
        momentum["z"] = x_new + ((t - 1.0) / t_next) * (x_new - x)
        momentum["t"] = t_next
        return x_new, w_new, np.zeros_like(v)

    return run_iteration(problem, config, steps, update, "fista", initial_state, callback)
