"""Iterative solvers for ℓ1-penalized least squares under linear constraints."""

from .diagnostics import (
    ConvergenceProfile,
    ConvergenceRecorder,
    convergence_profile,
    kkt_residuals,
    lyapunov_value,
    objective,
)
from .fista import fista_step, solve_fista
from .iterations import (
    run_iteration,
    solve_basis_pursuit,
    solve_cista,
    solve_constrained_gist,
    solve_gist,
    solve_ista,
    solve_l1_constrained,
)
from .problem import (
    PenaltyKind,
    PenaltyVariant,
    ProblemSpec,
    RunReport,
    SolverState,
    StepSizes,
    check_feasible,
)
from .steps import StepConditionReport, check_step_conditions, resolve_step_sizes

__all__ = [
    # Problem types
    "PenaltyKind",
    "PenaltyVariant",
    "ProblemSpec",
    "SolverState",
    "StepSizes",
    "RunReport",
    "check_feasible",
    # Step sizes
    "StepConditionReport",
    "check_step_conditions",
    "resolve_step_sizes",
    # Solvers
    "run_iteration",
    "solve_constrained_gist",
    "solve_gist",
    "solve_ista",
    "solve_cista",
    "solve_basis_pursuit",
    "solve_l1_constrained",
    "solve_fista",
    "fista_step",
    # Diagnostics
    "objective",
    "kkt_residuals",
    "lyapunov_value",
    "ConvergenceProfile",
    "ConvergenceRecorder",
    "convergence_profile",
]
