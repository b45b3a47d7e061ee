"""Problem, state and report types shared by every solver."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from src.errors import (
    ConfigurationError,
    DimensionMismatchError,
    InfeasibleProblemError,
    SparseRecoveryError,
)
from src.linops import LinearMap, Vector, as_vector, identity, zero
from src.linops.operators import DenseMap
from src.prox import (
    ProxFn,
    as_groups,
    from_groups,
    grouped_joint_threshold,
    project_l1_ball,
    project_l1_rows,
    project_linf,
    soft_threshold,
)

# Largest B (entries) for which feasibility of Bx = b is verified by least squares.
FEASIBILITY_CHECK_LIMIT = 4_000_000
FEASIBILITY_TOL = 1e-8


class PenaltyVariant(str, Enum):
    SEPARABLE = "separable-l1"
    JOINT = "joint-max-l1"
    GENERIC = "generic-prox"
    L1_BALL = "l1-ball-constraint"


@dataclass(frozen=True)
class PenaltyKind:
    """The penalty H applied to Ax, together with its prox and dual prox.

    ``lam`` is passed in by the caller; the l1-ball variant ignores it and
    acts as the indicator of {u : ‖u‖₁ ≤ radius}.
    """

    variant: PenaltyVariant
    group_size: int = 1
    prox_fn: Optional[ProxFn] = None
    radius: Optional[float] = None

    @classmethod
    def separable(cls) -> "PenaltyKind":
        return cls(PenaltyVariant.SEPARABLE)

    @classmethod
    def joint(cls, group_size: int) -> "PenaltyKind":
        if group_size < 1:
            raise ConfigurationError(f"joint penalty needs group size >= 1, got {group_size}")
        return cls(PenaltyVariant.JOINT, group_size=int(group_size))

    @classmethod
    def generic(cls, prox_fn: ProxFn) -> "PenaltyKind":
        return cls(PenaltyVariant.GENERIC, prox_fn=prox_fn)

    @classmethod
    def l1_ball(cls, radius: float) -> "PenaltyKind":
        if not radius >= 0:
            raise ConfigurationError(f"l1-ball radius must be nonnegative, got {radius}")
        return cls(PenaltyVariant.L1_BALL, radius=float(radius))

    @property
    def label(self) -> str:
        if self.variant is PenaltyVariant.JOINT:
            return f"joint:{self.group_size}"
        if self.variant is PenaltyVariant.GENERIC and self.prox_fn is not None:
            return f"generic:{self.prox_fn.descriptor}"
        if self.variant is PenaltyVariant.L1_BALL:
            return f"l1-ball:{self.radius:g}"
        return "l1"

    def value(self, u: Vector, lam: float) -> float:
        """H(u); the factor 2 of the objective is applied by the caller."""
        if self.variant is PenaltyVariant.SEPARABLE:
            return lam * float(np.abs(u).sum())
        if self.variant is PenaltyVariant.JOINT:
            return lam * float(np.abs(as_groups(u, self.group_size)).max(axis=1).sum())
        if self.variant is PenaltyVariant.GENERIC:
            if self.prox_fn is None or self.prox_fn.value is None:
                return float("nan")
            return lam * self.prox_fn.value(u)
        inside = float(np.abs(u).sum()) <= self.radius * (1 + 1e-9) + 1e-12
        return 0.0 if inside else float("inf")

    def prox(self, z: Vector, step: float, lam: float) -> Vector:
        """prox_{step·H}(z)."""
        if self.variant is PenaltyVariant.SEPARABLE:
            return soft_threshold(z, step * lam)
        if self.variant is PenaltyVariant.JOINT:
            groups = as_groups(z, self.group_size)
            return from_groups(grouped_joint_threshold(groups, step * lam))
        if self.variant is PenaltyVariant.GENERIC:
            if step * lam == 0.0:
                return np.array(z, dtype=np.float64)
            return self.prox_fn.evaluate(z, step * lam)
        return project_l1_ball(z, self.radius)

    def prox_conj(self, u: Vector, lam: float, sigma: float = 1.0) -> Vector:
        """prox_{sigma·H*}(u), the dual update of the predictor-corrector scheme."""
        if self.variant is PenaltyVariant.SEPARABLE:
            return project_linf(u, lam)
        if self.variant is PenaltyVariant.JOINT:
            return from_groups(project_l1_rows(as_groups(u, self.group_size), lam))
        # Moreau: prox_{σH*}(u) = u - σ·prox_{H/σ}(u/σ)
        return u - sigma * self.prox(u / sigma, 1.0 / sigma, lam)

    def dual_bound(self, w: Vector) -> float:
        """Dual-ball gauge of w: ‖w‖∞ (separable) or max row ℓ1 norm (joint)."""
        if self.variant is PenaltyVariant.JOINT:
            return float(np.abs(as_groups(w, self.group_size)).sum(axis=1).max(initial=0.0))
        return float(np.abs(w).max(initial=0.0))


def check_feasible(B: LinearMap, b: Vector) -> None:
    """Reject an inconsistent dense system Bx = b (least-squares residual test)."""
    if not isinstance(B, DenseMap) or B.rows * B.cols > FEASIBILITY_CHECK_LIMIT:
        return
    solution, *_ = np.linalg.lstsq(B.matrix, b, rcond=None)
    residual = float(np.linalg.norm(B.matrix @ solution - b))
    if residual > FEASIBILITY_TOL * max(1.0, float(np.linalg.norm(b))):
        raise InfeasibleProblemError(
            f"Bx = b has no solution (least-squares residual {residual:.3e})"
        )


@dataclass(frozen=True)
class ProblemSpec:
    """min ‖Kx - y‖² + 2·H(Ax) subject to Bx = b, with H = λ·penalty.

    ``A`` defaults to the identity; ``B``/``b`` are both given or both absent.
    """

    K: LinearMap
    y: Vector
    lam: float = 0.0
    A: Optional[LinearMap] = None
    B: Optional[LinearMap] = None
    b: Optional[Vector] = None
    penalty: PenaltyKind = field(default_factory=PenaltyKind.separable)

    def __post_init__(self) -> None:
        n = self.K.cols
        object.__setattr__(self, "y", as_vector(self.y, "y"))
        if self.y.size != self.K.rows:
            raise DimensionMismatchError("data vector y", self.K.rows, self.y.size)
        if not (np.isfinite(self.lam) and self.lam >= 0):
            raise ConfigurationError(f"lambda must be a nonnegative real, got {self.lam}")

        if self.A is None:
            object.__setattr__(self, "A", identity(n))
        elif self.A.cols != n:
            raise DimensionMismatchError("penalty map A domain", n, self.A.cols)

        if self.B is None and self.b is not None:
            raise ConfigurationError("right-hand side b given without a constraint map B")
        if self.B is not None:
            if self.b is None:
                raise ConfigurationError("constraint map B needs a right-hand side b")
            if self.B.cols != n:
                raise DimensionMismatchError("constraint map B domain", n, self.B.cols)
            object.__setattr__(self, "b", as_vector(self.b, "b"))
            if self.b.size != self.B.rows:
                raise DimensionMismatchError("constraint right-hand side b", self.B.rows, self.b.size)

        if self.penalty.variant is PenaltyVariant.JOINT and self.A.rows % self.penalty.group_size:
            raise ConfigurationError(
                f"joint penalty: coefficient length {self.A.rows} not divisible "
                f"by group size {self.penalty.group_size}"
            )
        if self.penalty.variant is PenaltyVariant.GENERIC and self.penalty.prox_fn is None:
            raise ConfigurationError("generic penalty needs a proximity operator")

    @property
    def n(self) -> int:
        return self.K.cols

    @property
    def has_constraint(self) -> bool:
        return self.B is not None

    def constraint_map(self) -> LinearMap:
        """B, or a 1 x n zero map when the problem is unconstrained."""
        return self.B if self.B is not None else zero(1, self.n)

    def constraint_rhs(self) -> Vector:
        return self.b if self.b is not None else np.zeros(1)

    def with_lambda(self, lam: float) -> "ProblemSpec":
        return dataclasses.replace(self, lam=lam)


@dataclass(frozen=True)
class SolverState:
    """Iterates in problem units: x, dual w for the penalty, multiplier v for Bx = b."""

    x: Vector
    w: Vector
    v: Vector
    iteration: int = 0

    @classmethod
    def zeros(cls, problem: ProblemSpec) -> "SolverState":
        return cls(
            x=np.zeros(problem.n),
            w=np.zeros(problem.A.rows),
            v=np.zeros(problem.constraint_map().rows),
        )

    def check_shapes(self, problem: ProblemSpec) -> None:
        expected = (
            ("initial x", problem.n, self.x),
            ("initial w", problem.A.rows, self.w),
            ("initial v", problem.constraint_map().rows, self.v),
        )
        for what, size, vec in expected:
            if np.shape(vec) != (size,):
                raise DimensionMismatchError(what, size, int(np.size(vec)))
            if not np.all(np.isfinite(vec)):
                raise SparseRecoveryError(f"{what} contains non-finite entries")


@dataclass(frozen=True)
class StepSizes:
    tau1: float
    tau2: float
    tau3: float
    alpha: float


@dataclass
class RunReport:
    final_state: SolverState
    objective_trace: List[float]
    constraint_norm_trace: List[float]
    kkt_residuals: Tuple[float, float, float]
    iterations_run: int
    converged: bool
    steps: StepSizes
    solver: str = ""
    final_objective: float = float("nan")
    final_constraint_norm: float = float("nan")
    trace_iterations: List[int] = field(default_factory=list)
    rel_change_trace: List[float] = field(default_factory=list)
    stationarity_trace: List[float] = field(default_factory=list)

    @property
    def x(self) -> Vector:
        return self.final_state.x

    def trace_rows(self) -> List[Dict[str, float]]:
        return [
            {
                "iteration": iteration,
                "objective": objective,
                "constraint_norm": constraint,
                "kkt_stationarity": stationarity,
                "rel_change": change,
            }
            for iteration, objective, constraint, stationarity, change in zip(
                self.trace_iterations,
                self.objective_trace,
                self.constraint_norm_trace,
                self.stationarity_trace,
                self.rel_change_trace,
            )
        ]

    def to_dict(self) -> Dict[str, Any]:
        stationarity, dual_feas, primal_feas = self.kkt_residuals
        return {
            "solver": self.solver,
            "converged": self.converged,
            "iterations_run": self.iterations_run,
            "x": self.final_state.x.tolist(),
            "w": self.final_state.w.tolist(),
            "v": self.final_state.v.tolist(),
            "objective": self.final_objective,
            "constraint_norm": self.final_constraint_norm,
            "kkt_residuals": {
                "stationarity": stationarity,
                "dual_feasibility": dual_feas,
                "primal_feasibility": primal_feas,
            },
            "steps": dataclasses.asdict(self.steps),
        }
