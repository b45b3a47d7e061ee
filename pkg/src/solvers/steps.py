"""Step-size selection and validation for the rescaled iteration.

Convergence needs ‖τ1/2·KᵀK + τ3·BᵀB‖ < 1, τ2·‖AAᵀ‖ < 1 and α > 1/2.
Norms come from power iteration and are inflated by SAFETY_FACTOR before
any comparison. When A is the identity, τ2 = 1 is admitted: the dual
variable is then eliminated and the scheme reduces to plain shrinkage.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from src.config import SolverConfig
from src.errors import ConfigurationError
from src.linops import SAFETY_FACTOR, estimate_sq_norm, gram_combination_sq_norm, is_identity
from src.solvers.problem import ProblemSpec, StepSizes


@dataclass(frozen=True)
class StepConditionReport:
    """Estimated norms and the step-size inequalities evaluated on them."""

    gram_norm: float  # ‖½KᵀK + BᵀB‖
    penalty_norm: float  # ‖AAᵀ‖
    gram_product: float  # ‖τ1/2·KᵀK + τ3·BᵀB‖
    penalty_product: float  # τ2·‖AAᵀ‖
    alpha: float
    steps: StepSizes
    suggested: StepSizes
    penalty_is_identity: bool = False

    @property
    def gram_ok(self) -> bool:
        return self.gram_product < 1.0

    @property
    def penalty_ok(self) -> bool:
        if self.penalty_is_identity:
            return self.penalty_product <= 1.0
        return self.penalty_product < 1.0

    @property
    def alpha_ok(self) -> bool:
        return self.alpha > 0.5

    @property
    def ok(self) -> bool:
        return self.gram_ok and self.penalty_ok and self.alpha_ok

    def describe(self) -> str:
        lines = [
            f"||K^T K/2 + B^T B||     = {self.gram_norm:.6g}",
            f"||A A^T||               = {self.penalty_norm:.6g}",
            f"||tau1 K^T K/2 + tau3 B^T B|| = {self.gram_product:.6g} "
            f"({'ok' if self.gram_ok else 'VIOLATED: must be < 1'})",
            f"tau2 ||A A^T||          = {self.penalty_product:.6g} "
            f"({'ok' if self.penalty_ok else 'VIOLATED: must be < 1'})",
            f"alpha                   = {self.alpha:.6g} "
            f"({'ok' if self.alpha_ok else 'VIOLATED: must be > 1/2'})",
        ]
        if not self.ok:
            s = self.suggested
            lines.append(
                f"suggested: tau1 = {s.tau1:.6g}, tau2 = {s.tau2:.6g}, tau3 = {s.tau3:.6g}"
            )
        return "\n".join(lines)


def _auto_step(norm: float, margin: float) -> float:
    return margin / (SAFETY_FACTOR * norm) if norm > 0 else 1.0


def check_step_conditions(
    problem: ProblemSpec,
    config: SolverConfig,
    steps: Optional[StepSizes] = None,
) -> StepConditionReport:
    """Estimate the norms and evaluate the conditions for ``steps``.

    Without explicit ``steps`` the configured τ's are used, falling back to
    the auto-scaled ones for any left unset.
    """
    B = problem.constraint_map() if problem.has_constraint else None
    norm_kwargs = dict(tol=config.norm_tol, max_iter=config.norm_max_iter, seed=config.seed)

    gram_norm = gram_combination_sq_norm(problem.K, B, 0.5, 1.0, **norm_kwargs).value
    identity_penalty = is_identity(problem.A)
    penalty_norm = 1.0 if identity_penalty else estimate_sq_norm(problem.A, **norm_kwargs).value

    auto_tau = _auto_step(gram_norm, config.safety_margin)
    suggested = StepSizes(
        tau1=auto_tau,
        tau2=1.0 if identity_penalty else _auto_step(penalty_norm, config.safety_margin),
        tau3=auto_tau,
        alpha=config.alpha,
    )
    if steps is None:
        steps = StepSizes(
            tau1=config.tau1 if config.tau1 is not None else suggested.tau1,
            tau2=config.tau2 if config.tau2 is not None else suggested.tau2,
            tau3=config.tau3 if config.tau3 is not None else suggested.tau3,
            alpha=config.alpha,
        )

    if steps.tau1 == steps.tau3 == suggested.tau1:
        gram_product = steps.tau1 * gram_norm
    else:
        gram_product = gram_combination_sq_norm(
            problem.K, B, steps.tau1 / 2, steps.tau3, **norm_kwargs
        ).value
    penalty_product = steps.tau2 * penalty_norm
    if not identity_penalty:
        penalty_product *= SAFETY_FACTOR

    return StepConditionReport(
        gram_norm=gram_norm,
        penalty_norm=penalty_norm,
        gram_product=SAFETY_FACTOR * gram_product,
        penalty_product=penalty_product,
        alpha=steps.alpha,
        steps=steps,
        suggested=suggested,
        penalty_is_identity=identity_penalty,
    )


def resolve_step_sizes(problem: ProblemSpec, config: SolverConfig) -> StepSizes:
    """Auto-scale missing step sizes and reject user-supplied ones that violate the conditions."""
    if not config.alpha > 0.5:
        raise ConfigurationError(f"alpha must exceed 1/2, got {config.alpha}")
    report = check_step_conditions(problem, config)
    if not report.ok:
        raise ConfigurationError("step-size conditions violated:\n" + report.describe())
    return report.steps
