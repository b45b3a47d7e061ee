"""Proximity operators as first-class values and the Moreau complement."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from src.errors import ConfigurationError
from src.prox.operators import (
    as_groups,
    from_groups,
    grouped_joint_threshold,
    project_l1_ball,
    project_linf,
    soft_threshold,
)


@dataclass(frozen=True)
class ProxFn:
    """Proximity operator of a convex function h, scaled by a step.

    ``evaluate(z, step)`` returns prox_{step·h}(z) = argmin_w step·h(w) + ‖w - z‖²/2.
    ``value`` evaluates h itself when known (used for objective reporting).
    """

    descriptor: str
    prox: Callable[[np.ndarray, float], np.ndarray]
    value: Optional[Callable[[np.ndarray], float]] = None

    def evaluate(self, z: np.ndarray, step: float = 1.0) -> np.ndarray:
        if step <= 0:
            raise ConfigurationError(f"prox step must be positive, got {step}")
        return np.asarray(self.prox(np.asarray(z, dtype=np.float64), float(step)))

    __call__ = evaluate


def moreau_complement(p: ProxFn) -> ProxFn:
    """Prox of the convex conjugate: prox_{s·h*}(z) = z - s·prox_{h/s}(z/s).

    At step 1 this is z - p(z).
    """

    def prox(z: np.ndarray, step: float) -> np.ndarray:
        return z - step * p.evaluate(z / step, 1.0 / step)

    return ProxFn(descriptor=f"conjugate({p.descriptor})", prox=prox)


def l1_norm_prox(weight: float = 1.0) -> ProxFn:
    """h = weight·‖·‖₁; prox is soft-thresholding."""
    return ProxFn(
        descriptor=f"l1(weight={weight:g})",
        prox=lambda z, step: soft_threshold(z, step * weight),
        value=lambda z: weight * float(np.abs(z).sum()),
    )


def zero_prox() -> ProxFn:
    """h ≡ 0; prox is the identity."""
    return ProxFn(descriptor="zero", prox=lambda z, step: z.copy(), value=lambda z: 0.0)


def _indicator(inside: Callable[[np.ndarray], bool]) -> Callable[[np.ndarray], float]:
    return lambda z: 0.0 if inside(z) else float("inf")


def l1_ball_indicator_prox(radius: float) -> ProxFn:
    """h = indicator of the ℓ1 ball; prox is the projection for every step."""
    return ProxFn(
        descriptor=f"l1-ball(radius={radius:g})",
        prox=lambda z, step: project_l1_ball(z, radius),
        value=_indicator(lambda z: float(np.abs(z).sum()) <= radius * (1 + 1e-12)),
    )


def linf_ball_indicator_prox(radius: float) -> ProxFn:
    return ProxFn(
        descriptor=f"linf-ball(radius={radius:g})",
        prox=lambda z, step: project_linf(z, radius),
        value=_indicator(lambda z: float(np.abs(z).max(initial=0.0)) <= radius * (1 + 1e-12)),
    )


def joint_max_prox(group_size: int, weight: float = 1.0) -> ProxFn:
    """h = weight·Σ_i max_j |u_ij| over channel-major groups."""

    def prox(z: np.ndarray, step: float) -> np.ndarray:
        return from_groups(grouped_joint_threshold(as_groups(z, group_size), step * weight))

    return ProxFn(
        descriptor=f"joint-max(m={group_size}, weight={weight:g})",
        prox=prox,
        value=lambda z: weight * float(np.abs(as_groups(z, group_size)).max(axis=1).sum()),
    )
