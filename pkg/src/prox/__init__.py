"""Thresholding, projections and proximity operators."""

from .operators import (
    as_groups,
    from_groups,
    grouped_joint_threshold,
    joint_threshold,
    project_l1_ball,
    project_l1_rows,
    project_linf,
    soft_threshold,
)
from .proxfn import (
    ProxFn,
    joint_max_prox,
    l1_ball_indicator_prox,
    l1_norm_prox,
    linf_ball_indicator_prox,
    moreau_complement,
    zero_prox,
)

__all__ = [
    "soft_threshold",
    "project_linf",
    "project_l1_ball",
    "project_l1_rows",
    "joint_threshold",
    "grouped_joint_threshold",
    "as_groups",
    "from_groups",
    "ProxFn",
    "moreau_complement",
    "l1_norm_prox",
    "zero_prox",
    "l1_ball_indicator_prox",
    "linf_ball_indicator_prox",
    "joint_max_prox",
]
