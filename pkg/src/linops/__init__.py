"""Dense vectors, linear maps with adjoints, and spectral-norm estimation."""

from .dense_io import read_dense, read_vector, write_dense
from .norms import (
    SAFETY_FACTOR,
    NormEstimate,
    estimate_sq_norm,
    gram_combination_sq_norm,
)
from .operators import (
    LinearMap,
    MapKind,
    Vector,
    adjoint_apply,
    apply,
    as_vector,
    compose,
    dense,
    forward_difference,
    from_callbacks,
    identity,
    is_identity,
    scale,
    stack,
    to_dense,
    zero,
)

__all__ = [
    # Operators
    "LinearMap",
    "MapKind",
    "Vector",
    "apply",
    "adjoint_apply",
    "as_vector",
    "identity",
    "zero",
    "dense",
    "compose",
    "scale",
    "stack",
    "from_callbacks",
    "forward_difference",
    "to_dense",
    "is_identity",
    # Norms
    "NormEstimate",
    "SAFETY_FACTOR",
    "estimate_sq_norm",
    "gram_combination_sq_norm",
    # Text format
    "read_dense",
    "read_vector",
    "write_dense",
]
