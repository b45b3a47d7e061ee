"""Exception hierarchy shared across the solver library and CLI."""

from __future__ import annotations


class SparseRecoveryError(ValueError):
    """Base class for all library errors."""


class DimensionMismatchError(SparseRecoveryError):
    """Operand sizes do not agree with an operator or problem."""

    def __init__(self, what: str, expected: int, actual: int):
        self.what = what
        self.expected = expected
        self.actual = actual
        super().__init__(f"{what}: expected length {expected}, got {actual}")


class ConfigurationError(SparseRecoveryError):
    """Invalid solver or experiment configuration."""


class InfeasibleProblemError(SparseRecoveryError):
    """The linear constraint system Bx = b has no solution."""


class DivergenceError(SparseRecoveryError):
    """An iterate became non-finite or exceeded the divergence limit."""

    def __init__(self, message: str, iteration: int):
        self.iteration = iteration
        super().__init__(f"{message} (iteration {iteration})")


class ConvergenceConditionError(SparseRecoveryError):
    """The Lyapunov quadratic form is indefinite: step-size conditions are violated."""


class OracleDegeneracyError(SparseRecoveryError):
    """No sign pattern produced a KKT-consistent candidate."""


class BracketError(SparseRecoveryError):
    """The discrepancy target lies outside the achievable residual range."""

    def __init__(self, target: float, low: float, high: float):
        self.target = target
        self.low = low
        self.high = high
        super().__init__(
            f"Target residual {target:.6g} outside achievable range "
            f"[{low:.6g}, {high:.6g}]"
        )


class MatrixFormatError(SparseRecoveryError):
    """A dense text matrix file could not be parsed."""

    def __init__(self, path: str, reason: str):
        self.path = path
        super().__init__(f"{path}: {reason}")
