"""Linear operators with forward and adjoint application.

Every map knows its dimensions and supplies both directions explicitly; the
adjoint is never derived automatically. Operator data is frozen after
construction so maps can be shared read-only across threads.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from src.errors import DimensionMismatchError, SparseRecoveryError

Vector = np.ndarray


class MapKind(str, Enum):
    """Structural kind of a LinearMap."""

    DENSE = "dense-matrix"
    COMPOSITION = "composition"
    SCALED = "scaled"
    STACKED = "stacked"
    ZERO = "zero"
    IDENTITY = "identity"
    CALLBACK = "matrix-free-callback"


def as_vector(values: Sequence[float] | np.ndarray, name: str = "vector") -> Vector:
    """Coerce input to a finite 1-D float64 array."""
    vec = np.asarray(values, dtype=np.float64)
    if vec.ndim == 0:
        vec = vec.reshape(1)
    if vec.ndim != 1:
        raise SparseRecoveryError(f"{name} must be one-dimensional, got shape {vec.shape}")
    if vec.size == 0:
        raise SparseRecoveryError(f"{name} must not be empty")
    if not np.all(np.isfinite(vec)):
        raise SparseRecoveryError(f"{name} contains non-finite entries")
    return vec


class LinearMap(ABC):
    """A linear operator from R^cols to R^rows."""

    kind: MapKind

    def __init__(self, rows: int, cols: int):
        if rows < 1 or cols < 1:
            raise SparseRecoveryError(f"LinearMap dimensions must be positive, got {rows}x{cols}")
        self.rows = int(rows)
        self.cols = int(cols)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def matvec(self, x: Vector) -> Vector:
        if x.shape != (self.cols,):
            raise DimensionMismatchError(f"{self.kind.value} map input", self.cols, x.size)
        return self._forward(x)

    def rmatvec(self, y: Vector) -> Vector:
        if y.shape != (self.rows,):
            raise DimensionMismatchError(f"{self.kind.value} map adjoint input", self.rows, y.size)
        return self._adjoint(y)

    @abstractmethod
    def _forward(self, x: Vector) -> Vector: ...

    @abstractmethod
    def _adjoint(self, y: Vector) -> Vector: ...

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.rows}x{self.cols})"


class DenseMap(LinearMap):
    kind = MapKind.DENSE

    def __init__(self, matrix: np.ndarray):
        data = np.array(matrix, dtype=np.float64, copy=True)
        if data.ndim != 2:
            raise SparseRecoveryError(f"dense map needs a 2-D array, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise SparseRecoveryError("dense map contains non-finite entries")
        super().__init__(*data.shape)
        data.setflags(write=False)
        self.matrix = data

    def _forward(self, x: Vector) -> Vector:
        return self.matrix @ x

    def _adjoint(self, y: Vector) -> Vector:
        return self.matrix.T @ y


class IdentityMap(LinearMap):
    kind = MapKind.IDENTITY

    def __init__(self, n: int):
        super().__init__(n, n)

    def _forward(self, x: Vector) -> Vector:
        return x.copy()

    def _adjoint(self, y: Vector) -> Vector:
        return y.copy()


class ZeroMap(LinearMap):
    kind = MapKind.ZERO

    def _forward(self, x: Vector) -> Vector:
        return np.zeros(self.rows)

    def _adjoint(self, y: Vector) -> Vector:
        return np.zeros(self.cols)


class ScaledMap(LinearMap):
    kind = MapKind.SCALED

    def __init__(self, op: LinearMap, factor: float):
        if not np.isfinite(factor):
            raise SparseRecoveryError("scale factor must be finite")
        super().__init__(op.rows, op.cols)
        self.op = op
        self.factor = float(factor)

    def _forward(self, x: Vector) -> Vector:
        return self.factor * self.op.matvec(x)

    def _adjoint(self, y: Vector) -> Vector:
        return self.factor * self.op.rmatvec(y)


class ComposedMap(LinearMap):
    """outer ∘ inner."""

    kind = MapKind.COMPOSITION

    def __init__(self, outer: LinearMap, inner: LinearMap):
        if outer.cols != inner.rows:
            raise DimensionMismatchError("composition inner range", outer.cols, inner.rows)
        super().__init__(outer.rows, inner.cols)
        self.outer = outer
        self.inner = inner

    def _forward(self, x: Vector) -> Vector:
        return self.outer.matvec(self.inner.matvec(x))

    def _adjoint(self, y: Vector) -> Vector:
        return self.inner.rmatvec(self.outer.rmatvec(y))


class StackedMap(LinearMap):
    """Vertical stack [op_1; op_2; ...] over a shared domain."""

    kind = MapKind.STACKED

    def __init__(self, ops: Sequence[LinearMap]):
        if not ops:
            raise SparseRecoveryError("stack needs at least one operator")
        cols = ops[0].cols
        for op in ops[1:]:
            if op.cols != cols:
                raise DimensionMismatchError("stacked operator domain", cols, op.cols)
        super().__init__(sum(op.rows for op in ops), cols)
        self.ops = tuple(ops)
        self._offsets = np.cumsum([0] + [op.rows for op in ops])

    def _forward(self, x: Vector) -> Vector:
        return np.concatenate([op.matvec(x) for op in self.ops])

    def _adjoint(self, y: Vector) -> Vector:
        out = np.zeros(self.cols)
        for op, start, stop in zip(self.ops, self._offsets[:-1], self._offsets[1:]):
            out += op.rmatvec(y[start:stop])
        return out


class CallbackMap(LinearMap):
    kind = MapKind.CALLBACK

    def __init__(
        self,
        rows: int,
        cols: int,
        forward: Callable[[Vector], Vector],
        adjoint: Callable[[Vector], Vector],
        name: str = "callback",
    ):
        super().__init__(rows, cols)
        self._forward_fn = forward
        self._adjoint_fn = adjoint
        self.name = name

    def _forward(self, x: Vector) -> Vector:
        out = np.asarray(self._forward_fn(x), dtype=np.float64)
        if out.shape != (self.rows,):
            raise DimensionMismatchError(f"{self.name} forward output", self.rows, out.size)
        return out

    def _adjoint(self, y: Vector) -> Vector:
        out = np.asarray(self._adjoint_fn(y), dtype=np.float64)
        if out.shape != (self.cols,):
            raise DimensionMismatchError(f"{self.name} adjoint output", self.cols, out.size)
        return out

    def __repr__(self) -> str:
        return f"CallbackMap[{self.name}]({self.rows}x{self.cols})"


def apply(op: LinearMap, x: Sequence[float] | Vector) -> Vector:
    """Return op·x."""
    return op.matvec(np.asarray(x, dtype=np.float64))


def adjoint_apply(op: LinearMap, y: Sequence[float] | Vector) -> Vector:
    """Return opᵀ·y."""
    return op.rmatvec(np.asarray(y, dtype=np.float64))


def identity(n: int) -> IdentityMap:
    return IdentityMap(n)


def zero(rows: int, cols: int) -> ZeroMap:
    return ZeroMap(rows, cols)


def dense(matrix: np.ndarray | Sequence[Sequence[float]]) -> DenseMap:
    return DenseMap(np.asarray(matrix, dtype=np.float64))


def compose(outer: LinearMap, inner: LinearMap) -> ComposedMap:
    return ComposedMap(outer, inner)


def scale(op: LinearMap, factor: float) -> ScaledMap:
    return ScaledMap(op, factor)


def stack(*ops: LinearMap) -> StackedMap:
    return StackedMap(ops)


def from_callbacks(
    rows: int,
    cols: int,
    forward: Callable[[Vector], Vector],
    adjoint: Callable[[Vector], Vector],
    name: str = "callback",
) -> CallbackMap:
    if forward is None or adjoint is None:
        raise SparseRecoveryError("matrix-free maps need both forward and adjoint callbacks")
    return CallbackMap(rows, cols, forward, adjoint, name=name)


def forward_difference(n: int) -> DenseMap:
    """(n-1)×n first-difference map, the 1-D total-variation penalty operator."""
    if n < 2:
        raise SparseRecoveryError("forward difference needs n >= 2")
    matrix = np.zeros((n - 1, n))
    idx = np.arange(n - 1)
    matrix[idx, idx] = -1.0
    matrix[idx, idx + 1] = 1.0
    return DenseMap(matrix)


def to_dense(op: LinearMap) -> np.ndarray:
    """Materialize op as a dense array, probing through the smaller side."""
    if isinstance(op, DenseMap):
        return np.array(op.matrix)
    if op.rows <= op.cols:
        out = np.empty((op.rows, op.cols))
        unit = np.zeros(op.rows)
        for i in range(op.rows):
            unit[i] = 1.0
            out[i, :] = op.rmatvec(unit)
            unit[i] = 0.0
        return out
    out = np.empty((op.rows, op.cols))
    unit = np.zeros(op.cols)
    for j in range(op.cols):
        unit[j] = 1.0
        out[:, j] = op.matvec(unit)
        unit[j] = 0.0
    return out


def is_identity(op: LinearMap) -> bool:
    return op.kind is MapKind.IDENTITY
