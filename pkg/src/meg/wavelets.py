"""Separable CDF 4-2 interpolating wavelet transform on each cube face.

One level of the 1-D transform is a lifting pair on a length-L signal:

    d_k -= (-s_{k-1} + 9 s_k + 9 s_{k+1} - s_{k+2}) / 16
    s_k += (d_{k-1} + d_k) / 4

followed by s *= √2, d /= √2, with whole-point symmetric extension at both
ends. Output is laid out Mallat-style (lowpass first). Each level is
materialized as a small L×L matrix; 2-D levels apply it to rows then
columns of the lowpass block, independently per face and channel.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import List

import numpy as np

from src.errors import ConfigurationError
from src.linops import Vector, from_callbacks
from src.linops.operators import CallbackMap

SQRT2 = math.sqrt(2.0)


def _mirror(values: np.ndarray, index: np.ndarray) -> np.ndarray:
    """values[index] with whole-point symmetric extension along the last axis."""
    n = values.shape[-1]
    period = 2 * (n - 1)
    folded = np.mod(index, period)
    folded = np.where(folded >= n, period - folded, folded)
    return values[..., folded]


def lift_forward(x: np.ndarray) -> np.ndarray:
    """One analysis level along the last axis (length even, at least 4)."""
    length = x.shape[-1]
    if length % 2 or length < 4:
        raise ConfigurationError(f"lifting needs an even length >= 4, got {length}")
    half = length // 2
    k = np.arange(half)

    # Extension is defined on the full signal; evens are s, odds are d.
    s = x[..., 0::2].astype(np.float64)
    predict = (
        -_mirror(x, 2 * k - 2)
        + 9 * _mirror(x, 2 * k)
        + 9 * _mirror(x, 2 * k + 2)
        - _mirror(x, 2 * k + 4)
    ) / 16.0
    d = x[..., 1::2] - predict
    d_prev = np.concatenate([d[..., :1], d[..., :-1]], axis=-1)
    s = s + (d_prev + d) / 4.0
    return np.concatenate([SQRT2 * s, d / SQRT2], axis=-1)


def lift_inverse(c: np.ndarray) -> np.ndarray:
    length = c.shape[-1]
    half = length // 2
    s = c[..., :half] / SQRT2
    d = c[..., half:] * SQRT2
    d_prev = np.concatenate([d[..., :1], d[..., :-1]], axis=-1)
    s = s - (d_prev + d) / 4.0

    # s_{-1} = s_1, s_{half} = s_{half-1}, s_{half+1} = s_{half-2}
    padded = np.concatenate([s[..., 1:2], s, s[..., -1:], s[..., -2:-1]], axis=-1)
    predict = (
        -padded[..., :-3] + 9 * padded[..., 1:-2] + 9 * padded[..., 2:-1] - padded[..., 3:]
    ) / 16.0
    x = np.empty(c.shape, dtype=np.float64)
    x[..., 0::2] = s
    x[..., 1::2] = d + predict
    return x


@lru_cache(maxsize=None)
def analysis_matrix(length: int) -> np.ndarray:
    """L×L matrix of one analysis level."""
    matrix = lift_forward(np.eye(length)).T
    matrix.setflags(write=False)
    return matrix


@lru_cache(maxsize=None)
def synthesis_matrix(length: int) -> np.ndarray:
    matrix = lift_inverse(np.eye(length)).T
    matrix.setflags(write=False)
    return matrix


def max_levels(n_face: int) -> int:
    """Deepest decomposition that keeps the coarsest block at least 4 wide."""
    return int(math.log2(n_face)) - 2


class WaveletTransform:
    """Multilevel 2-D transform of a channel-major tangent field on 6 faces.

    Coefficients share the field layout (channel, face, row, column), so
    coefficient i of channel 1 and of channel 2 sit N apart.
    """

    def __init__(self, n_face: int, levels: int | None = None) -> None:
        if n_face < 8 or n_face & (n_face - 1):
            raise ConfigurationError(f"n_face must be dyadic (a power of two >= 8), got {n_face}")
        levels = max_levels(n_face) if levels is None else int(levels)
        if not 1 <= levels <= max_levels(n_face):
            raise ConfigurationError(
                f"wavelet levels must lie in [1, {max_levels(n_face)}] "
                f"for n_face={n_face}, got {levels}"
            )
        self.n_face = n_face
        self.levels = levels
        self.size = 2 * 6 * n_face * n_face

    @property
    def block_sizes(self) -> List[int]:
        """Lowpass block width at each level, finest first."""
        return [self.n_face >> level for level in range(self.levels)]

    def _as_blocks(self, values: np.ndarray) -> np.ndarray:
        n = self.n_face
        return np.array(values, dtype=np.float64).reshape(*values.shape[:-1], 2, 6, n, n)

    @staticmethod
    def _apply(blocks: np.ndarray, length: int, left: np.ndarray, right: np.ndarray) -> None:
        view = blocks[..., :length, :length]
        blocks[..., :length, :length] = left @ view @ right

    def forward(self, field: Vector) -> Vector:
        """Analysis: field → coefficients. Accepts leading batch axes."""
        blocks = self._as_blocks(field)
        for length in self.block_sizes:
            W = analysis_matrix(length)
            self._apply(blocks, length, W, W.T)
        return blocks.reshape(field.shape)

    def inverse(self, coeffs: Vector) -> Vector:
        """Synthesis W⁻¹: coefficients → field."""
        blocks = self._as_blocks(coeffs)
        for length in reversed(self.block_sizes):
            S = synthesis_matrix(length)
            self._apply(blocks, length, S, S.T)
        return blocks.reshape(coeffs.shape)

    def inverse_adjoint(self, field: Vector) -> Vector:
        """(W⁻¹)ᵀ, also for stacks of row vectors such as a dense forward matrix."""
        blocks = self._as_blocks(field)
        for length in self.block_sizes:
            S = synthesis_matrix(length)
            self._apply(blocks, length, S.T, S)
        return blocks.reshape(field.shape)

    def synthesis_map(self) -> CallbackMap:
        return from_callbacks(
            self.size, self.size, self.inverse, self.inverse_adjoint, name="wavelet-synthesis"
        )
