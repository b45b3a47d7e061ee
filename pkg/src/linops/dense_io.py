"""Plain-text dense matrix format.

First line holds ``rows cols``; each following line holds one row of
whitespace-separated decimal floats. Vectors are stored with ``cols = 1``.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from src.errors import MatrixFormatError


def read_dense(path: Path | str) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise MatrixFormatError(str(path), "file not found")
    lines = [line for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
    if not lines:
        raise MatrixFormatError(str(path), "empty file")

    header = lines[0].split()
    if len(header) != 2:
        raise MatrixFormatError(str(path), "header must be 'rows cols'")
    try:
        rows, cols = int(header[0]), int(header[1])
    except ValueError as exc:
        raise MatrixFormatError(str(path), f"bad header {lines[0]!r}") from exc
    if rows < 1 or cols < 1:
        raise MatrixFormatError(str(path), f"dimensions must be positive, got {rows}x{cols}")
    if len(lines) - 1 != rows:
        raise MatrixFormatError(str(path), f"expected {rows} data rows, found {len(lines) - 1}")

    data = np.empty((rows, cols))
    for i, line in enumerate(lines[1:]):
        fields = line.split()
        if len(fields) != cols:
            raise MatrixFormatError(str(path), f"row {i + 1} has {len(fields)} values, expected {cols}")
        try:
            data[i] = [float(value) for value in fields]
        except ValueError as exc:
            raise MatrixFormatError(str(path), f"row {i + 1}: {exc}") from exc
    if not np.all(np.isfinite(data)):
        raise MatrixFormatError(str(path), "non-finite values")
    return data


def read_vector(path: Path | str) -> np.ndarray:
    data = read_dense(path)
    if data.shape[1] != 1:
        raise MatrixFormatError(str(path), f"vector files need cols = 1, got {data.shape[1]}")
    return data[:, 0]


def write_dense(path: Path | str, array: np.ndarray) -> Path:
    path = Path(path)
    data = np.asarray(array, dtype=np.float64)
    if data.ndim == 1:
        data = data.reshape(-1, 1)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{data.shape[0]} {data.shape[1]}"]
    lines.extend(" ".join(repr(float(value)) for value in row) for row in data)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path
