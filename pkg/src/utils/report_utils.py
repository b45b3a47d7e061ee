"""Writers for run reports, iteration traces and field snapshots."""

import dataclasses
import json
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Union

import numpy as np
import pandas as pd

from src.linops.dense_io import write_dense

PathLike = Union[str, Path]

TRACE_COLUMNS = ["iteration", "objective", "constraint_norm", "kkt_stationarity", "rel_change"]


def to_jsonable(value: Any) -> Any:
    """
    Convert reports into plain JSON values.

    Numpy scalars and arrays become Python numbers and lists, dataclasses
    and enums are unpacked, and non-finite floats become None.
    """
    if isinstance(value, Enum):
        return value.value
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return to_jsonable(dataclasses.asdict(value))
    if isinstance(value, Mapping):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, np.ndarray):
        return [to_jsonable(item) for item in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        number = float(value)
        return number if math.isfinite(number) else None
    if isinstance(value, Path):
        return str(value)
    return value


def dumps_report(data: Any) -> str:
    # float repr is the shortest string that round-trips
    return json.dumps(to_jsonable(data), sort_keys=True, indent=2, allow_nan=False)


def write_json_report(path: PathLike, data: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_report(data) + "\n")
    return path


def trace_frame(rows: Iterable[Dict[str, float]]) -> pd.DataFrame:
    return pd.DataFrame(list(rows), columns=TRACE_COLUMNS)


def write_trace_csv(path: PathLike, rows: Iterable[Dict[str, float]]) -> Path:
    """Write trace rows (as produced by ``RunReport.trace_rows``) to CSV."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    trace_frame(rows).to_csv(path, index=False, float_format="%.17g")
    return path


def write_snapshot(path: PathLike, values: np.ndarray, layout: Dict[str, Any]) -> Path:
    """
    Write a vector in the dense text format plus a ``.layout.json`` sidecar.

    Args:
        path: Target text file
        values: Flat vector
        layout: Description of how the flat index maps to the grid

    Returns:
        Path of the sidecar
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_dense(path, np.asarray(values, dtype=np.float64).reshape(-1))
    sidecar = path.with_suffix(".layout.json")
    write_json_report(sidecar, {"file": path.name, "length": int(np.size(values)), **layout})
    return sidecar


def summary_frame(
    records: List[Dict[str, Any]],
    group_by: str,
    columns: Optional[List[str]] = None,
) -> pd.DataFrame:
    """
    Mean and standard deviation of numeric columns per group.

    Args:
        records: Flat per-run records
        group_by: Column to group on (e.g. the reconstruction case)
        columns: Columns to aggregate; defaults to every numeric column

    Returns:
        Frame indexed by group with ``<column>_mean`` / ``<column>_std`` columns
    """
    frame = pd.DataFrame(records)
    if frame.empty:
        return frame
    if columns is None:
        columns = [
            name for name in frame.select_dtypes(include="number").columns if name != group_by
        ]
    grouped = frame.groupby(group_by)[columns].agg(["mean", "std"])
    grouped.columns = [f"{name}_{stat}" for name, stat in grouped.columns]
    return grouped.reset_index()
