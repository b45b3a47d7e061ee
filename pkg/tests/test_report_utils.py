"""Tests for report, trace and snapshot writers."""

import json
from enum import Enum

import numpy as np
import pandas as pd
import pytest

from src.config import MEGCase
from src.linops import read_vector
from src.solvers import StepSizes
from src.utils.report_utils import (
    TRACE_COLUMNS,
    dumps_report,
    summary_frame,
    to_jsonable,
    write_json_report,
    write_snapshot,
    write_trace_csv,
)


class _Color(Enum):
    RED = "red"


def test_to_jsonable_unpacks_numpy_and_dataclasses():
    """Numpy values, enums and dataclasses become plain JSON values."""
    data = {
        "case": MEGCase.B,
        "color": _Color.RED,
        "steps": StepSizes(0.5, 1.0, 0.5, 1.0),
        "x": np.array([1.0, np.nan]),
        "n": np.int32(4),
        "ok": np.bool_(True),
    }

    converted = to_jsonable(data)

    assert converted == {
        "case": "b",
        "color": "red",
        "steps": {"tau1": 0.5, "tau2": 1.0, "tau3": 0.5, "alpha": 1.0},
        "x": [1.0, None],
        "n": 4,
        "ok": True,
    }


def test_dumps_report_is_sorted_and_round_trips_floats():
    """Test that floats survive a write and read unchanged."""
    value = 0.1 + 0.2
    text = dumps_report({"b": value, "a": float("inf")})

    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": None, "b": value}


def test_write_json_report_creates_parent(tmp_path):
    path = write_json_report(tmp_path / "nested" / "report.json", {"x": [1, 2]})

    assert json.loads(path.read_text()) == {"x": [1, 2]}


def test_write_trace_csv_keeps_column_order_and_precision(tmp_path):
    """Test trace rows are written with every trace column."""
    rows = [
        {"iteration": 1, "objective": 1 / 3, "constraint_norm": 0.0,
         "kkt_stationarity": 2.0, "rel_change": 1.0},
        {"iteration": 11, "objective": 0.25, "constraint_norm": 1e-12,
         "kkt_stationarity": 1e-3, "rel_change": 1e-4},
    ]

    path = write_trace_csv(tmp_path / "trace.csv", rows)
    frame = pd.read_csv(path)

    assert list(frame.columns) == TRACE_COLUMNS
    assert frame["objective"].iloc[0] == 1 / 3
    assert list(frame["iteration"]) == [1, 11]


def test_empty_trace_still_has_header(tmp_path):
    path = write_trace_csv(tmp_path / "trace.csv", [])

    assert path.read_text().strip() == ",".join(TRACE_COLUMNS)


def test_write_snapshot_adds_layout_sidecar(tmp_path):
    """Test snapshot vectors are readable and described by a sidecar."""
    values = np.arange(6, dtype=np.float64) / 7

    sidecar = write_snapshot(tmp_path / "j_rec.txt", values, {"kind": "field", "n_face": 8})

    np.testing.assert_array_equal(read_vector(tmp_path / "j_rec.txt"), values)
    assert sidecar.name == "j_rec.layout.json"
    layout = json.loads(sidecar.read_text())
    assert layout == {"file": "j_rec.txt", "length": 6, "kind": "field", "n_face": 8}


def test_summary_frame_aggregates_per_group():
    """Test mean and std columns per case."""
    records = [
        {"case": "a", "e_rec": 0.2, "nnz": 10},
        {"case": "a", "e_rec": 0.4, "nnz": 14},
        {"case": "b", "e_rec": 0.1, "nnz": 6},
    ]

    summary = summary_frame(records, group_by="case")

    assert list(summary.columns) == ["case", "e_rec_mean", "e_rec_std", "nnz_mean", "nnz_std"]
    row = summary.set_index("case").loc["a"]
    assert row["e_rec_mean"] == pytest.approx(0.3)
    assert row["nnz_std"] == pytest.approx(np.std([10, 14], ddof=1))
    assert np.isnan(summary.set_index("case").loc["b", "e_rec_std"])


def test_summary_frame_of_no_records_is_empty():
    assert summary_frame([], group_by="case").empty
