"""Logging and report-writing helpers."""

from .logger import JsonFormatter, setup_run_logger
from .report_utils import (
    dumps_report,
    summary_frame,
    to_jsonable,
    trace_frame,
    write_json_report,
    write_snapshot,
    write_trace_csv,
)

__all__ = [
    # Logging
    "setup_run_logger",
    "JsonFormatter",
    # Reports
    "to_jsonable",
    "dumps_report",
    "write_json_report",
    "trace_frame",
    "write_trace_csv",
    "write_snapshot",
    "summary_frame",
]
