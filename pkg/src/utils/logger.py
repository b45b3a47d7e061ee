"""Structured logging for solver and experiment runs."""

import json
import logging
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional, Union

from src.utils.report_utils import to_jsonable

RUN_LOG_FILE = "sparserec_run.log"


class JsonFormatter(logging.Formatter):
    """Custom formatter that outputs logs as JSON."""

    def format(self, record: logging.LogRecord) -> str:
        """
        Format log record as JSON.

        Args:
            record: Log record to format

        Returns:
            JSON string with timestamp, level, component, event, and optional data
        """
        log_data = {
            "timestamp": self.formatTime(record, datefmt="%Y-%m-%dT%H:%M:%S"),
            "level": record.levelname,
            "component": record.name,
            "event": record.getMessage(),
        }

        # Solver start/stop records carry step sizes and residuals here
        if hasattr(record, "data"):
            log_data["data"] = to_jsonable(record.data)

        return json.dumps(log_data, sort_keys=True)


def setup_run_logger(
    name: str = "src",
    log_dir: Optional[Union[str, Path]] = "logs",
    level: int = logging.DEBUG,
) -> logging.Logger:
    """
    Attach a rotating JSON-lines file handler to ``name``.

    Creates ``log_dir`` if it doesn't exist (10MB files, keep 5). Calling it
    again for the same logger does not add a second handler.

    Args:
        name: Logger name; the default covers every package module
        log_dir: Directory for the log file, or None to skip file logging
        level: Level of the file handler

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    if logger.level == logging.NOTSET or logger.level > level:
        logger.setLevel(level)
    if log_dir is None:
        return logger

    log_path = Path(log_dir) / RUN_LOG_FILE
    for handler in logger.handlers:
        if not isinstance(handler, RotatingFileHandler):
            continue
        if Path(handler.baseFilename) == log_path.resolve():
            return logger

    log_path.parent.mkdir(parents=True, exist_ok=True)
    handler = RotatingFileHandler(log_path, maxBytes=10_000_000, backupCount=5)
    handler.setLevel(level)
    handler.setFormatter(JsonFormatter())
    logger.addHandler(handler)
    return logger
