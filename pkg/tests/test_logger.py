import json
import logging
from logging.handlers import RotatingFileHandler
from pathlib import Path

import numpy as np

from src.utils.logger import RUN_LOG_FILE, JsonFormatter, setup_run_logger


def _drop_file_handlers(logger):
    for handler in list(logger.handlers):
        if isinstance(handler, RotatingFileHandler):
            logger.removeHandler(handler)
            handler.close()


def test_logger_creates_log_directory(tmp_path):
    """Test that the run logger creates its directory and file handler."""
    log_dir = tmp_path / "logs"
    logger = setup_run_logger("tests.create", log_dir)

    try:
        assert log_dir.exists()
        assert any(isinstance(h, RotatingFileHandler) for h in logger.handlers)
    finally:
        _drop_file_handlers(logger)


def test_logger_does_not_duplicate_handlers(tmp_path):
    """Calling setup twice for the same directory keeps a single file handler."""
    logger = setup_run_logger("tests.duplicate", tmp_path)
    setup_run_logger("tests.duplicate", tmp_path)

    try:
        assert sum(isinstance(h, RotatingFileHandler) for h in logger.handlers) == 1
    finally:
        _drop_file_handlers(logger)


def test_logger_without_directory_skips_file(tmp_path):
    logger = setup_run_logger("tests.nofile", None)

    assert not any(isinstance(h, RotatingFileHandler) for h in logger.handlers)


def test_logger_writes_json_lines(tmp_path):
    """Test that solver records land in the log as JSON with their data payload."""
    logger = setup_run_logger("tests.json", tmp_path)

    try:
        logger.debug(
            "cista stop",
            extra={"data": {"iterations": np.int64(12), "residuals": np.array([1e-9, np.inf])}},
        )
        for handler in logger.handlers:
            handler.flush()

        log_line = (Path(tmp_path) / RUN_LOG_FILE).read_text().splitlines()[-1]
        log_data = json.loads(log_line)
    finally:
        _drop_file_handlers(logger)

    assert log_data["level"] == "DEBUG"
    assert log_data["component"] == "tests.json"
    assert log_data["event"] == "cista stop"
    assert log_data["data"] == {"iterations": 12, "residuals": [1e-9, None]}


def test_json_formatter_includes_timestamp():
    """Test that JSON formatter includes timestamp."""
    formatter = JsonFormatter()
    record = logging.LogRecord(
        name="test",
        level=logging.DEBUG,
        pathname="",
        lineno=0,
        msg="test_message %d",
        args=(3,),
        exc_info=None,
    )

    log_data = json.loads(formatter.format(record))

    assert "timestamp" in log_data
    assert log_data["event"] == "test_message 3"
    assert "data" not in log_data
