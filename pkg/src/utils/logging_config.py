"""Logging configuration for the kernel calculus harness."""

import logging
import logging.handlers
from contextlib import contextmanager
from datetime import datetime
from pathlib import Path
from typing import Iterator, Optional

from src.utils.config import config

DETAILED_FORMAT = '%(asctime)s - %(threadName)s - %(name)s - %(levelname)s - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'

# chatty below WARNING
QUIET_LOGGERS = ('sqlalchemy.engine', 'hypothesis')


def setup_logging(level: Optional[str] = None):
    """Root logger with a rotating harness log and a console handler on stderr."""
    config.log_path.mkdir(parents=True, exist_ok=True)
    level = getattr(logging, (level or config.log_level).upper(), logging.INFO)

    logger = logging.getLogger()
    logger.setLevel(level)
    logger.handlers.clear()

    file_handler = logging.handlers.RotatingFileHandler(
        config.get_log_file_path(),
        maxBytes=10*1024*1024,  # 10MB
        backupCount=5
    )
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(logging.Formatter(DETAILED_FORMAT, datefmt=DATE_FORMAT))
    logger.addHandler(file_handler)

    console_handler = logging.StreamHandler()
    console_handler.setLevel(level)
    console_handler.setFormatter(logging.Formatter('%(levelname)s - %(message)s'))
    logger.addHandler(console_handler)

    for name in QUIET_LOGGERS:
        logging.getLogger(name).setLevel(logging.WARNING)

    return logger


def run_log_path(run_id: str) -> Path:
    return config.log_path / f"run_{run_id}.log"


def new_run_id(seed_base: int) -> str:
    """Timestamped id of one harness run, e.g. 20240105_101500_s0."""
    return f"{datetime.now().strftime('%Y%m%d_%H%M%S')}_s{seed_base}"


@contextmanager
def run_log(run_id: str) -> Iterator[Path]:
    """Copy every record logged while the block runs into logs/run_<id>.log."""
    config.log_path.mkdir(parents=True, exist_ok=True)
    path = run_log_path(run_id)
    handler = logging.FileHandler(path, encoding='utf-8')
    handler.setLevel(logging.DEBUG)
    handler.setFormatter(logging.Formatter(DETAILED_FORMAT, datefmt=DATE_FORMAT))

    root = logging.getLogger()
    previous = root.level
    root.addHandler(handler)
    if root.level > logging.INFO:
        root.setLevel(logging.INFO)
    try:
        yield path
    finally:
        root.removeHandler(handler)
        root.setLevel(previous)
        handler.close()
