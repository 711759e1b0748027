"""Root logger configuration for the command line."""

import logging
from typing import Optional

import coloredlogs

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def setup_logging(level: str = "INFO", log_file: Optional[str] = None) -> None:
    """Install coloured console logging on the root logger, plus a plain file log if requested."""
    root = logging.getLogger()
    coloredlogs.install(level=level.upper(), logger=root, fmt=LOG_FORMAT)
    if log_file:
        handler = logging.FileHandler(log_file, encoding="utf-8")
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler.setLevel(level.upper())
        root.addHandler(handler)
