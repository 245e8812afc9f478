"""Logging setup for the command-line entry point."""

import logging
from typing import Union

from rich.console import Console
from rich.logging import RichHandler

PACKAGE_LOGGER = 'neuro_qp'


def setup_logging(level: Union[int, str] = logging.WARNING) -> logging.Logger:
    """Route the package's log records to stderr through a single RichHandler."""
    logger = logging.getLogger(PACKAGE_LOGGER)
    for handler in list(logger.handlers):
        if isinstance(handler, RichHandler):
            logger.removeHandler(handler)
    handler = RichHandler(console=Console(stderr=True), show_path=False, rich_tracebacks=True)
    handler.setFormatter(logging.Formatter('%(message)s'))
    logger.addHandler(handler)
    logger.setLevel(level)
    logger.propagate = False
    return logger
