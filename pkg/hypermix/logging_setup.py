"""Console logging configuration."""

import logging

from rich.console import Console
from rich.logging import RichHandler

from .settings import settings

LOGGER_NAME = "hypermix"


def setup_logging(level: str | None = None) -> logging.Logger:
    """Route the package logger to a rich handler on stderr.

    Artifacts go to stdout or files, so log records never mix with them.
    Calling this twice replaces the handler instead of stacking a second one.
    """
    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel((level or settings.LOG_LEVEL).upper())

    for handler in list(logger.handlers):
        if isinstance(handler, RichHandler):
            logger.removeHandler(handler)

    handler = RichHandler(
        console=Console(stderr=True),
        show_path=False,
        rich_tracebacks=True,
    )
    handler.setFormatter(logging.Formatter("%(message)s"))
    logger.addHandler(handler)
    logger.propagate = False
    return logger
