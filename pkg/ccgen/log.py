"""Common logging utilities."""

import logging
import sys

from ccgen.settings import settings


def get_logger(name: str, loglevel: int | str | None = None) -> logging.Logger:
    """Return a configured logger.

    Args:
        name (str): Logger name, typically __name__
        loglevel (int | str | None): Logging level, defaults to the CCGEN_LOG_LEVEL setting

    Returns:
        logging.Logger: Configured logger instance
    """
    logger = logging.getLogger(name)
    logger.setLevel(loglevel if loglevel is not None else settings.log_level.upper())
    if logger.handlers:
        return logger
    formatter = logging.Formatter("%(asctime)s [%(levelname)s] %(name)s: %(message)s")

    # stdout is reserved for command summaries
    stream_handler = logging.StreamHandler(sys.stderr)
    stream_handler.setFormatter(formatter)
    logger.addHandler(stream_handler)
    return logger
