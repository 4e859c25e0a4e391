"""Structured logging utilities."""

import logging
from rich.logging import RichHandler


def get_logger(
    name: str, level: int = logging.INFO, verbose: bool = False
) -> logging.Logger:
    """
    Create and configure a logger with rich console output.

    Args:
        name: Logger name
        level: Logging level
        verbose: Enable debug logging

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)

    if logger.handlers:
        if verbose:
            set_verbosity(logger, True)
        return logger

    logger.setLevel(logging.DEBUG if verbose else level)

    console_handler = RichHandler(
        rich_tracebacks=True,
        show_time=True,
        show_path=False,
        markup=True,
    )
    console_handler.setLevel(logging.DEBUG if verbose else level)
    console_handler.setFormatter(logging.Formatter("%(message)s", datefmt="[%X]"))

    logger.addHandler(console_handler)
    logger.propagate = False

    return logger


def set_verbosity(logger: logging.Logger, verbose: bool) -> None:
    """Switch an already configured logger between INFO and DEBUG."""
    level = logging.DEBUG if verbose else logging.INFO
    logger.setLevel(level)
    for handler in logger.handlers:
        handler.setLevel(level)


def set_package_verbosity(verbose: bool) -> None:
    """Apply verbosity to every logger created under the ``src`` package."""
    for name, candidate in logging.Logger.manager.loggerDict.items():
        if name.startswith("src") and isinstance(candidate, logging.Logger):
            set_verbosity(candidate, verbose)
