"""Logging, error types and plotting helpers."""

from .errors import (
    CheckpointError,
    ConfigError,
    DegenerateRegimeError,
    DomainError,
    InfeasibleError,
    KappaOutOfRangeError,
    NoPositiveRootError,
    RsmaError,
)
from .logger import get_logger, set_package_verbosity, set_verbosity

__all__ = [
    "CheckpointError",
    "ConfigError",
    "DegenerateRegimeError",
    "DomainError",
    "InfeasibleError",
    "KappaOutOfRangeError",
    "NoPositiveRootError",
    "RsmaError",
    "get_logger",
    "set_package_verbosity",
    "set_verbosity",
]
