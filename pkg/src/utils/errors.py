"""Exception hierarchy shared by the solvers, the SAC stack and the CLI."""

from typing import Optional


class RsmaError(Exception):
    """Base class for all library errors."""

    exit_code = 4


class DomainError(RsmaError, ValueError):
    """An argument lies outside the domain of a rate formula or solver."""


class InfeasibleError(RsmaError):
    """No allocation satisfies the problem constraints."""

    exit_code = 3


class NoPositiveRootError(RsmaError):
    """The binding-rate quadratic has no admissible non-negative root."""


class DegenerateRegimeError(RsmaError):
    """The binding-rate equation is not quadratic in p_c (lambda = 0 or S = 0)."""


class KappaOutOfRangeError(RsmaError):
    """The circularity coefficient implied by a common power is outside [0, 1]."""

    def __init__(self, message: str, kappa_squared: float):
        super().__init__(message)
        self.kappa_squared = kappa_squared


class ConfigError(RsmaError):
    """Invalid experiment configuration."""

    exit_code = 2

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        location = []
        if key:
            location.append(f"key '{key}'")
        if line is not None:
            location.append(f"line {line}")
        suffix = f" ({', '.join(location)})" if location else ""
        super().__init__(f"{message}{suffix}")
        self.message = message
        self.key = key
        self.line = line


class CheckpointError(RsmaError):
    """A SAC checkpoint could not be written or read."""
