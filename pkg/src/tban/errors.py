"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes, so keep the classes stable.
"""


class TBANError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(TBANError, ValueError):
    """Invalid parameters or configuration (bad dimensions, T <= 0, ...)."""


class DomainError(TBANError, ValueError):
    """Argument outside the domain of an operation (unknown vertex, overlapping cylinder)."""


class SizeCapError(TBANError):
    """Exact analysis requested on a state space above the supported cap."""


class ConvergenceError(TBANError, RuntimeError):
    """Iterative solver did not reach its tolerance."""

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual
