"""Exception hierarchy.

The CLI maps these onto exit codes: configuration problems exit 2, data
problems 3, numerical failures 4.
"""


class BdmlError(Exception):
    """Base class for every error raised by the package."""

    exit_code = 1


class ConfigError(BdmlError):
    exit_code = 2


class DataError(BdmlError, ValueError):
    """Malformed or inconsistent input data."""

    exit_code = 3


class NumericalError(BdmlError):
    exit_code = 4


class InfeasibleMoment(NumericalError):
    """Zero is not inside the convex hull of the score values."""


class NonConvergence(NumericalError):
    """The dual solve did not reach the constraint tolerance."""

    def __init__(self, message, residuals=None, iterations=None):
        super().__init__(message)
        self.residuals = residuals
        self.iterations = iterations


class DegenerateDesign(NumericalError):
    """The score has no information about the treatment effect."""
