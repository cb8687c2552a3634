"""Exception and warning types shared across the package."""


class PairsaddleError(Exception):
    """Base class for every error raised by this package."""


class DomainError(PairsaddleError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class NotPositiveDefinite(PairsaddleError):
    """A matrix required to be symmetric positive definite is not."""


class SingularJacobian(PairsaddleError):
    """A Newton step could not be computed because the Jacobian is singular."""


class NoConvergence(PairsaddleError):
    """An iterative solver exhausted its budget without meeting tolerance.

    The best iterate seen so far, when one exists, is attached as ``best``.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class HullViolation(PairsaddleError):
    """Zero is not inside the convex hull of the score points.

    The tilting problem has no solution, so the null hypothesis is
    untestable at this sample.
    """


class BootstrapUnstable(PairsaddleError):
    """Too many bootstrap resamples failed to produce a statistic."""


class ExperimentUnstable(PairsaddleError):
    """Too many Monte Carlo replications failed for a configured statistic."""


class ConfigError(PairsaddleError, ValueError):
    """An experiment configuration is malformed or inconsistent."""


class ParseError(PairsaddleError, ValueError):
    """A data file could not be parsed.

    Carries the 1-based ``line`` and ``column`` of the offending field.
    """

    def __init__(self, message, line=None, column=None):
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "")
            message = f"{message} ({where})"
        super().__init__(message)
        self.line = line
        self.column = column


class DegenerateScores(UserWarning):
    """Warning: a unit score matrix is numerically rank deficient."""
