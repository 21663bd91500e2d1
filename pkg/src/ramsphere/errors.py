"""Semantic exception hierarchy shared by all modules."""


class RamsphereError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(RamsphereError, ValueError):
    """An argument lies outside the documented domain of an operation."""


class NoSignChange(RamsphereError):
    """Root bracket endpoints do not straddle a sign change."""


class NoConvergence(RamsphereError):
    """An iterative method hit its iteration cap before converging."""


class InadmissibleParameters(RamsphereError, ValueError):
    """Bound parameters leave the region where the analysis is valid."""


class InstanceTooLarge(RamsphereError):
    """Exact search requested beyond the configured size cutoff."""


class ResourceLimit(RamsphereError):
    """A computation would exceed the configured memory budget."""


class QuadratureError(RamsphereError):
    """Numerical integration did not reach the requested accuracy."""

    def __init__(self, message: str, achieved_error: float):
        super().__init__(f"{message} (achieved error estimate {achieved_error:.3e})")
        self.achieved_error = achieved_error
