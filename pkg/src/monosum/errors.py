"""Exception hierarchy shared by all modules."""


class MonosumError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(MonosumError):
    """Malformed spec document, unknown preset, or invalid parameter."""


class CapabilityError(MonosumError):
    """The requested operation is outside what this operator/size supports."""


class DomainError(MonosumError):
    """A point lies outside the effective domain of a graph or function."""


class MonotonicityError(MonosumError):
    """A solver detected a violation of the monotonicity assumptions."""


class NonConvergenceError(MonosumError):
    """An iteration hit its cap before reaching the requested tolerance.

    Carries the best iterate and the residual it achieved so callers can
    inspect (or deliberately accept) partial results.
    """

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual
