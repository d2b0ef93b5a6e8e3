"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid construction input: bad domain, basis, parameter, or config key."""


class UnsupportedNormError(ValueError):
    """Requested norm is not defined for this problem's function space."""


class NumericalFailureError(RuntimeError):
    """Operator evaluation or time stepping produced a non-finite result.

    Carries the time and the norms of the offending state when available.
    """

    def __init__(self, message, t=None, norms=None):
        super().__init__(message)
        self.t = t
        self.norms = norms
