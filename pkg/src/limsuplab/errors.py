"""Exception types shared across the package."""


class LimsupLabError(Exception):
    """Base class for package errors."""


class DomainError(LimsupLabError, ValueError):
    """An argument is outside the domain an operation is defined on."""


class ParseError(LimsupLabError, ValueError):
    """A function literal or case file could not be parsed."""


class ResourceCapError(LimsupLabError):
    """Predicted work exceeds the configured enumeration cap."""

    def __init__(self, message, predicted=None, cap=None):
        super().__init__(message)
        self.predicted = predicted
        self.cap = cap


class InfeasibleError(LimsupLabError):
    """No feasible schedule/parameter exists below the configured caps."""

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required


class ConstructionError(LimsupLabError):
    """A runtime check of the nested-ball construction failed."""


class LimsupBranchError(LimsupLabError):
    """Neighbourhood radii are too large relative to the locating radii.

    Raised when psi(u_n) >= rho(u_n)/24: the ball-separation construction
    is not available and the caller should use the large-ratio branch of
    the positive-measure law instead.
    """
