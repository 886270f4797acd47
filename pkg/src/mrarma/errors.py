"""Exception types shared across the package."""


class MrarmaError(Exception):
    """Base class for all package-specific errors."""


class NumericalError(MrarmaError):
    """A numerical procedure failed (singular system, stalled iteration, ...)."""


class TruncationError(NumericalError):
    """A truncated summation or support window could not reach its tolerance."""


class WindowTooSmallError(NumericalError):
    """A transition-matrix window leaks more probability mass than allowed."""


class InsufficientDataError(MrarmaError, ValueError):
    """The series is too short for the requested estimation procedure."""


class ZeroVarianceError(MrarmaError, ValueError):
    """A constant series has no autocovariance information to estimate from."""


class UnsupportedModelError(MrarmaError, ValueError):
    """The operation is defined only for a restricted model class (e.g. pure AR)."""


class NonConvergenceError(NumericalError):
    """An optimizer failed to converge.

    Carries the best point found so far in ``result`` so callers can still
    inspect or persist it.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
