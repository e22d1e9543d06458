"""Exception and warning types raised across the package."""


class StrongBathError(Exception):
    """Base class for all package errors."""


class NotHermitian(StrongBathError, ValueError):
    pass


class DimensionMismatch(StrongBathError, ValueError):
    pass


class NegativeFrequency(StrongBathError, ValueError):
    pass


class QuadratureNotConverged(StrongBathError, RuntimeError):
    pass


class TruncationTooSmall(StrongBathError, ValueError):
    pass


class DiscretizationNotConverged(StrongBathError, RuntimeError):
    pass


class StepRejected(StrongBathError, RuntimeError):
    """The adaptive integrator could not meet its error tolerance."""


class NoConvergence(StrongBathError, RuntimeError):
    pass


class IndexOutOfRange(StrongBathError, IndexError):
    pass


class NoPeak(StrongBathError, ValueError):
    """No periodogram bin stands out above the background."""


class ConfigInvalid(StrongBathError, ValueError):
    pass


class ColumnMissing(StrongBathError, KeyError):
    pass


class PositivityWarning(UserWarning):
    """A propagated density matrix acquired a noticeably negative eigenvalue."""
