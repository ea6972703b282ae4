"""Exception hierarchy shared by every module of the package."""


class BandgapResonanceError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(BandgapResonanceError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class SingularityError(DomainError):
    """The requested quantity diverges at the given arguments."""


class UnsupportedGapError(DomainError):
    """Only the first photonic band gap is modelled."""


class ConvergenceError(BandgapResonanceError, RuntimeError):
    """An iterative or adaptive procedure exhausted its budget.

    The best available estimate travels with the exception so callers can
    still inspect (or report) it.
    """

    def __init__(self, message, estimate=float("nan"), error=float("inf"), trace=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
        self.trace = list(trace) if trace is not None else []


class FarZoneWarning(UserWarning):
    """A far-zone (``k0 r >> 1``) formula is used at a short separation."""
