"""Exception hierarchy shared by all modules."""


class QHDError(Exception):
    """Base class for library errors."""


class DomainError(QHDError, ValueError):
    """An argument lies outside the domain of an operation."""


class UnsupportedRegimeError(QHDError):
    """The operation is only defined for subsonic equilibria."""


class AccuracyError(QHDError):
    """A quadrature or other approximation missed its error target."""


class SolverAbort(QHDError):
    """The nonlinear solver stopped: positivity loss or non-finite values.

    ``snapshot`` holds the last offending state when one is available.
    """

    def __init__(self, message, t=None, snapshot=None):
        super().__init__(message)
        self.t = t
        self.snapshot = snapshot
