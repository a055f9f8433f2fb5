"""Exception hierarchy shared by all ptflow modules."""


class PTFlowError(Exception):
    """Base class for every numerical failure raised by ptflow."""


class BadDimension(PTFlowError, ValueError):
    pass


class DimensionMismatch(PTFlowError, ValueError):
    pass


class DefectiveMatrix(PTFlowError):
    """Eigenvector matrix is numerically singular (close to an exceptional point)."""

    def __init__(self, message, cond=float("inf")):
        super().__init__(message)
        self.cond = cond


class NoCoalescence(PTFlowError):
    pass


class FitUnstable(PTFlowError):
    pass


class InsufficientDecades(PTFlowError):
    pass


class NormalizationUnderflow(PTFlowError):
    pass


class NoRecurrence(PTFlowError):
    pass


class NonExponentialTail(PTFlowError):
    pass


class BrokenPhase(PTFlowError):
    pass


class NearEP(PTFlowError):
    pass


class NotPositive(PTFlowError):
    pass


class NotPositiveDefinite(PTFlowError):
    pass


class ZeroBranch(PTFlowError):
    pass


class EmptyGrid(PTFlowError, ValueError):
    pass


class AmbiguousLimit(PTFlowError):
    pass


class GridTooCoarse(PTFlowError, ValueError):
    pass


class GridMismatch(PTFlowError, ValueError):
    pass


class BeamOverflow(PTFlowError, OverflowError):
    pass
