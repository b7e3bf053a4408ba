"""Exception hierarchy shared by all freeprob modules."""

from __future__ import annotations


class FreeProbError(Exception):
    """Base class for every error raised by freeprob."""


class ParameterDomainError(FreeProbError, ValueError):
    """A catalog or operation parameter lies outside its admissible range."""


class UnknownMeasureError(FreeProbError, KeyError):
    pass


class UnsupportedRepresentationError(FreeProbError):
    """The measure carries no representation able to serve the request."""


class TruncationError(FreeProbError):
    """Not enough stored coefficients to answer at the requested order."""


class NotAMomentSequenceError(FreeProbError, ValueError):
    """Hankel matrix of the sequence is singular or indefinite."""


class ConvergenceError(FreeProbError):
    """An iterative evaluation did not settle within its budget.

    The last two iterates are kept so callers can judge how far off it was.
    """

    def __init__(self, message: str, last=None, previous=None):
        super().__init__(message)
        self.last = last
        self.previous = previous


class InversionError(FreeProbError):
    """Newton continuation for the right inverse of F broke down.

    ``position`` is the last point of the continuation path that was solved.
    """

    def __init__(self, message: str, position=None, target=None):
        super().__init__(message)
        self.position = position
        self.target = target


class DerivativeSingularityError(FreeProbError):
    pass


class InversionUnstableError(FreeProbError):
    """Richardson extrapolation of a Stieltjes inversion did not settle."""


class OrderCapError(FreeProbError, ValueError):
    pass


class InvalidMeasureError(FreeProbError, ValueError):
    pass


class LeftOmegaError(FreeProbError):
    """A Riccati continuation path produced Im F <= 0, i.e. left the domain."""

    def __init__(self, message: str, position=None, value=None):
        super().__init__(message)
        self.position = position
        self.value = value
