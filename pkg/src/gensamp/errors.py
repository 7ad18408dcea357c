"""Exception types raised by the reconstruction pipeline."""


class GenSampError(Exception):
    """Base class for all library errors."""


class UsageError(GenSampError, ValueError):
    """Invalid arguments: bad sizes, unknown kinds, points outside [-1, 1]."""


class AccuracyError(GenSampError):
    """A quadrature or kernel did not reach its tolerance.

    ``estimates`` holds the last two estimates (or the worst entry) so callers
    can judge how far off the result was.
    """

    def __init__(self, message, estimates=None):
        super().__init__(message)
        self.estimates = estimates


class SingularityError(GenSampError):
    """A linear system is numerically singular or rank deficient."""

    def __init__(self, message, rank_deficiency=None):
        super().__init__(message)
        self.rank_deficiency = rank_deficiency


class ConditioningError(GenSampError):
    """A Gram-type matrix that must be positive definite is not (numerically)."""


class ProvenanceError(GenSampError):
    """A quantity needs frame bounds or a separation constant that is unknown."""
