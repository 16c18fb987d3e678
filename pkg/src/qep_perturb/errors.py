"""Exception hierarchy used across the package."""


class QepPerturbError(Exception):
    """Base class for all package errors."""


class NotHermitianError(QepPerturbError):
    """A matrix expected to be Hermitian deviates beyond tolerance."""


class SingularMatrixError(QepPerturbError):
    """A matrix required to be nonsingular is numerically singular."""


class AccuracyError(QepPerturbError):
    """An eigen-decomposition or linear solve failed its residual check."""


class RankDeficientError(QepPerturbError):
    """A basis expected to have full column rank does not."""


class InvalidBlockError(QepPerturbError):
    """A canonical block specification is malformed."""


class CannotNormalizeError(QepPerturbError):
    """An eigenvector cannot be scaled to canonical form."""


class DisjointnessError(QepPerturbError):
    """Two spectra that must be disjoint share an eigenvalue."""


class GapCollapseError(QepPerturbError):
    """A relative gap vanished where a positive one is required."""


class SizeLimitError(QepPerturbError):
    """A requested dense problem exceeds the supported size."""


class NotApplicableError(QepPerturbError):
    """A bound's preconditions cannot be certified for the given input."""
