"""Exception types raised across the package."""


class PwaError(Exception):
    """Base class for all package errors."""


class DegenerateSource(PwaError):
    """Three source points of an affine correspondence are collinear."""


class SingularMatrix(PwaError):
    """A linear part with zero determinant cannot be inverted."""


class DegeneratePolygon(PwaError):
    """Fewer than three non-collinear vertices remain after normalization."""


class ParameterOutOfRange(PwaError):
    pass


class SchemaError(PwaError):
    """A map document does not follow the JSON map schema."""


class InvariantViolation(PwaError):
    """A map's cells overlap, fail to tile the domain, or a piece is not invertible."""


class DepthCapExceeded(PwaError):
    pass


class EmptyCandidateSet(PwaError):
    pass


class CoverageFailure(PwaError):
    """An explicit cover leaves some candidate farther than epsilon from every center."""

    def __init__(self, message, worst_point=None, gap=None):
        super().__init__(message)
        self.worst_point = worst_point
        self.gap = gap


class OrbitTruncated(PwaError):
    pass


class ContainmentFailure(PwaError):
    """A piece image is not contained in the closed domain."""
