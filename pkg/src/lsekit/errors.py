"""Exception hierarchy shared across the package."""


class LseError(Exception):
    """Base class for all lsekit errors."""


class DimensionError(LseError):
    """Operand shapes are incompatible."""


class MatrixMarketError(LseError):
    """Malformed or unsupported Matrix Market file."""


class NumericalError(LseError):
    """A numerical procedure failed (e.g. SVD did not converge)."""


class InconsistentConstraintsError(LseError):
    """The constraint system Cx = d has no solution within tolerance."""


class RankDeficiencyError(LseError):
    """A method requiring full rank was given a rank-deficient matrix."""


class SizeCapError(LseError):
    """A dense reference path was asked to densify a problem above its size cap."""
