"""Exception types raised across the package."""


class QDecideError(Exception):
    """Base class for all package errors."""


class NotHermitian(QDecideError):
    pass


class DimensionMismatch(QDecideError):
    pass


class BadGrouping(QDecideError):
    pass


class DegenerateAlignment(QDecideError):
    """The target projector lies in span(1, psi), so no aligned basis exists."""


class ZeroVector(QDecideError):
    pass


class PrecisionExhausted(QDecideError):
    pass


class NoPositiveEigenvector(QDecideError):
    """The completely positive map has no positive-definite Perron direction.

    ``remedy`` describes what the caller can do instead (restrict the family
    to its irreducible diagonal blocks); nothing is attempted automatically.
    """

    def __init__(self, message, spectral_radius=None, remedy=None):
        super().__init__(message)
        self.spectral_radius = spectral_radius
        self.remedy = remedy or (
            "replace the matrices by the direct sum of their irreducible "
            "blocks; each block map then has a positive definite eigenvector"
        )


class UnsupportedDomain(QDecideError):
    pass


class IncompleteAssignment(QDecideError):
    pass


class NotUnital(QDecideError):
    pass


class NuOutOfRange(QDecideError):
    pass


class InfeasibleParameters(QDecideError):
    pass


class LetterOutOfRange(QDecideError):
    pass


class CapExceeded(QDecideError):
    pass


class UsageError(QDecideError):
    pass


class SchemaError(QDecideError):
    pass
