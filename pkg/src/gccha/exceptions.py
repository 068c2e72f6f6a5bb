"""Exception hierarchy.

Validation problems derive from :class:`ValidationError` (CLI exit code 2),
numerical breakdowns from :class:`NumericalError` (CLI exit code 3).
"""


class GCChAError(Exception):
    """Base class for all package errors."""


class ValidationError(GCChAError, ValueError):
    pass


class NumericalError(GCChAError, ArithmeticError):
    pass


class DisconnectedGraph(ValidationError):
    pass


class SelfLoop(ValidationError):
    pass


class DuplicateEdge(ValidationError):
    pass


class NegativeWeight(ValidationError):
    pass


class DirectedGraphUnsupported(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NotNormal(ValidationError):
    pass


class TooFewRealizations(ValidationError):
    pass


class RankTooLarge(ValidationError):
    pass


class InvalidField(ValidationError):
    pass


class MeanNotProportionalToBasisVector(ValidationError):
    pass


class ZeroVectorImage(ValidationError):
    pass


class KTooLarge(ValidationError):
    pass


class EigenFailure(NumericalError):
    pass


class SingularSpectralMatrix(NumericalError):
    """A spectral matrix lost definiteness at some frequency."""

    def __init__(self, message, frequency_index=None):
        super().__init__(message)
        self.frequency_index = frequency_index


class SingularInput(NumericalError):
    pass
