"""Exception hierarchy shared by every module."""


class CMHeightsError(Exception):
    """Base class for all library errors."""


class InputError(CMHeightsError, ValueError):
    """Invalid user input (bad discriminant, bad precision, ...)."""


class PrecisionTooLow(InputError):
    pass


class NotSquarefree(InputError):
    pass


class NotFundamental(InputError):
    pass


class DiscriminantMismatch(InputError):
    pass


class NotUpperHalfPlane(InputError):
    pass


class NotPositivelyOriented(InputError):
    pass


class GroupMismatch(InputError):
    pass


class ZeroElement(InputError):
    pass


class DependentRows(InputError):
    pass


class NonPrincipal(CMHeightsError):
    pass


class NoRelationFound(CMHeightsError):
    pass


class NumericFailure(CMHeightsError):
    """A numeric check did not meet its tolerance; retrying at higher precision may help."""


class RecognitionFailed(NumericFailure):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class VerificationFailed(NumericFailure):
    def __init__(self, message, label=None, residual=None):
        super().__init__(message)
        self.label = label
        self.residual = residual
