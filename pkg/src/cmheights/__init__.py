"""Arbitrary-precision computations for CM elliptic curves.

Class groups, eta and Gamma values, Faltings heights, elliptic units and
their class invariants, with numerical checks of the identities relating
them.
"""
from .errors import (CMHeightsError, InputError, NonPrincipal, NoRelationFound,
                     NumericFailure, RecognitionFailed, VerificationFailed)
from .numkernel import PrecisionContext

__all__ = [
    "CMHeightsError", "InputError", "NonPrincipal", "NoRelationFound",
    "NumericFailure", "RecognitionFailed", "VerificationFailed", "PrecisionContext",
]
__version__ = "0.1.0"
