"""Exact reduction of lattice Boltzmann schemes to multi-step finite-difference schemes."""
from .opring import OperatorPoly, RationalCoeff
from .linalg import OpMatrix, RingPoly, faddeev_leverrier, minimal_polynomial, mpamfr
from .scheme import SchemeSpec, build
from .reduce import FDScheme, reduce_multi, reduce_single, render

__version__ = "0.1.0"

__all__ = [
    "OperatorPoly", "RationalCoeff", "OpMatrix", "RingPoly", "faddeev_leverrier",
    "minimal_polynomial", "mpamfr", "SchemeSpec", "build", "FDScheme", "reduce_multi",
    "reduce_single", "render",
]
