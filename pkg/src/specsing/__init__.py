"""Spectral singularities of one-dimensional non-Hermitian scatterers."""
from .errors import SpecsingError
from .scatter import ScatteringCenter, TransferMatrix, composite_amplitudes, composite_matrix
from .solver import SsQuery, SsResult, find_ss

__all__ = [
    "ScatteringCenter",
    "SpecsingError",
    "SsQuery",
    "SsResult",
    "TransferMatrix",
    "composite_amplitudes",
    "composite_matrix",
    "find_ss",
]
__version__ = "0.1.0"
