"""Bott index and real-space Chern number for finite lattice models."""

from .errors import EXIT_CODES, BottError
from .indices import BottResult, bott_index, bott_index_invertible, chern_trace

__version__ = "0.1.0"

__all__ = [
    "EXIT_CODES", "BottError", "BottResult",
    "bott_index", "bott_index_invertible", "chern_trace", "__version__",
]
