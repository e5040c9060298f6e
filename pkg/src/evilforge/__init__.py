"""evilforge: exact constructions of quaternionic multiplication on superspecial surfaces."""

from ._enum import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
