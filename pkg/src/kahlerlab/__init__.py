"""Numerical laboratory for algebraic Kähler curvature tensors."""

from .errors import (
    DegeneracyWarning,
    GenerationError,
    KahlerLabError,
    LoadError,
    PreconditionError,
    StructuralError,
    SymmetryError,
)
from .tensor_core import KahlerCurvatureTensor, OrthonormalTwoFrame, RealCurvatureTensor

__version__ = "0.1.0"

__all__ = [
    "DegeneracyWarning",
    "GenerationError",
    "KahlerCurvatureTensor",
    "KahlerLabError",
    "LoadError",
    "OrthonormalTwoFrame",
    "PreconditionError",
    "RealCurvatureTensor",
    "StructuralError",
    "SymmetryError",
]
