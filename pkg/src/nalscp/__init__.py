"""Newton augmented Lagrangian solver for symmetric cone programs."""

from .cones import ConeDesc, Orthant, Psd, SecondOrder
from .linalg import LinearMap
from .nal import SolverConfig, SolveResult, solve
from .probio import Problem

__all__ = [
    "ConeDesc",
    "Orthant",
    "SecondOrder",
    "Psd",
    "LinearMap",
    "Problem",
    "SolverConfig",
    "SolveResult",
    "solve",
]

__version__ = "0.1.0"
