from .adjoint import AdjointLoads, AdjointPair, AdjointSolver
from .fixed_point import FixedPointTrace, picard
from .interface import IFixedPointMap
from .state import Linearization, SolverSettings, StatePair, StateSolver
from .tangent import LinearRHS, TangentPair, TangentSolver
from .tracking import TrackingTerms

__all__ = [
    "AdjointLoads",
    "AdjointPair",
    "AdjointSolver",
    "FixedPointTrace",
    "IFixedPointMap",
    "LinearRHS",
    "Linearization",
    "SolverSettings",
    "StatePair",
    "StateSolver",
    "TangentPair",
    "TangentSolver",
    "TrackingTerms",
    "picard",
]
