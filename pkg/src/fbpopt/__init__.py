"""
fbpopt

Optimal control of a free boundary problem with surface tension: the
interface is the graph ``x2 = 1 + gamma(x1)`` over the top edge of the unit
square, driven by a control ``u`` acting on the interface.  The package
solves the coupled state system by fixed-point iteration, computes adjoint
gradients and second derivatives of the reduced cost, runs a projected
gradient optimizer on a control ball and checks the constants of the
well-posedness theory empirically.
"""

__version__ = "0.1.0"

from .constants.ledger import ConstantsLedger, compute_thresholds
from .control.cost import ReducedCost
from .control.optimizer import optimize
from .data.config import RunConfig, parse_config
from .model.problem import ProblemData
from .orchestrator import CommandResult, RunOrchestrator
from .solvers.state import SolverSettings, StatePair, StateSolver

__all__ = [
    "CommandResult",
    "ConstantsLedger",
    "ProblemData",
    "ReducedCost",
    "RunConfig",
    "RunOrchestrator",
    "SolverSettings",
    "StatePair",
    "StateSolver",
    "compute_thresholds",
    "optimize",
    "parse_config",
]
