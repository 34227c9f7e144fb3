from .assembly import (
    BulkOperator,
    assemble_B_Gamma,
    assemble_B_Omega,
    assemble_mass_1d,
    flat_stiffness,
    load_1d,
)
from .extension import extend, extension_matrix
from .fields import BoundaryCondition, BoundaryCurve, BulkField, ControlProfile
from .linalg import ReducedSolver, SparseSystem, solve
from .mesh import IntervalMesh, SquareMesh
from .norms import NormKind, compute_norm, dual_norm_bulk, dual_norm_interval
from .quadrature import interval_quadrature, square_quadrature

__all__ = [
    "BoundaryCondition",
    "BoundaryCurve",
    "BulkField",
    "BulkOperator",
    "ControlProfile",
    "IntervalMesh",
    "NormKind",
    "ReducedSolver",
    "SparseSystem",
    "SquareMesh",
    "assemble_B_Gamma",
    "assemble_B_Omega",
    "assemble_mass_1d",
    "compute_norm",
    "dual_norm_bulk",
    "dual_norm_interval",
    "extend",
    "extension_matrix",
    "flat_stiffness",
    "interval_quadrature",
    "load_1d",
    "solve",
    "square_quadrature",
]
