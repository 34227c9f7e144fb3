"""
Discrete Norms

Seminorm convention throughout: ``W1p0`` is ``(int |grad f|^p)^(1/p)`` and
``W1inf0`` is the largest slope, the equivalent norms on spaces with zero
trace.  Integrals use the same Gauss points as assembly, so ``W1p0`` with
``p = 2`` equals the square root of the flat stiffness quadratic form.

Dual norms of assembled load vectors are taken as norms of their Riesz
representatives in the discrete ``W^{1,2}_0`` inner product.
"""

from __future__ import annotations

from enum import Enum
from typing import Optional, Union

import numpy as np

from .assembly import assemble_mass_1d, flat_stiffness, unit_stiffness_1d
from .fields import BoundaryCurve, BulkField, ControlProfile
from .linalg import ReducedSolver
from .mesh import IntervalMesh, SquareMesh
from .quadrature import square_quadrature

Field = Union[BoundaryCurve, ControlProfile, BulkField]


class NormKind(Enum):
    W1INF0 = "W1inf0"
    W1P0   = "W1p0"
    L2     = "L2"
    LINF   = "Linf"


def compute_norm(kind: Union[NormKind, str], field: Field, p: Optional[float] = None) -> float:
    """
    Evaluate a discrete norm of *field*.

    Args:
        kind:  ``W1inf0``, ``W1p0``, ``L2`` or ``Linf``.
        field: Interval or bulk field.
        p:     Exponent for ``W1p0`` (must exceed 1).

    Raises:
        ValueError: Unknown *kind* or missing/invalid *p*.
    """
    try:
        kind = NormKind(kind) if not isinstance(kind, NormKind) else kind
    except ValueError as exc:
        raise ValueError(f"Unknown norm kind '{kind}'.") from exc

    if kind is NormKind.W1P0 and (p is None or not p > 1.0):
        raise ValueError(f"W1p0 needs an exponent p > 1, got {p!r}.")

    if kind is NormKind.LINF:
        return float(np.max(np.abs(field.values))) if field.values.size else 0.0

    if isinstance(field, BulkField):
        return _bulk_norm(kind, field.mesh, field.values, p)
    return _interval_norm(kind, field.mesh, field.values, p)


def _interval_norm(kind: NormKind, mesh: IntervalMesh, values: np.ndarray, p: Optional[float]) -> float:
    if kind is NormKind.W1INF0:
        return float(np.max(np.abs(np.diff(values)))) / mesh.h
    if kind is NormKind.W1P0:
        return w1_interval_seminorm(mesh, values, p)
    return float(np.sqrt(max(values @ (assemble_mass_1d(mesh) @ values), 0.0)))


def _bulk_norm(kind: NormKind, mesh: SquareMesh, values: np.ndarray, p: Optional[float]) -> float:
    quad = square_quadrature(mesh)
    if kind is NormKind.L2:
        point_values = quad.values @ values
        return float(np.sqrt(np.dot(quad.weights, point_values**2)))
    if kind is NormKind.W1INF0:
        return float(np.max(np.hypot(*quad.gradient(values))))
    return w1_bulk_seminorm(mesh, values, p)


def w1_interval_seminorm(mesh: IntervalMesh, values: np.ndarray, p: float) -> float:
    """``(int |zeta'|^p)^(1/p)``; also used with ``p = 1``."""
    slopes = np.diff(values) / mesh.h
    return float((mesh.h * np.sum(np.abs(slopes) ** p)) ** (1.0 / p))


def w1_bulk_seminorm(mesh: SquareMesh, values: np.ndarray, p: float) -> float:
    """``(int |grad f|^p)^(1/p)`` on the square; also used with ``1 <= p < 2``."""
    quad = square_quadrature(mesh)
    return float(np.dot(quad.weights, np.hypot(*quad.gradient(values)) ** p) ** (1.0 / p))


# ---------------------------------------------------------------------------
# Dual norms of load vectors
# ---------------------------------------------------------------------------

def dual_norm_interval(mesh: IntervalMesh, load: np.ndarray) -> float:
    """Norm of an interval load vector in the dual of discrete ``W^{1,2}_0(I)``."""
    riesz = ReducedSolver(unit_stiffness_1d(mesh), mesh.endpoints).solve(load)
    return float(np.sqrt(max(riesz @ load, 0.0)))


def dual_norm_bulk(mesh: SquareMesh, load: np.ndarray) -> float:
    """Norm of a bulk load vector (interior rows) in the dual of discrete ``W^{1,2}_0``."""
    riesz = ReducedSolver(flat_stiffness(mesh), mesh.boundary_nodes).solve(load)
    return float(np.sqrt(max(riesz @ load, 0.0)))
