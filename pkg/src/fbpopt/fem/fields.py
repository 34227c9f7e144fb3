"""
Nodal Fields

Thin immutable wrappers pairing a nodal vector with its mesh:

- :class:`BoundaryCurve`   - P1 function on I vanishing at both endpoints
  (the interface displacement gamma and the adjoint component s).
- :class:`ControlProfile`  - P1 function on I without boundary conditions.
- :class:`BulkField`       - Q1 function on the square with a boundary tag.

Arithmetic (``+``, ``-``, scalar ``*``) returns a new wrapper of the same
kind; solver internals work on the raw ``values`` arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, TypeVar

import numpy as np

from .mesh import IntervalMesh, SquareMesh

_F = TypeVar("_F", bound="_NodalField")


class BoundaryCondition(Enum):
    """Which nodes of a :class:`BulkField` are pinned to zero."""

    ZERO_ON_BOUNDARY = "zero_on_boundary"
    ZERO_ON_SIGMA    = "zero_on_sigma"
    FREE             = "free"


class _NodalField:
    values: np.ndarray

    def _combine(self: _F, other: _F, sign: float) -> _F:
        if other.mesh != self.mesh:  # type: ignore[attr-defined]
            raise ValueError("Fields live on different meshes.")
        return replace(self, values=self.values + sign * other.values)

    def __add__(self: _F, other: _F) -> _F:
        return self._combine(other, 1.0)

    def __sub__(self: _F, other: _F) -> _F:
        return self._combine(other, -1.0)

    def __mul__(self: _F, factor: float) -> _F:
        return replace(self, values=float(factor) * self.values)

    __rmul__ = __mul__

    def __neg__(self: _F) -> _F:
        return replace(self, values=-self.values)


@dataclass(frozen=True, eq=False)
class BoundaryCurve(_NodalField):
    """P1 function on the interval mesh with zero endpoint values."""

    mesh: IntervalMesh
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.shape != (self.mesh.n_nodes,):
            raise ValueError(
                f"BoundaryCurve expects {self.mesh.n_nodes} nodal values, got shape {values.shape}."
            )
        if values[0] != 0.0 or values[-1] != 0.0:
            raise ValueError("BoundaryCurve endpoint values must be exactly 0.")
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, mesh: IntervalMesh) -> "BoundaryCurve":
        return cls(mesh, np.zeros(mesh.n_nodes))

    @classmethod
    def from_function(cls, mesh: IntervalMesh, fn: Callable[[np.ndarray], np.ndarray]) -> "BoundaryCurve":
        """Nodal interpolant of *fn* with the endpoints forced to 0."""
        values = np.asarray(fn(mesh.nodes), dtype=float) * np.ones(mesh.n_nodes)
        values[[0, -1]] = 0.0
        return cls(mesh, values)

    @property
    def slopes(self) -> np.ndarray:
        """Elementwise derivative."""
        return np.diff(self.values) / self.mesh.h

    def evaluate(self, x1: np.ndarray | float) -> np.ndarray:
        return np.interp(x1, self.mesh.nodes, self.values)


@dataclass(frozen=True, eq=False)
class ControlProfile(_NodalField):
    """P1 control on the interval mesh (an element of L^2(I))."""

    mesh: IntervalMesh
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.shape != (self.mesh.n_nodes,):
            raise ValueError(
                f"ControlProfile expects {self.mesh.n_nodes} nodal values, got shape {values.shape}."
            )
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, mesh: IntervalMesh) -> "ControlProfile":
        return cls(mesh, np.zeros(mesh.n_nodes))

    @classmethod
    def from_function(cls, mesh: IntervalMesh, fn: Callable[[np.ndarray], np.ndarray]) -> "ControlProfile":
        return cls(mesh, np.asarray(fn(mesh.nodes), dtype=float) * np.ones(mesh.n_nodes))


@dataclass(frozen=True, eq=False)
class BulkField(_NodalField):
    """Q1 field on the square mesh; nodes pinned by *bc* must be exactly 0."""

    mesh: SquareMesh
    values: np.ndarray
    bc: BoundaryCondition = BoundaryCondition.FREE

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.shape != (self.mesh.n_nodes,):
            raise ValueError(
                f"BulkField expects {self.mesh.n_nodes} nodal values, got shape {values.shape}."
            )
        pinned = self.pinned_nodes
        if pinned.size and np.any(values[pinned] != 0.0):
            raise ValueError(f"BulkField tagged {self.bc.value} has nonzero pinned nodes.")
        object.__setattr__(self, "values", values)

    @property
    def pinned_nodes(self) -> np.ndarray:
        if self.bc is BoundaryCondition.ZERO_ON_BOUNDARY:
            return self.mesh.boundary_nodes
        if self.bc is BoundaryCondition.ZERO_ON_SIGMA:
            return self.mesh.sigma_nodes
        return np.empty(0, dtype=int)

    def _combine(self, other: "BulkField", sign: float) -> "BulkField":
        if other.mesh != self.mesh:
            raise ValueError("Fields live on different meshes.")
        bc = self.bc if other.bc is self.bc else BoundaryCondition.FREE
        return BulkField(self.mesh, self.values + sign * other.values, bc)

    @classmethod
    def zeros(cls, mesh: SquareMesh, bc: BoundaryCondition = BoundaryCondition.FREE) -> "BulkField":
        return cls(mesh, np.zeros(mesh.n_nodes), bc)

    @classmethod
    def from_function(
        cls,
        mesh: SquareMesh,
        fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
    ) -> "BulkField":
        """Nodal interpolant of ``fn(x1, x2)`` (untagged)."""
        return cls(mesh, np.asarray(fn(mesh.x1, mesh.x2), dtype=float) * np.ones(mesh.n_nodes))

    def trace_on_gamma(self) -> np.ndarray:
        return self.values[self.mesh.gamma_nodes]
