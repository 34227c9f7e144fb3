"""
Problem Data

:class:`ProblemData` holds the data functions of the control problem and
the scalar parameters ``kappa``, ``lambda`` and ``p``.  Each data function
may be an :class:`~fbpopt.data.expression.Expression`, a number, a Python
callable ``f(x1, x2)`` or a nodal table; :class:`DataFunction` hides the
difference from the solvers.

Curve data (``gamma_d``, ``u0``) given as functions of ``(x1, x2)`` are
evaluated on the interface ``x2 = 1``.  ``y_d`` lives on the physical
domain and is pulled back through ``Psi``; the solvers also need its first
and second ``x2`` derivatives at the mapped points.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from ..data.expression import Expression
from ..fem.fields import BulkField, ControlProfile
from ..fem.mesh import IntervalMesh, SquareMesh
from ..fem.norms import NormKind, compute_norm
from ..fem.quadrature import interval_quadrature, square_quadrature

logger = logging.getLogger(__name__)

DataSource = Union[Expression, float, int, Callable[..., np.ndarray], np.ndarray, Sequence[float]]

# Step of the central differences used for callables and tables.
FD_STEP = 1e-4


class DataFunction:
    """
    Uniform view of one data function.

    Args:
        source: Expression, number, callable ``f(x1, x2)`` or nodal table.
                A 1-D table holds values at uniform nodes of ``[0, 1]``
                (a function of ``x1``); a 2-D table ``t[j, i]`` holds values
                at ``(i / m, j / m)`` and is interpolated bilinearly.
        name:   Label used in messages.
    """

    def __init__(self, source: DataSource, name: str) -> None:
        self.name = name
        self.source = source
        self.expression: Optional[Expression] = None
        self.table: Optional[np.ndarray] = None
        self._fn: Callable[[np.ndarray, np.ndarray], np.ndarray]

        if isinstance(source, Expression):
            self.expression = source
            self._fn = source
        elif isinstance(source, (int, float, np.floating, np.integer)):
            self.expression = Expression.constant(float(source))
            self._fn = self.expression
        elif callable(source):
            self._fn = source
        else:
            self.table = np.asarray(source, dtype=float)
            self._fn = self._table_function(self.table)

    def _table_function(self, table: np.ndarray) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
        if table.ndim == 1 and table.size >= 2:
            nodes = np.linspace(0.0, 1.0, table.size)
            return lambda x1, x2: np.interp(x1, nodes, table) * np.ones(np.broadcast(x1, x2).shape)
        if table.ndim == 2 and table.shape[0] == table.shape[1] and table.shape[0] >= 2:
            axis = np.linspace(0.0, 1.0, table.shape[0])
            interp = RegularGridInterpolator((axis, axis), table, bounds_error=False, fill_value=None)

            def evaluate(x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
                x1, x2 = np.broadcast_arrays(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
                return interp(np.stack([x2.ravel(), x1.ravel()], axis=1)).reshape(x1.shape)

            return evaluate
        raise ValueError(
            f"{self.name}: nodal table must be 1-D or square 2-D with at least 2 entries per axis, "
            f"got shape {table.shape}."
        )

    # ------------------------------------------------------------------
    # Evaluation
    # ------------------------------------------------------------------

    def __call__(self, x1: np.ndarray | float, x2: np.ndarray | float) -> np.ndarray:
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        values = np.asarray(self._fn(x1, x2), dtype=float) * np.ones(np.broadcast_shapes(x1.shape, x2.shape))
        if not np.all(np.isfinite(values)):
            raise ValueError(f"{self.name} evaluates to non-finite values.")
        return values

    def d_x2(self, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        """``d/dx2``; exact for expressions, central differences otherwise."""
        if self.expression is not None:
            return self.expression.derivative("x2")(x1, x2)
        return (self(x1, x2 + FD_STEP) - self(x1, x2 - FD_STEP)) / (2.0 * FD_STEP)

    def d_x2x2(self, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        """``d^2/dx2^2``; exact for expressions, central differences otherwise."""
        if self.expression is not None:
            return self.expression.derivative("x2", 2)(x1, x2)
        return (self(x1, x2 + FD_STEP) - 2.0 * self(x1, x2) + self(x1, x2 - FD_STEP)) / FD_STEP**2

    @property
    def varies_vertically(self) -> bool:
        if self.expression is not None:
            return self.expression.depends_on("x2")
        return not (self.table is not None and self.table.ndim == 1)

    def describe(self) -> object:
        if self.expression is not None:
            return self.expression.text
        if self.table is not None:
            return f"table{list(self.table.shape)}"
        return getattr(self.source, "__name__", "callable")


@dataclass(frozen=True)
class DataNorms:
    """Data norms entering the derived thresholds."""

    gamma_d_l2: float = 0.0
    y_d_l2:     float = 0.0
    v_w1p:      float = 0.0

    def to_dict(self) -> dict:
        return {"gamma_d_l2": self.gamma_d_l2, "y_d_l2": self.y_d_l2, "v_w1p": self.v_w1p}


@dataclass(frozen=True)
class TrackingTargets:
    """``y_d`` and its vertical derivatives at pulled-back points."""

    value: np.ndarray
    d_x2: np.ndarray
    d_x2x2: np.ndarray


class ProblemData:
    """
    Data of the control problem.

    Args:
        kappa:   Surface-tension coefficient (> 0).
        lam:     Control cost weight lambda (> 0).
        p:       Integrability exponent of the bulk state (> 2).
        v:       Dirichlet lift on the square.
        gamma_d: Desired interface.
        y_d:     Desired bulk state on the physical domain.
        u0:      Initial control.

    Raises:
        ValueError: When a scalar parameter is out of range.
    """

    def __init__(
        self,
        kappa: float,
        lam: float,
        p: float,
        v: DataSource = 0.0,
        gamma_d: DataSource = 0.0,
        y_d: DataSource = 0.0,
        u0: DataSource = 0.0,
    ) -> None:
        problems = []
        if not kappa > 0.0:
            problems.append(f"kappa must be > 0, got {kappa!r}")
        if not lam > 0.0:
            problems.append(f"lambda must be > 0, got {lam!r}")
        if not p > 2.0:
            problems.append(f"p must be > 2, got {p!r}")
        if problems:
            raise ValueError("; ".join(problems) + ".")
        self.kappa = float(kappa)
        self.lam = float(lam)
        self.p = float(p)
        self.v = DataFunction(v, "v")
        self.gamma_d = DataFunction(gamma_d, "gamma_d")
        self.y_d = DataFunction(y_d, "y_d")
        self.u0 = DataFunction(u0, "u0")

    @property
    def q(self) -> float:
        """Conjugate exponent ``p / (p - 1)``."""
        return self.p / (self.p - 1.0)

    # ------------------------------------------------------------------
    # Discrete data
    # ------------------------------------------------------------------

    def v_field(self, square: SquareMesh) -> BulkField:
        """Nodal interpolant of ``v`` (or the table itself when it matches the mesh)."""
        table = self.v.table
        if table is not None and table.ndim == 1:
            if table.size != square.n_nodes:
                raise ValueError(f"v: nodal table has {table.size} entries, mesh has {square.n_nodes} nodes.")
            return BulkField(square, table)
        return BulkField(square, self.v(square.x1, square.x2))

    def gamma_d_at(self, x1: np.ndarray) -> np.ndarray:
        """Desired interface at points of I (evaluated on ``x2 = 1``)."""
        return self.gamma_d(x1, np.ones_like(np.asarray(x1, dtype=float)))

    def u0_profile(self, interval: IntervalMesh) -> ControlProfile:
        return ControlProfile(interval, self.u0(interval.nodes, np.ones(interval.n_nodes)))

    def gamma_d_curve(self, interval: IntervalMesh) -> ControlProfile:
        """Nodal interpolant of ``gamma_d`` (no endpoint condition imposed)."""
        return ControlProfile(interval, self.gamma_d_at(interval.nodes))

    def tracking_targets(self, x1: np.ndarray, x2_physical: np.ndarray) -> TrackingTargets:
        """``y_d`` and its ``x2`` derivatives at physical points."""
        value = self.y_d(x1, x2_physical)
        if not self.y_d.varies_vertically:
            zero = np.zeros_like(value)
            return TrackingTargets(value, zero, zero)
        return TrackingTargets(value, self.y_d.d_x2(x1, x2_physical), self.y_d.d_x2x2(x1, x2_physical))

    def data_norms(self, interval: IntervalMesh, square: SquareMesh) -> DataNorms:
        """``||gamma_d||_L2(I)``, ``||y_d||_L2`` on the square and ``||v||_W1p``."""
        iq = interval_quadrature(interval)
        sq = square_quadrature(square)
        gamma_d = self.gamma_d_at(iq.x)
        y_d = self.y_d(sq.x1, sq.x2)
        return DataNorms(
            gamma_d_l2=float(np.sqrt(iq.integrate(gamma_d**2))),
            y_d_l2=float(np.sqrt(np.dot(sq.weights, y_d**2))),
            v_w1p=compute_norm(NormKind.W1P0, self.v_field(square), self.p),
        )

    def to_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "lambda": self.lam,
            "p": self.p,
            "v": self.v.describe(),
            "gamma_d": self.gamma_d.describe(),
            "y_d": self.y_d.describe(),
            "u0": self.u0.describe(),
        }
