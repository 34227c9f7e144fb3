"""
Tracking Terms of the Cost

The cost at a state ``(gamma, y)`` is

    J = 1/2 sum_I w (gamma - gamma_d)^2 + 1/2 sum_Omega W rho m^2,
    rho = 1 + gamma(x1),   m = y + v - y_d(x1, rho x2),

with both sums over the Gauss points of assembly.  :class:`TrackingTerms`
evaluates ``J`` and its first and second partial derivatives in
``(gamma, y)`` at one state; the derivatives of ``m`` in ``gamma`` come from
the ``x2`` derivatives of ``y_d`` at the mapped points and vanish when
``y_d`` does not vary vertically.
"""

from __future__ import annotations

import logging
from functools import cached_property

import numpy as np

from ..fem.assembly import curve_operators
from ..fem.quadrature import interval_quadrature, square_quadrature
from .state import StatePair, StateSolver

logger = logging.getLogger(__name__)


class TrackingTerms:
    """
    Pointwise tracking quantities at one state.

    Args:
        solver: State solver (meshes, data, ``v``).
        pair:   State at which everything is evaluated.
    """

    def __init__(self, solver: StateSolver, pair: StatePair) -> None:
        self.solver = solver
        self.pair = pair
        self.iq = interval_quadrature(solver.interval)
        self.sq = square_quadrature(solver.square)
        self.curve_values, _ = curve_operators(solver.interval, solver.square)

        data = solver.data
        self.interface_misfit = self.iq.values @ pair.gamma.values - data.gamma_d_at(self.iq.x)

        x2 = self.sq.x2
        self.rho = 1.0 + self.curve_values @ pair.gamma.values
        targets = data.tracking_targets(self.sq.x1, self.rho * x2)
        self.misfit = self.sq.values @ (pair.y.values + solver.v.values) - targets.value
        self.dm = -targets.d_x2 * x2
        self.d2m = -targets.d_x2x2 * x2 * x2

    # ------------------------------------------------------------------
    # Values
    # ------------------------------------------------------------------

    @cached_property
    def cost(self) -> float:
        """Tracking part of the cost (without the control term)."""
        interface = 0.5 * self.iq.integrate(self.interface_misfit**2)
        bulk = 0.5 * float(np.dot(self.sq.weights, self.rho * self.misfit**2))
        return interface + bulk

    # pointwise partial derivatives of 1/2 rho m^2 in (gamma, w = y + v)

    @cached_property
    def f_gamma(self) -> np.ndarray:
        return 0.5 * self.misfit**2 + self.rho * self.misfit * self.dm

    @cached_property
    def f_w(self) -> np.ndarray:
        return self.rho * self.misfit

    @cached_property
    def f_gamma_gamma(self) -> np.ndarray:
        m, dm = self.misfit, self.dm
        return 2.0 * m * dm + self.rho * dm * dm + self.rho * m * self.d2m

    @cached_property
    def f_w_gamma(self) -> np.ndarray:
        return self.misfit + self.rho * self.dm

    # ------------------------------------------------------------------
    # Gradients (load vectors)
    # ------------------------------------------------------------------

    @cached_property
    def grad_gamma(self) -> np.ndarray:
        """Partial derivative in gamma, one entry per interval node."""
        interface = self.iq.values.T @ (self.iq.weights * self.interface_misfit)
        return interface + self.curve_values.T @ (self.sq.weights * self.f_gamma)

    @cached_property
    def grad_y(self) -> np.ndarray:
        """Partial derivative in y, one entry per square node."""
        return self.sq.values.T @ (self.sq.weights * self.f_w)

    def column_f_gamma(self) -> np.ndarray:
        """``int_0^1 f_gamma dx2`` on every column of Gauss points."""
        return self.sq.column_integral(self.f_gamma)

    def directional(self, gamma_dir: np.ndarray, y_dir: np.ndarray) -> float:
        """First derivative of the tracking cost along ``(gamma_dir, y_dir)``."""
        return float(self.grad_gamma @ gamma_dir + self.grad_y @ y_dir)

    def hessian(self, gamma1: np.ndarray, y1: np.ndarray, gamma2: np.ndarray, y2: np.ndarray) -> float:
        """Second derivative of the tracking cost along two state directions."""
        i1 = self.iq.values @ gamma1
        i2 = self.iq.values @ gamma2
        g1 = self.curve_values @ gamma1
        g2 = self.curve_values @ gamma2
        w1 = self.sq.values @ y1
        w2 = self.sq.values @ y2
        bulk = (
            self.f_gamma_gamma * (g1 * g2)
            + self.f_w_gamma * (g1 * w2 + g2 * w1)
            + self.rho * (w1 * w2)
        )
        return self.iq.integrate(i1 * i2) + float(np.dot(self.sq.weights, bulk))
