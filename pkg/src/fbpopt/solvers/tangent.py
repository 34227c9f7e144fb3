"""
Linearized State Equations

At a state ``(g, w = y + v)`` the linearized system for ``(gamma, y)`` is

    B_Gamma[gamma, zeta] + D[(gamma, y), z + E zeta] = F_Omega(z + E zeta) + F_Gamma(zeta)
    D[(gamma, y), phi] = B_Omega[y, phi; A[g]] + B_Omega[w, phi; DA[g]<gamma>]

for all zero-trace ``z`` and all ``zeta``.  It is solved with the same
Picard splitting as the state: an interface solve with the bulk frozen,
then a bulk solve with the new interface.

First derivative of the control-to-state map:  ``F_Omega = 0``,
``F_Gamma = <h, .>``.  Second derivative: ``F_Gamma = 0`` and

    F_Omega = -( B_Omega[y1, .; DA<gamma2>] + B_Omega[y2, .; DA<gamma1>]
                 + B_Omega[w, .; D^2A<gamma1, gamma2>] )

with ``(gamma_i, y_i)`` the first derivatives in directions ``h_i``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict, Sequence, Tuple

import numpy as np
import pandas as pd

from ..fem.fields import BoundaryCondition, BoundaryCurve, BulkField, ControlProfile
from ..fem.norms import dual_norm_bulk, dual_norm_interval, w1_bulk_seminorm
from .fixed_point import FixedPointTrace, picard
from .interface import IFixedPointMap
from .state import Linearization, StatePair, StateSolver, w1inf_interval

if TYPE_CHECKING:
    from ..constants.ledger import ConstantsLedger

logger = logging.getLogger(__name__)

DEFAULT_EPS_LADDER = (1e-1, 5e-2, 2.5e-2, 1.25e-2, 6.25e-3)


@dataclass(frozen=True)
class LinearRHS:
    """
    Assembled right-hand sides of the linearized system.

    Attributes:
        F_Omega: Bulk load, one entry per square node (all rows are used
                 when tested with extensions).
        F_Gamma: Interface load, one entry per interval node.
    """

    F_Omega: np.ndarray
    F_Gamma: np.ndarray

    def scaled(self, factor: float) -> "LinearRHS":
        return LinearRHS(factor * self.F_Omega, factor * self.F_Gamma)


@dataclass(frozen=True)
class TangentPair:
    """Solution of the linearized system."""

    gamma: BoundaryCurve
    y: BulkField


class TangentSolver:
    """
    Derivatives of the control-to-state map.

    Args:
        state: State solver providing data, meshes and cached operators.
    """

    def __init__(self, state: StateSolver) -> None:
        self.state = state

    # ------------------------------------------------------------------
    # Linear system
    # ------------------------------------------------------------------

    def solve_linearized(self, base: StatePair, rhs: LinearRHS) -> Tuple[TangentPair, FixedPointTrace]:
        """
        Solve the linearized system at *base* by contraction.

        Raises:
            ConvergenceError:    Iteration cap reached.
            SingularSystemError: A linear solve failed.
        """
        st = self.state
        if rhs.F_Omega.shape != (st.square.n_nodes,) or rhs.F_Gamma.shape != (st.interval.n_nodes,):
            raise ValueError("LinearRHS dimensions do not match the meshes.")
        iteration = _TangentIteration(st, st.linearization(base), rhs)
        return picard(iteration, st.settings.fp_tol, st.settings.max_iter)

    # ------------------------------------------------------------------
    # Derivatives of the control-to-state map
    # ------------------------------------------------------------------

    def first_rhs(self, h: ControlProfile) -> LinearRHS:
        st = self.state
        return LinearRHS(np.zeros(st.square.n_nodes), st.mass @ h.values)

    def second_rhs(self, base: StatePair, t1: TangentPair, t2: TangentPair) -> LinearRHS:
        lin = self.state.linearization(base)
        op = lin.operator
        load = (
            op.da_apply(t1.y.values, t2.gamma.values)
            + op.da_apply(t2.y.values, t1.gamma.values)
            + op.d2a_apply(lin.total, t1.gamma.values, t2.gamma.values)
        )
        return LinearRHS(-load, np.zeros(self.state.interval.n_nodes))

    def apply_Gprime(self, base_u: ControlProfile, h: ControlProfile) -> TangentPair:
        """First derivative ``G'(base_u) h``."""
        base, _ = self.state.solve_state(base_u)
        pair, _ = self.solve_linearized(base, self.first_rhs(h))
        return pair

    def apply_Gsecond(self, base_u: ControlProfile, h1: ControlProfile, h2: ControlProfile) -> TangentPair:
        """Second derivative ``G''(base_u)[h1, h2]``."""
        base, _ = self.state.solve_state(base_u)
        t1 = self.apply_Gprime(base_u, h1)
        t2 = t1 if h2 is h1 else self.apply_Gprime(base_u, h2)
        pair, _ = self.solve_linearized(base, self.second_rhs(base, t1, t2))
        return pair

    # ------------------------------------------------------------------
    # Verification
    # ------------------------------------------------------------------

    def verify_frechet(
        self,
        base_u: ControlProfile,
        h: ControlProfile,
        order: int = 1,
        eps_ladder: Sequence[float] = DEFAULT_EPS_LADDER,
    ) -> pd.DataFrame:
        """
        Remainder ratios of the first or second derivative along *h*.

        Order 1:  ``|G(u + eps h) - G(u) - eps G'(u) h| / |eps h|``.
        Order 2:  ``|G'(u + eps h) h - G'(u) h - eps G''(u)[h, h]| / |eps h|``.

        Returns:
            Columns ``eps``, ``remainder`` and ``ratio``.
        """
        if order not in (1, 2):
            raise ValueError(f"order must be 1 or 2, got {order!r}.")
        st = self.state
        h_norm = st.l2_norm(h)
        rows = []
        if h_norm == 0.0:
            for eps in eps_ladder:
                rows.append({"eps": float(eps), "remainder": 0.0, "ratio": 0.0})
            return pd.DataFrame(rows, columns=["eps", "remainder", "ratio"])

        if order == 1:
            base, _ = st.solve_state(base_u)
            lin = self.apply_Gprime(base_u, h)
        else:
            base = self.apply_Gprime(base_u, h)
            lin = self.apply_Gsecond(base_u, h, h)

        for eps in eps_ladder:
            shifted = base_u + float(eps) * h
            moved = st.solve_state(shifted)[0] if order == 1 else self.apply_Gprime(shifted, h)
            dg = moved.gamma.values - base.gamma.values - eps * lin.gamma.values
            dy = moved.y.values - base.y.values - eps * lin.y.values
            remainder = st.w1_norm(dg, dy)
            rows.append({"eps": float(eps), "remainder": remainder, "ratio": remainder / (eps * h_norm)})
            logger.debug("Frechet order %d: eps=%.3e ratio=%.3e.", order, eps, rows[-1]["ratio"])
        return pd.DataFrame(rows, columns=["eps", "remainder", "ratio"])

    def a_priori_bound(self, base: StatePair, rhs: LinearRHS, ledger: "ConstantsLedger") -> Dict[str, float]:
        """Computed norms of the linearized solution next to their ledger bounds."""
        st = self.state
        pair, _ = self.solve_linearized(base, rhs)
        f_omega = dual_norm_bulk(st.square, rhs.F_Omega)
        f_gamma = dual_norm_interval(st.interval, rhs.F_Gamma)
        lam1 = ledger.lambda1
        gamma_bound = ledger.alpha / ledger.theta2 * (ledger.C_E * lam1 * f_omega + f_gamma)
        y_bound = ledger.beta / ledger.theta2 * (f_omega + ledger.alpha * ledger.C_A * lam1 * st.v_norm * f_gamma)
        gamma_norm = w1inf_interval(st.interval, pair.gamma.values)
        y_norm = w1_bulk_seminorm(st.square, pair.y.values, st.data.p)
        return {
            "F_Omega_dual": f_omega,
            "F_Gamma_dual": f_gamma,
            "gamma_norm": gamma_norm,
            "gamma_bound": gamma_bound,
            "y_norm": y_norm,
            "y_bound": y_bound,
            "within_bounds": bool(gamma_norm <= gamma_bound and y_norm <= y_bound),
        }

    def second_derivative_bound(
        self,
        base_u: ControlProfile,
        h1: ControlProfile,
        h2: ControlProfile,
        ledger: "ConstantsLedger",
    ) -> Dict[str, float]:
        """Norms of ``G''(u)[h1, h2]`` next to their ledger bounds."""
        st = self.state
        pair = self.apply_Gsecond(base_u, h1, h2)
        a, t2 = ledger.alpha, ledger.theta2
        scale = ledger.C_A * ledger.lambda2 * st.v_norm * st.l2_norm(h1) * st.l2_norm(h2)
        gamma_bound = a**3 / t2**3 * ledger.C_E * ledger.lambda1**2 * scale
        y_bound = a**2 / t2**3 * ledger.beta * ledger.lambda1 * scale
        gamma_norm = w1inf_interval(st.interval, pair.gamma.values)
        y_norm = w1_bulk_seminorm(st.square, pair.y.values, st.data.p)
        return {
            "gamma_norm": gamma_norm,
            "gamma_bound": gamma_bound,
            "y_norm": y_norm,
            "y_bound": y_bound,
            "within_bounds": bool(gamma_norm <= gamma_bound and y_norm <= y_bound),
        }


class _TangentIteration(IFixedPointMap[TangentPair]):
    label = "linearized state"

    def __init__(self, state: StateSolver, lin: Linearization, rhs: LinearRHS) -> None:
        self.state = state
        self.lin = lin
        self.rhs = rhs

    def initial(self) -> TangentPair:
        st = self.state
        return TangentPair(
            BoundaryCurve.zeros(st.interval),
            BulkField.zeros(st.square, BoundaryCondition.ZERO_ON_BOUNDARY),
        )

    def _bulk_action(self, gamma: np.ndarray, y: np.ndarray) -> np.ndarray:
        return self.lin.operator.apply(y) + self.lin.coupling @ gamma

    def step(self, iterate: TangentPair) -> TangentPair:
        st, lin, rhs = self.state, self.lin, self.rhs
        bulk = rhs.F_Omega - self._bulk_action(iterate.gamma.values, iterate.y.values)
        gamma = st.interface_solver.solve(st.extension.T @ bulk + rhs.F_Gamma)
        y = lin.operator.solve_dirichlet(rhs.F_Omega - lin.coupling @ gamma)
        return TangentPair(
            BoundaryCurve(st.interval, gamma),
            BulkField(st.square, y, BoundaryCondition.ZERO_ON_BOUNDARY),
        )

    def distance(self, a: TangentPair, b: TangentPair) -> float:
        return self.state.w1_norm(a.gamma.values - b.gamma.values, a.y.values - b.y.values)

    def secondary_distance(self, a: TangentPair, b: TangentPair) -> float:
        return w1inf_interval(self.state.interval, a.gamma.values - b.gamma.values)

    def residuals(self, iterate: TangentPair) -> Dict[str, float]:
        st = self.state
        action = self._bulk_action(iterate.gamma.values, iterate.y.values) - self.rhs.F_Omega
        interface = st.b_gamma @ iterate.gamma.values + st.extension.T @ action - self.rhs.F_Gamma
        return {
            "interface": float(np.max(np.abs(interface[st.interval.interior]), initial=0.0)),
            "bulk": float(np.max(np.abs(action[st.square.interior_nodes]), initial=0.0)),
        }
