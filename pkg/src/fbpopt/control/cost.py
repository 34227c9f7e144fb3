"""
Reduced Cost

``J(u) = J1(G(u)) + lam/2 |u|^2`` with ``J1`` the tracking cost of
:class:`~fbpopt.solvers.tracking.TrackingTerms`.  Two independent routes
give first derivatives:

- adjoint:      ``J'(u) = s + lam u`` (one adjoint solve, all directions)
- sensitivity:  ``J'(u)h = dJ1 . G'(u)h + lam <u, h>`` (one tangent solve per direction)

The second derivative combines both tangent directions with the second
derivative of the state:

    J''(u)[h1, h2] = d2J1[G'h1, G'h2] + dJ1 . G''[h1, h2] + lam <h1, h2>
"""

from __future__ import annotations

import logging
from typing import Sequence

import numpy as np
import pandas as pd

from ..fem.fields import ControlProfile
from ..solvers.adjoint import AdjointSolver
from ..solvers.state import StatePair, StateSolver
from ..solvers.tangent import TangentSolver
from ..solvers.tracking import TrackingTerms
from ..utils.parallel import parallel_map
from .projection import l2_inner

logger = logging.getLogger(__name__)

DEFAULT_FD_LADDER = (1e-2, 1e-3, 1e-4)


class ReducedCost:
    """
    Cost, gradient and curvature of the reduced problem.

    Args:
        state: State solver; the tangent and adjoint solvers share its caches.
    """

    def __init__(self, state: StateSolver) -> None:
        self.state = state
        self.tangent = TangentSolver(state)
        self.adjoint = AdjointSolver(state)

    @property
    def lam(self) -> float:
        return self.state.data.lam

    def solve(self, u: ControlProfile) -> StatePair:
        pair, _ = self.state.solve_state(u)
        return pair

    def tracking(self, u: ControlProfile) -> TrackingTerms:
        return self.adjoint.tracking(self.solve(u))

    # ------------------------------------------------------------------
    # Public API
    # ------------------------------------------------------------------

    def eval_cost(self, u: ControlProfile) -> float:
        return self.tracking(u).cost + 0.5 * self.lam * l2_inner(u, u)

    def eval_gradient(self, u: ControlProfile) -> ControlProfile:
        """``s + lam u`` as a nodal profile (Riesz representative in the mass inner product)."""
        adjoint, _ = self.adjoint.solve_adjoint(self.solve(u))
        return ControlProfile(u.mesh, adjoint.s.values + self.lam * u.values)

    def eval_gradient_direction(self, u: ControlProfile, h: ControlProfile) -> float:
        """``J'(u)h`` through one tangent solve, without the adjoint."""
        if not np.any(h.values):
            return 0.0
        t = self.tangent.apply_Gprime(u, h)
        return self.tracking(u).directional(t.gamma.values, t.y.values) + self.lam * l2_inner(u, h)

    def eval_Jsecond(self, u: ControlProfile, h1: ControlProfile, h2: ControlProfile) -> float:
        """Bilinear second derivative of the reduced cost."""
        pair = self.solve(u)
        terms = self.adjoint.tracking(pair)
        t1 = self.tangent.apply_Gprime(u, h1)
        t2 = t1 if h2 is h1 else self.tangent.apply_Gprime(u, h2)
        second, _ = self.tangent.solve_linearized(pair, self.tangent.second_rhs(pair, t1, t2))
        curvature = terms.hessian(t1.gamma.values, t1.y.values, t2.gamma.values, t2.y.values)
        return curvature + terms.directional(second.gamma.values, second.y.values) + self.lam * l2_inner(h1, h2)

    # ------------------------------------------------------------------
    # Consistency checks
    # ------------------------------------------------------------------

    def gradient_fd_table(
        self,
        u: ControlProfile,
        h: ControlProfile,
        eps_ladder: Sequence[float] = DEFAULT_FD_LADDER,
    ) -> pd.DataFrame:
        """
        Central differences of ``J`` against ``<J'(u), h>`` along an eps ladder.

        Returns:
            Columns ``eps``, ``fd``, ``adjoint``, ``abs_error`` and ``rel_error``.
        """
        exact = l2_inner(self.eval_gradient(u), h)

        def central(eps: float) -> float:
            return (self.eval_cost(u + eps * h) - self.eval_cost(u - eps * h)) / (2.0 * eps)

        fds = parallel_map(central, [float(e) for e in eps_ladder])
        rows = []
        for eps, fd in zip(eps_ladder, fds):
            err = abs(fd - exact)
            rows.append({
                "eps": float(eps),
                "fd": fd,
                "adjoint": exact,
                "abs_error": err,
                "rel_error": err / max(abs(exact), np.finfo(float).tiny),
            })
        return pd.DataFrame(rows, columns=["eps", "fd", "adjoint", "abs_error", "rel_error"])

    def hessian_fd_error(self, u: ControlProfile, h: ControlProfile, eps: float = 1e-3) -> float:
        """Relative gap between ``J''(u)h^2`` and a central difference of the gradient."""
        plus = self.eval_gradient(u + eps * h)
        minus = self.eval_gradient(u - eps * h)
        fd = (l2_inner(plus, h) - l2_inner(minus, h)) / (2.0 * eps)
        exact = self.eval_Jsecond(u, h, h)
        return abs(fd - exact) / max(abs(exact), np.finfo(float).tiny)

    def duality_gap(self, u: ControlProfile, h: ControlProfile) -> dict:
        """Adjoint and sensitivity values of ``J'(u)h`` with their scaled gap."""
        adjoint = l2_inner(self.eval_gradient(u), h)
        sensitivity = self.eval_gradient_direction(u, h)
        gap = abs(adjoint - sensitivity)
        return {
            "adjoint": adjoint,
            "sensitivity": sensitivity,
            "gap": gap,
            "scaled_gap": gap / (1.0 + abs(sensitivity)),
        }
