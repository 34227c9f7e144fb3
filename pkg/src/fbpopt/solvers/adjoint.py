"""
Adjoint State Solver

The adjoint pair ``(r, s)`` (``r`` zero on Sigma with Gamma trace ``s``)
solves the transpose of the linearized state system with the partial
derivatives of the tracking cost as data.  The reduced gradient is then
``lambda u + s``.

The interface half-step assembles a two-part load ``int f0 zeta + int f1 zeta'``
where

    f0 = gamma - gamma_d                                     (interval points)
       + int_0^1 f_gamma dx2 - int_0^1 A1 grad(y + v) . grad r dx2   (columns)
    f1 = -int_0^1 A2 grad(y + v) . grad r dx2                         (columns)

with ``DA[gamma]<h> = A1 h + A2 h'``.  The vertical integrals use the
per-column Gauss rule of bulk assembly, so the discrete adjoint is the
exact transpose of the discrete tangent system.
"""

from __future__ import annotations

import logging
import threading
from collections import OrderedDict
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
import scipy.sparse as sp

from ..fem.assembly import column_operators
from ..fem.fields import BoundaryCondition, BoundaryCurve, BulkField
from ..fem.norms import w1_bulk_seminorm
from .fixed_point import FixedPointTrace, picard
from .interface import IFixedPointMap
from .state import StatePair, StateSolver, lru_put, w1inf_interval
from .tracking import TrackingTerms

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AdjointPair:
    """Bulk adjoint ``r`` (zero on Sigma, trace ``s`` on Gamma) and interface adjoint ``s``."""

    r: BulkField
    s: BoundaryCurve


@dataclass(frozen=True)
class AdjointLoads:
    """
    Quadrature-point data of the interface adjoint load.

    Interval Gauss points come first, then the column abscissae of the
    square rule.  ``values`` and ``derivs`` evaluate P1 functions on I at
    the stacked points.
    """

    x:       np.ndarray
    weights: np.ndarray
    f0:      np.ndarray
    f1:      np.ndarray
    values:  sp.csr_matrix
    derivs:  sp.csr_matrix

    def assemble(self) -> np.ndarray:
        """Load vector ``int f0 phi_i + int f1 phi_i'``."""
        return self.values.T @ (self.weights * self.f0) + self.derivs.T @ (self.weights * self.f1)


class AdjointSolver:
    """
    Adjoint equations at solved states.

    Args:
        state: State solver; operators and linearizations are shared with it.
    """

    def __init__(self, state: StateSolver) -> None:
        self.state = state
        self._lock = threading.Lock()
        self._cache: "OrderedDict[bytes, Tuple[AdjointPair, FixedPointTrace]]" = OrderedDict()
        self._tracking: "OrderedDict[bytes, TrackingTerms]" = OrderedDict()

    def tracking(self, pair: StatePair) -> TrackingTerms:
        """Tracking terms at *pair*, cached with the adjoint solutions."""
        key = pair.gamma.values.tobytes() + pair.y.values.tobytes()
        with self._lock:
            terms = self._tracking.get(key)
        if terms is None:
            terms = TrackingTerms(self.state, pair)
            with self._lock:
                lru_put(self._tracking, key, terms)
        return terms

    # ------------------------------------------------------------------
    # Half-steps
    # ------------------------------------------------------------------

    def eval_f0_f1(self, pair: StatePair, r: BulkField) -> AdjointLoads:
        """Quadrature-point loads of the interface adjoint equation."""
        st = self.state
        terms = self.tracking(pair)
        op = st.linearization(pair).operator
        a1, a2 = op.da_parts
        quad = op.quad

        gx_w, gy_w = quad.gradient(pair.y.values + st.v.values)
        gx_r, gy_r = quad.gradient(r.values)
        a1_term = gx_w * gx_r + np.asarray(a1.a22) * gy_w * gy_r
        a2_term = np.asarray(a2.a12) * (gy_w * gx_r + gx_w * gy_r) + np.asarray(a2.a22) * gy_w * gy_r

        column_f0 = terms.column_f_gamma() - quad.column_integral(a1_term)
        column_f1 = -quad.column_integral(a2_term)
        col_values, col_derivs = column_operators(st.interval, st.square)
        iq = terms.iq
        return AdjointLoads(
            x=np.concatenate([iq.x, quad.column_x1]),
            weights=np.concatenate([iq.weights, quad.column_weights]),
            f0=np.concatenate([terms.interface_misfit, column_f0]),
            f1=np.concatenate([np.zeros(iq.x.size), column_f1]),
            values=sp.csr_matrix(sp.vstack([iq.values, col_values])),
            derivs=sp.csr_matrix(sp.vstack([iq.derivs, col_derivs])),
        )

    def apply_adjoint_T1(self, r: BulkField, pair: StatePair) -> BoundaryCurve:
        """Interface solve ``B_Gamma[zeta, s~] = int f0 zeta + int f1 zeta'``."""
        st = self.state
        load = self.eval_f0_f1(pair, r).assemble()
        return BoundaryCurve(st.interval, st.interface_solver.solve(load))

    def apply_adjoint_T2(self, s_tilde: BoundaryCurve, pair: StatePair) -> BulkField:
        """Bulk solve with the weighted misfit load, trace ``s~`` on Gamma and 0 on Sigma."""
        st = self.state
        op = st.linearization(pair).operator
        r = op.solve_dirichlet(self.tracking(pair).grad_y, boundary_values=st.extension @ s_tilde.values)
        return BulkField(st.square, r, BoundaryCondition.ZERO_ON_SIGMA)

    # ------------------------------------------------------------------
    # Public API
    # ------------------------------------------------------------------

    def solve_adjoint(self, pair: StatePair) -> Tuple[AdjointPair, FixedPointTrace]:
        """
        Fixed point of the adjoint map at the state *pair*.

        Raises:
            ConvergenceError:    Iteration cap reached.
            SingularSystemError: A linear solve failed.
        """
        key = pair.gamma.values.tobytes() + pair.y.values.tobytes()
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit

        st = self.state
        adjoint, trace = picard(_AdjointIteration(self, pair), st.settings.fp_tol, st.settings.max_iter)
        worst = max(trace.residuals.values())
        if worst > st.settings.res_tol:
            logger.warning("Adjoint residual %.3e exceeds res_tol %.1e.", worst, st.settings.res_tol)
        with self._lock:
            lru_put(self._cache, key, (adjoint, trace))
        return adjoint, trace

    def adjoint_residuals(self, adjoint: AdjointPair, pair: StatePair) -> Dict[str, float]:
        """Max-norm residuals of both adjoint equations on the free test functions."""
        st = self.state
        lin = st.linearization(pair)
        terms = self.tracking(pair)
        interface = st.b_gamma @ adjoint.s.values - terms.grad_gamma + lin.coupling.T @ adjoint.r.values
        bulk = lin.operator.apply(adjoint.r.values) - terms.grad_y
        return {
            "interface": float(np.max(np.abs(interface[st.interval.interior]), initial=0.0)),
            "bulk": float(np.max(np.abs(bulk[st.square.interior_nodes]), initial=0.0)),
        }


class _AdjointIteration(IFixedPointMap[AdjointPair]):
    label = "adjoint"

    def __init__(self, solver: AdjointSolver, pair: StatePair) -> None:
        self.solver = solver
        self.pair = pair

    def initial(self) -> AdjointPair:
        st = self.solver.state
        return AdjointPair(
            BulkField.zeros(st.square, BoundaryCondition.ZERO_ON_SIGMA),
            BoundaryCurve.zeros(st.interval),
        )

    def step(self, iterate: AdjointPair) -> AdjointPair:
        s = self.solver.apply_adjoint_T1(iterate.r, self.pair)
        return AdjointPair(self.solver.apply_adjoint_T2(s, self.pair), s)

    def distance(self, a: AdjointPair, b: AdjointPair) -> float:
        st = self.solver.state
        return w1_bulk_seminorm(st.square, a.r.values - b.r.values, st.data.q)

    def secondary_distance(self, a: AdjointPair, b: AdjointPair) -> float:
        return w1inf_interval(self.solver.state.interval, a.s.values - b.s.values)

    def residuals(self, iterate: AdjointPair) -> Dict[str, float]:
        return self.solver.adjoint_residuals(iterate, self.pair)
