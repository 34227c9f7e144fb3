"""
State Solver

The coupled interface/bulk state system is solved by the Picard iteration
``(gamma, y) -> (T1, T2 o T1)``:

    T1:  B_Gamma[g~, zeta] = -B_Omega[y + v, E zeta; A[gamma]] + <u, zeta>
    T2:  B_Omega[y~ + v, z; A[g~]] = 0,      y~ = 0 on the whole boundary

started from ``(0, 0)``.  Distances are measured in the weighted norm

    |(gamma, y)| = Lambda1 * max(|v|_W1p, eps_w) * |gamma|_W1inf + |y|_W1p

and the iteration stops once that distance and the plain ``W1inf`` step of
``gamma`` are both below ``fp_tol``.
"""

from __future__ import annotations

import logging
import threading
from collections import OrderedDict
from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from ..fem.assembly import BulkOperator, assemble_B_Gamma, assemble_mass_1d
from ..fem.extension import check_nested, extension_matrix
from ..fem.fields import BoundaryCondition, BoundaryCurve, BulkField, ControlProfile
from ..fem.linalg import ReducedSolver
from ..fem.mesh import IntervalMesh, SquareMesh
from ..fem.norms import NormKind, compute_norm, w1_bulk_seminorm
from ..model.problem import ProblemData
from ..output.models import BallReport, FeasibilityReport
from .fixed_point import FixedPointTrace, picard
from .interface import IFixedPointMap

if TYPE_CHECKING:
    from ..constants.ledger import ConstantsLedger

logger = logging.getLogger(__name__)

_CACHE_SIZE = 8


@dataclass(frozen=True)
class SolverSettings:
    """
    Tolerances and caps shared by the state, tangent and adjoint iterations.

    Attributes:
        fp_tol:        Stopping tolerance on successive iterates.
        res_tol:       Residual level checked (and warned about) at convergence.
        max_iter:      Iteration cap.
        weight_floor:  Floor ``eps_w`` for ``|v|_W1p`` in the weighted norm.
        method:        Linear solver, ``"direct"`` or ``"cg"``.
    """

    fp_tol:       float = 1e-11
    res_tol:      float = 1e-9
    max_iter:     int   = 200
    weight_floor: float = 1e-8
    method:       str   = "direct"


@dataclass(frozen=True)
class StatePair:
    """Interface displacement and bulk state (zero on the whole boundary)."""

    gamma: BoundaryCurve
    y: BulkField

    @property
    def slope_max(self) -> float:
        return float(np.max(np.abs(self.gamma.slopes)))

    @property
    def satisfies_state_constraint(self) -> bool:
        return self.slope_max <= 1.0


@dataclass(frozen=True)
class Linearization:
    """Objects shared by derivative solves at a fixed state."""

    operator: BulkOperator
    total: np.ndarray          # y + v at the nodes
    coupling: sp.csr_matrix    # h -> B_Omega[y + v, phi_b; DA<h>]


def lru_put(cache: OrderedDict, key: bytes, value: object, size: int = _CACHE_SIZE) -> None:
    """Insert into a bounded LRU mapping (caller holds the lock)."""
    cache[key] = value
    cache.move_to_end(key)
    while len(cache) > size:
        cache.popitem(last=False)


def w1inf_interval(interval: IntervalMesh, values: np.ndarray) -> float:
    return float(np.max(np.abs(np.diff(values)))) / interval.h


class StateSolver:
    """
    Control-to-state map for fixed data.

    Args:
        data:        Problem data.
        interval:    Interface mesh.
        square:      Bulk mesh (refines *interval*).
        settings:    Iteration settings.
        norm_weight: ``Lambda1 = 1 + beta C_A`` used in the weighted norm.
        ledger:      Optional complete ledger; enables feasibility warnings.
    """

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------

    def __init__(
        self,
        data: ProblemData,
        interval: IntervalMesh,
        square: SquareMesh,
        settings: SolverSettings = SolverSettings(),
        norm_weight: float = 1.0,
        ledger: Optional["ConstantsLedger"] = None,
    ) -> None:
        check_nested(interval, square)
        self.data = data
        self.interval = interval
        self.square = square
        self.settings = settings
        self.norm_weight = float(norm_weight)
        self.ledger = ledger

        self.v = data.v_field(square)
        self.v_norm = compute_norm(NormKind.W1P0, self.v, data.p)
        self.mass = assemble_mass_1d(interval)
        self.b_gamma = assemble_B_Gamma(interval, data.kappa)
        self.interface_solver = ReducedSolver(self.b_gamma, interval.endpoints, settings.method)
        self.extension = extension_matrix(interval, square)

        self._lock = threading.Lock()
        self._operators: "OrderedDict[bytes, BulkOperator]" = OrderedDict()
        self._states: "OrderedDict[bytes, Tuple[StatePair, FixedPointTrace]]" = OrderedDict()
        self._linearizations: "OrderedDict[bytes, Linearization]" = OrderedDict()

    # ------------------------------------------------------------------
    # Norms
    # ------------------------------------------------------------------

    @property
    def weight(self) -> float:
        """Weight of the interface part of the product norm."""
        return self.norm_weight * max(self.v_norm, self.settings.weight_floor)

    def w1_norm(self, gamma_values: np.ndarray, y_values: np.ndarray) -> float:
        return self.weight * w1inf_interval(self.interval, gamma_values) + w1_bulk_seminorm(
            self.square, y_values, self.data.p
        )

    def distance(self, a: StatePair, b: StatePair) -> float:
        return self.w1_norm(a.gamma.values - b.gamma.values, a.y.values - b.y.values)

    def l2_norm(self, u: ControlProfile) -> float:
        return compute_norm(NormKind.L2, u)

    # ------------------------------------------------------------------
    # Caches
    # ------------------------------------------------------------------

    def operator(self, curve: BoundaryCurve) -> BulkOperator:
        """``A[gamma]`` with its stiffness and factorization, cached per curve."""
        key = curve.values.tobytes()
        with self._lock:
            op = self._operators.get(key)
            if op is not None:
                self._operators.move_to_end(key)
                return op
        op = BulkOperator(curve, self.square, self.settings.method)
        with self._lock:
            lru_put(self._operators, key, op)
        return op

    def linearization(self, pair: StatePair) -> Linearization:
        key = pair.gamma.values.tobytes() + pair.y.values.tobytes()
        with self._lock:
            lin = self._linearizations.get(key)
        if lin is None:
            op = self.operator(pair.gamma)
            total = pair.y.values + self.v.values
            lin = Linearization(op, total, op.coupling_matrix(total))
            with self._lock:
                lru_put(self._linearizations, key, lin)
        return lin

    # ------------------------------------------------------------------
    # Half-steps
    # ------------------------------------------------------------------

    def apply_T1(
        self,
        gamma: BoundaryCurve,
        y: BulkField,
        u: ControlProfile,
        v: Optional[BulkField] = None,
    ) -> BoundaryCurve:
        """Interface update with the bulk state frozen."""
        v = self.v if v is None else v
        op = self.operator(gamma)
        load = -(self.extension.T @ op.apply(y.values + v.values)) + self.mass @ u.values
        return BoundaryCurve(self.interval, self.interface_solver.solve(load))

    def apply_T2(self, gamma_tilde: BoundaryCurve, v: Optional[BulkField] = None) -> BulkField:
        """Bulk update: ``y~ + v`` is ``A[gamma~]``-harmonic, ``y~`` zero on the boundary."""
        v = self.v if v is None else v
        op = self.operator(gamma_tilde)
        y = op.solve_dirichlet(-op.apply(v.values))
        return BulkField(self.square, y, BoundaryCondition.ZERO_ON_BOUNDARY)

    def apply_T(self, pair: StatePair, u: ControlProfile) -> StatePair:
        """One full Picard step."""
        gamma = self.apply_T1(pair.gamma, pair.y, u)
        return StatePair(gamma, self.apply_T2(gamma))

    def zero_pair(self) -> StatePair:
        return StatePair(
            BoundaryCurve.zeros(self.interval),
            BulkField.zeros(self.square, BoundaryCondition.ZERO_ON_BOUNDARY),
        )

    # ------------------------------------------------------------------
    # Public API
    # ------------------------------------------------------------------

    def solve_state(self, u: ControlProfile) -> Tuple[StatePair, FixedPointTrace]:
        """
        Fixed point of the state map for control *u*.

        Returns:
            ``(pair, trace)``; results are cached per control.

        Raises:
            ConvergenceError:        Iteration cap reached.
            DegenerateGeometryError: ``1 + gamma <= 0`` met mid-iteration.
        """
        key = u.values.tobytes()
        with self._lock:
            hit = self._states.get(key)
        if hit is not None:
            return hit

        if self.ledger is not None and self.ledger.is_complete:
            report = self.check_admissibility(u, self.ledger)
            if not report.passed:
                logger.warning("Feasibility premises fail for this control: %s.", ", ".join(report.failures()))

        pair, trace = picard(_StateIteration(self, u), self.settings.fp_tol, self.settings.max_iter)
        worst = max(trace.residuals.values())
        if worst > self.settings.res_tol:
            logger.warning("State residual %.3e exceeds res_tol %.1e.", worst, self.settings.res_tol)
        if not pair.satisfies_state_constraint:
            logger.warning("State constraint violated: max |gamma'| = %.6g > 1.", pair.slope_max)

        with self._lock:
            lru_put(self._states, key, (pair, trace))
        return pair, trace

    def state_residuals(self, pair: StatePair, u: ControlProfile) -> Dict[str, float]:
        """Max-norm residuals of both state equations on the free test functions."""
        op = self.operator(pair.gamma)
        bulk = op.apply(pair.y.values + self.v.values)
        interface = self.b_gamma @ pair.gamma.values + self.extension.T @ bulk - self.mass @ u.values
        return {
            "interface": float(np.max(np.abs(interface[self.interval.interior]), initial=0.0)),
            "bulk": float(np.max(np.abs(bulk[self.square.interior_nodes]), initial=0.0)),
        }

    def check_admissibility(self, u: ControlProfile, ledger: "ConstantsLedger") -> FeasibilityReport:
        """Compare ``|v|`` and ``|u|`` against the ledger thresholds (never raises)."""
        return FeasibilityReport(
            v_norm=self.v_norm,
            v_invariance_bound=ledger.v_invariance,
            v_contraction_bound=ledger.v_contraction,
            u_norm=self.l2_norm(u),
            u_radius=ledger.u_radius,
            uad_radius=ledger.uad_radius,
        )

    def check_ball(self, pair: StatePair, ledger: "ConstantsLedger") -> BallReport:
        """Membership of *pair* in the invariant ball of the state map."""
        return BallReport(
            slope_max=pair.slope_max,
            y_norm=w1_bulk_seminorm(self.square, pair.y.values, self.data.p),
            y_bound=ledger.beta * ledger.C_A * self.v_norm,
        )


class _StateIteration(IFixedPointMap[StatePair]):
    label = "state"

    def __init__(self, solver: StateSolver, u: ControlProfile) -> None:
        self.solver = solver
        self.u = u

    def initial(self) -> StatePair:
        return self.solver.zero_pair()

    def step(self, iterate: StatePair) -> StatePair:
        return self.solver.apply_T(iterate, self.u)

    def distance(self, a: StatePair, b: StatePair) -> float:
        return self.solver.distance(a, b)

    def secondary_distance(self, a: StatePair, b: StatePair) -> float:
        return w1inf_interval(self.solver.interval, a.gamma.values - b.gamma.values)

    def residuals(self, iterate: StatePair) -> Dict[str, float]:
        return self.solver.state_residuals(iterate, self.u)
