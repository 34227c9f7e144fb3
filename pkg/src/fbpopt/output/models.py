"""
Output Models

Report objects produced by the solvers and checks:

- :class:`CheckStatus`         - outcome of a property check
- :class:`FeasibilityReport`   - data smallness premises and control radii
- :class:`BallReport`          - membership of a state in the invariant ball
- :class:`OptResult`           - optimizer result and iteration history
- :class:`SOCReport`           - sampled second-order sufficiency check
- :class:`GrowthReport`        - sampled quadratic growth check
- :class:`StationarityReport`  - sampled variational inequality check
- :class:`LipschitzReport`     - empirical Lipschitz constants
- :class:`ContractionReport`   - empirical contraction of the state map

Every report has ``to_dict()``; JSON/CSV rendering is in
:mod:`fbpopt.output.formatter`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Any, Dict, List, Optional

if TYPE_CHECKING:
    from ..fem.fields import ControlProfile


# ---------------------------------------------------------------------------
# Enumerations
# ---------------------------------------------------------------------------

class CheckStatus(Enum):
    """Outcome of a property check."""

    PASS    = "PASS"
    FAIL    = "FAIL"
    VACUOUS = "VACUOUS"  # the bound degenerates (e.g. a formula constant of 0)

    @classmethod
    def of(cls, ok: bool) -> "CheckStatus":
        return cls.PASS if ok else cls.FAIL


# ---------------------------------------------------------------------------
# State-level reports
# ---------------------------------------------------------------------------

@dataclass
class FeasibilityReport:
    """
    Smallness premises on ``v`` and the control radii.

    Attributes:
        v_norm:              ``||v||_W1p``.
        v_invariance_bound:  Bound making the ball invariant.
        v_contraction_bound: Bound making the state map contractive.
        u_norm:              ``||u||_L2``.
        u_radius:            Radius ``theta1 / alpha`` of the open set U.
        uad_radius:          Radius ``theta1 / (2 alpha)`` of U_ad.
    """

    v_norm:              float
    v_invariance_bound:  float
    v_contraction_bound: float
    u_norm:              float
    u_radius:            float
    uad_radius:          float

    @property
    def v_invariance_ok(self) -> bool:
        return self.v_norm <= self.v_invariance_bound

    @property
    def v_contraction_ok(self) -> bool:
        return self.v_norm <= self.v_contraction_bound

    @property
    def u_in_U(self) -> bool:
        return self.u_norm < self.u_radius

    @property
    def u_in_Uad(self) -> bool:
        return self.u_norm <= self.uad_radius

    @property
    def passed(self) -> bool:
        return self.v_invariance_ok and self.v_contraction_ok and self.u_in_U and self.u_in_Uad

    def failures(self) -> List[str]:
        names = {
            "v_invariance": self.v_invariance_ok,
            "v_contraction": self.v_contraction_ok,
            "u_in_U": self.u_in_U,
            "u_in_Uad": self.u_in_Uad,
        }
        return [name for name, ok in names.items() if not ok]

    def to_dict(self) -> dict:
        return {
            "v_norm":              self.v_norm,
            "v_invariance_bound":  self.v_invariance_bound,
            "v_contraction_bound": self.v_contraction_bound,
            "u_norm":              self.u_norm,
            "u_radius":            self.u_radius,
            "uad_radius":          self.uad_radius,
            "v_invariance_ok":     self.v_invariance_ok,
            "v_contraction_ok":    self.v_contraction_ok,
            "u_in_U":              self.u_in_U,
            "u_in_Uad":            self.u_in_Uad,
            "passed":              self.passed,
        }


@dataclass
class BallReport:
    """Membership of a state pair in the invariant ball."""

    slope_max: float
    y_norm:    float
    y_bound:   float

    @property
    def slope_ok(self) -> bool:
        return self.slope_max <= 1.0

    @property
    def y_ok(self) -> bool:
        return self.y_norm <= self.y_bound

    @property
    def inside(self) -> bool:
        return self.slope_ok and self.y_ok

    def to_dict(self) -> dict:
        return {
            "slope_max": self.slope_max,
            "y_norm":    self.y_norm,
            "y_bound":   self.y_bound,
            "slope_ok":  self.slope_ok,
            "y_ok":      self.y_ok,
            "inside":    self.inside,
        }


# ---------------------------------------------------------------------------
# Optimization
# ---------------------------------------------------------------------------

@dataclass
class OptResult:
    """
    Result of the projected-gradient optimizer.

    Attributes:
        control:      Final (or best) control.
        costs:        Cost at every accepted iterate, starting with the initial one.
        grad_norms:   L2 norm of the reduced gradient at every iterate.
        vi_residuals: Stationarity residual at every iterate.
        step_sizes:   Accepted step size per iteration.
        converged:    Whether the residual met the tolerance.
        feasibility:  Snapshot of the feasibility report at the final control.
    """

    control:      "ControlProfile"
    costs:        List[float]            = field(default_factory=list)
    grad_norms:   List[float]            = field(default_factory=list)
    vi_residuals: List[float]            = field(default_factory=list)
    step_sizes:   List[float]            = field(default_factory=list)
    converged:    bool                   = False
    feasibility:  Optional[Dict[str, Any]] = None

    @property
    def iterations(self) -> int:
        return len(self.step_sizes)

    @property
    def vi_residual(self) -> float:
        return self.vi_residuals[-1] if self.vi_residuals else float("nan")

    @property
    def cost(self) -> float:
        return self.costs[-1] if self.costs else float("nan")

    def trace_rows(self) -> List[dict]:
        rows = []
        for k, (cost, grad, res) in enumerate(zip(self.costs, self.grad_norms, self.vi_residuals)):
            rows.append({
                "iteration":   k,
                "cost":        cost,
                "grad_norm":   grad,
                "vi_residual": res,
                "step":        self.step_sizes[k - 1] if k > 0 else 0.0,
            })
        return rows

    def to_dict(self) -> dict:
        return {
            "iterations":  self.iterations,
            "converged":   self.converged,
            "cost":        self.cost,
            "vi_residual": self.vi_residual,
            "feasibility": self.feasibility,
        }


# ---------------------------------------------------------------------------
# Second-order checks
# ---------------------------------------------------------------------------

@dataclass
class SOCReport:
    """Sampled curvature of the reduced cost on the cone of admissible directions."""

    ratios:       List[float]
    threshold:    float
    at_boundary:  bool
    n_rejected:   int
    v_norm:       float
    v_soc_bound:  Optional[float]

    @property
    def min_ratio(self) -> float:
        return min(self.ratios) if self.ratios else float("nan")

    @property
    def passed(self) -> bool:
        return bool(self.ratios) and self.min_ratio >= self.threshold

    @property
    def premise_ok(self) -> Optional[bool]:
        return None if self.v_soc_bound is None else self.v_norm <= self.v_soc_bound

    def to_dict(self) -> dict:
        return {
            "n_directions": len(self.ratios),
            "n_rejected":   self.n_rejected,
            "min_ratio":    self.min_ratio,
            "threshold":    self.threshold,
            "at_boundary":  self.at_boundary,
            "v_norm":       self.v_norm,
            "v_soc_bound":  self.v_soc_bound,
            "premise_ok":   self.premise_ok,
            "status":       CheckStatus.of(self.passed).value,
        }


@dataclass
class GrowthReport:
    """
    Sampled quadratic growth around a control.

    ``rows`` holds one entry per (direction, scale) with the two margins
    ``J(u+h) - J(u) - lam/8 |h|^2`` and ``<J'(u+h) - J'(u), h> - lam/4 |h|^2``.
    ``scale`` is the nominal step; ``h_norm`` is the step left after
    projection onto the ball and ``u_norm`` the norm of the moved control.
    """

    rows:         List[dict]
    stationary:   bool
    n_directions: int

    def _scale_ok(self, scale: float) -> bool:
        return all(r["cost_margin"] >= 0.0 and r["gradient_margin"] >= 0.0 for r in self.rows if r["scale"] == scale)

    @property
    def largest_radius(self) -> float:
        """Largest sampled scale at which both inequalities held for every direction."""
        scales = sorted({r["scale"] for r in self.rows}, reverse=True)
        for scale in scales:
            if self._scale_ok(scale):
                return scale
        return 0.0

    @property
    def passed(self) -> bool:
        return bool(self.rows) and all(r["cost_margin"] >= 0.0 and r["gradient_margin"] >= 0.0 for r in self.rows)

    def to_dict(self) -> dict:
        return {
            "n_directions":   self.n_directions,
            "n_samples":      len(self.rows),
            "stationary":     self.stationary,
            "largest_radius": self.largest_radius,
            "status":         CheckStatus.of(self.passed).value,
        }


@dataclass
class StationarityReport:
    """Minimum of ``<lam u + s, w - u>`` over sampled admissible ``w``."""

    values:    List[float]
    tolerance: float

    @property
    def min_value(self) -> float:
        return min(self.values) if self.values else float("nan")

    @property
    def passed(self) -> bool:
        return bool(self.values) and self.min_value >= -self.tolerance

    def to_dict(self) -> dict:
        return {
            "n_samples": len(self.values),
            "min_value": self.min_value,
            "tolerance": self.tolerance,
            "status":    CheckStatus.of(self.passed).value,
        }


# ---------------------------------------------------------------------------
# Empirical constants
# ---------------------------------------------------------------------------

@dataclass
class LipschitzReport:
    """
    Largest sampled difference quotient of ``G``, ``G'`` or ``G''``.

    Attributes:
        kind:               ``G``, ``Gprime`` or ``Gsecond``.
        quotients:          One quotient per non-degenerate pair.
        n_skipped:          Pairs with ``u1 == u2``.
        bound:              Formula or recorded constant (``None`` if unknown).
        interface_quotients: For ``G`` only, ``|gamma1 - gamma2|_W1inf / |u1 - u2|``.
        interface_bound:    ``alpha / theta2`` (``G`` only).
    """

    kind:                str
    quotients:           List[float]
    n_skipped:           int
    bound:               Optional[float]
    interface_quotients: List[float]     = field(default_factory=list)
    interface_bound:     Optional[float] = None

    @property
    def observed(self) -> float:
        return max(self.quotients) if self.quotients else 0.0

    @property
    def status(self) -> CheckStatus:
        if self.bound is None or self.bound <= 0.0:
            return CheckStatus.VACUOUS
        return CheckStatus.of(self.observed <= self.bound)

    @property
    def interface_observed(self) -> Optional[float]:
        return max(self.interface_quotients) if self.interface_quotients else None

    def to_dict(self) -> dict:
        out = {
            "kind":      self.kind,
            "n_pairs":   len(self.quotients),
            "n_skipped": self.n_skipped,
            "observed":  self.observed,
            "bound":     self.bound,
            "status":    self.status.value,
        }
        if self.interface_bound is not None:
            out["interface_observed"] = self.interface_observed
            out["interface_bound"] = self.interface_bound
        return out


@dataclass
class ContractionReport:
    """Sampled contraction ratios of the state map on the invariant ball."""

    ratios:     List[float]
    bound:      float
    n_outside:  int

    @property
    def max_ratio(self) -> float:
        return max(self.ratios) if self.ratios else 0.0

    @property
    def contraction_ok(self) -> bool:
        return self.max_ratio <= self.bound

    @property
    def range_ok(self) -> bool:
        return self.n_outside == 0

    @property
    def passed(self) -> bool:
        return self.contraction_ok and self.range_ok

    def to_dict(self) -> dict:
        return {
            "n_pairs":        len(self.ratios),
            "max_ratio":      self.max_ratio,
            "bound":          self.bound,
            "contraction_ok": self.contraction_ok,
            "n_outside":      self.n_outside,
            "range_ok":       self.range_ok,
            "status":         CheckStatus.of(self.passed).value,
        }
