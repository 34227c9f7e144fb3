"""
Second-Order Checks

Sampled verification around a candidate optimum ``u``:

- :func:`verify_soc`              - ``J''(u)h^2 / |h|^2 >= lam/2`` on the cone of admissible directions
- :func:`check_quadratic_growth`  - growth of ``J`` and monotonicity of ``J'`` near ``u``
- :func:`check_stationarity`      - the variational inequality at sampled admissible controls

Directions are drawn from one seeded generator before any evaluation; the
evaluations run through :func:`~fbpopt.utils.parallel.parallel_map`.
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING, List, Optional, Tuple

import numpy as np

from ..fem.fields import ControlProfile
from ..output.models import GrowthReport, SOCReport, StationarityReport
from ..utils.parallel import parallel_map
from .cost import ReducedCost
from .optimizer import stationarity_residual
from .projection import l2_inner, l2_norm, on_boundary, project_Uad

if TYPE_CHECKING:
    from ..constants.ledger import ConstantsLedger

logger = logging.getLogger(__name__)

CONE_TOL = 1e-12
GROWTH_SCALES = 4


def _unit(h: ControlProfile) -> ControlProfile:
    return h * (1.0 / l2_norm(h))


def in_cone(u: ControlProfile, h: ControlProfile, radius: float) -> bool:
    """
    Membership of *h* in the closed cone of admissible directions at *u*.

    Interior points admit every direction; on the sphere the direction must
    not point outward, ``<u, h> <= 0``.
    """
    if not on_boundary(u, radius):
        return True
    return l2_inner(u, h) <= CONE_TOL * l2_norm(u) * max(l2_norm(h), 1.0)


def sample_cone_directions(
    u: ControlProfile,
    radius: float,
    n_samples: int,
    rng: np.random.Generator,
) -> Tuple[List[ControlProfile], int]:
    """
    Unit directions in the cone at *u* and the number of rejected candidates.

    Interior points: Gaussian nodal fields.  Boundary points: Gaussian
    fields with the outward radial component removed, one tangential and
    one inward radial direction.  The outward radial direction is always
    offered as a candidate and is rejected on the sphere.
    """
    mesh = u.mesh
    draws = [ControlProfile(mesh, rng.standard_normal(mesh.n_nodes)) for _ in range(n_samples)]
    candidates = []
    if on_boundary(u, radius):
        e = _unit(u)
        candidates = [g - e * max(l2_inner(g, e), 0.0) for g in draws]
        if draws:
            candidates.append(draws[0] - e * l2_inner(draws[0], e))
        candidates.extend([-e, e])
    else:
        candidates = draws
        if l2_norm(u) > 0.0:
            candidates.append(_unit(u))

    accepted = [_unit(h) for h in candidates if l2_norm(h) > 0.0 and in_cone(u, h, radius)]
    return accepted, len(candidates) - len(accepted)


def verify_soc(
    cost: ReducedCost,
    u_bar: ControlProfile,
    radius: float,
    ledger: Optional["ConstantsLedger"] = None,
    n_samples: int = 50,
    rng: Optional[np.random.Generator] = None,
) -> SOCReport:
    """
    Smallest sampled Rayleigh quotient of ``J''(u_bar)`` on the cone.

    Never raises on a failing check; the report carries the outcome and the
    smallness premise ``|v| <= theta3 lam / 2`` when a ledger is given.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    if l2_norm(u_bar) > radius * (1.0 + 1e-10):
        logger.warning("Control lies outside the admissible ball (|u| = %.6g > %.6g).", l2_norm(u_bar), radius)
    directions, n_rejected = sample_cone_directions(u_bar, radius, n_samples, rng)
    ratios = parallel_map(lambda h: cost.eval_Jsecond(u_bar, h, h) / l2_inner(h, h), directions)
    report = SOCReport(
        ratios=[float(r) for r in ratios],
        threshold=0.5 * cost.lam,
        at_boundary=on_boundary(u_bar, radius),
        n_rejected=n_rejected,
        v_norm=cost.state.v_norm,
        v_soc_bound=ledger.v_soc if ledger is not None else None,
    )
    if report.premise_ok is False:
        logger.warning("Smallness premise for the second-order check fails: |v| = %.3e > %.3e.",
                       report.v_norm, report.v_soc_bound)
    logger.info("Second-order check: min ratio %.6g against %.6g.", report.min_ratio, report.threshold)
    return report


def check_quadratic_growth(
    cost: ReducedCost,
    u_bar: ControlProfile,
    radius: float,
    n_directions: int = 50,
    opt_tol: float = 1e-9,
    rng: Optional[np.random.Generator] = None,
) -> GrowthReport:
    """
    Sample ``J(u+h) >= J(u) + lam/8 |h|^2`` and ``<J'(u+h) - J'(u), h> >= lam/4 |h|^2``.

    Cone directions are scaled to ``0.1 radius 2^-k`` and the moved control
    is projected back onto the ball, so ``h`` is the admissible displacement
    ``P(u + t d) - u`` and rows carry its norm next to the nominal scale.
    A non-stationary *u_bar* is reported with a warning, not rejected.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    lam = cost.lam
    g_bar = cost.eval_gradient(u_bar)
    stationary = stationarity_residual(u_bar, g_bar, lam, radius) <= opt_tol
    if not stationary:
        logger.warning("Growth check at a non-stationary control (residual above %.1e).", opt_tol)

    j_bar = cost.eval_cost(u_bar)
    directions, _ = sample_cone_directions(u_bar, radius, n_directions, rng)
    scales = [0.1 * radius * 2.0**-k for k in range(GROWTH_SCALES)]
    samples = [(d, t) for d in directions for t in scales]

    def margins(sample: Tuple[ControlProfile, float]) -> dict:
        direction, t = sample
        moved = project_Uad(u_bar + direction * t, radius)
        h = moved - u_bar
        h_sq = l2_inner(h, h)
        return {
            "scale": t,
            "h_norm": float(np.sqrt(h_sq)),
            "u_norm": l2_norm(moved),
            "cost_margin": cost.eval_cost(moved) - j_bar - lam / 8.0 * h_sq,
            "gradient_margin": l2_inner(cost.eval_gradient(moved) - g_bar, h) - lam / 4.0 * h_sq,
        }

    rows = parallel_map(margins, samples)
    report = GrowthReport(rows=list(rows), stationary=stationary, n_directions=len(directions))
    logger.info("Quadratic growth holds up to |h| = %.3e.", report.largest_radius)
    return report


def check_stationarity(
    cost: ReducedCost,
    u_bar: ControlProfile,
    radius: float,
    n_samples: int = 50,
    opt_tol: float = 1e-9,
    rng: Optional[np.random.Generator] = None,
) -> StationarityReport:
    """Sample ``<lam u_bar + s, w - u_bar>`` over admissible ``w``."""
    rng = rng if rng is not None else np.random.default_rng(0)
    mesh = u_bar.mesh
    gradient = cost.eval_gradient(u_bar)
    values = []
    for _ in range(n_samples):
        w = _unit(ControlProfile(mesh, rng.standard_normal(mesh.n_nodes))) * (radius * rng.uniform())
        values.append(l2_inner(gradient, project_Uad(w, radius) - u_bar))
    return StationarityReport(values=values, tolerance=opt_tol)
