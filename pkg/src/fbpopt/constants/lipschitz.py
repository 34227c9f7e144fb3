"""
Empirical Lipschitz and Contraction Constants

:func:`measure_lipschitz` samples control pairs in ``U_ad`` and records the
difference quotients of ``G``, ``G'`` or ``G''`` in the weighted product
norm of the state solver.  :func:`measure_contraction` samples state pairs
in the invariant ball and records the quotients of one Picard step.

All random inputs are drawn first from the given generator; evaluations
then run through :func:`~fbpopt.utils.parallel.parallel_map`.
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING, List, Optional, Sequence, Tuple

import numpy as np

from ..fem.fields import BoundaryCondition, BoundaryCurve, BulkField, ControlProfile
from ..fem.norms import w1_bulk_seminorm
from ..output.models import ContractionReport, LipschitzReport
from ..solvers.state import StatePair, StateSolver, w1inf_interval
from ..solvers.tangent import TangentSolver
from ..utils.parallel import parallel_map

if TYPE_CHECKING:
    from .ledger import ConstantsLedger

logger = logging.getLogger(__name__)

KINDS = ("G", "Gprime", "Gsecond")


def sample_controls(
    state: StateSolver,
    radius: float,
    n: int,
    rng: np.random.Generator,
) -> List[ControlProfile]:
    """Controls with Gaussian nodal shape and ``|u| = radius * U(0, 1)``."""
    mesh = state.interval
    controls = []
    for _ in range(n):
        u = ControlProfile(mesh, rng.standard_normal(mesh.n_nodes))
        controls.append(u * (radius * rng.uniform() / state.l2_norm(u)))
    return controls


def measure_lipschitz(
    kind: str,
    state: StateSolver,
    radius: float,
    ledger: Optional["ConstantsLedger"] = None,
    n_pairs: int = 20,
    rng: Optional[np.random.Generator] = None,
    pairs: Optional[Sequence[Tuple[ControlProfile, ControlProfile]]] = None,
) -> LipschitzReport:
    """
    Largest sampled difference quotient of the control-to-state map or its derivatives.

    Args:
        kind:    ``G``, ``Gprime`` or ``Gsecond``.
        state:   State solver.
        radius:  Radius of the admissible ball the pairs are drawn from.
        ledger:  Supplies ``L_G`` (formula) or recorded ``L_Gprime``/``L_Gsecond``.
        n_pairs: Number of sampled pairs (ignored when *pairs* is given).
        pairs:   Explicit control pairs; identical pairs are skipped.

    Returns:
        :class:`~fbpopt.output.models.LipschitzReport`.  For ``G`` it also
        carries the interface quotients against ``alpha / theta2``.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}.")
    rng = rng if rng is not None else np.random.default_rng(0)
    if pairs is None:
        controls = sample_controls(state, radius, 2 * n_pairs, rng)
        pairs = list(zip(controls[0::2], controls[1::2]))
    directions = [ControlProfile(state.interval, rng.standard_normal(state.interval.n_nodes)) for _ in pairs]
    directions = [h * (1.0 / state.l2_norm(h)) for h in directions]
    tangent = TangentSolver(state)

    def image(u: ControlProfile, h: ControlProfile) -> Tuple[np.ndarray, np.ndarray]:
        if kind == "G":
            pair, _ = state.solve_state(u)
        elif kind == "Gprime":
            pair = tangent.apply_Gprime(u, h)
        else:
            pair = tangent.apply_Gsecond(u, h, h)
        return pair.gamma.values, pair.y.values

    def quotients(job: Tuple[Tuple[ControlProfile, ControlProfile], ControlProfile]) -> Optional[Tuple[float, float]]:
        (u1, u2), h = job
        du = state.l2_norm(u1 - u2)
        if du == 0.0:
            return None
        g1, y1 = image(u1, h)
        g2, y2 = image(u2, h)
        return state.w1_norm(g1 - g2, y1 - y2) / du, w1inf_interval(state.interval, g1 - g2) / du

    results = parallel_map(quotients, list(zip(pairs, directions)))
    kept = [r for r in results if r is not None]

    bound = None
    interface_bound = None
    if ledger is not None:
        bound = {"G": ledger.L_G, "Gprime": ledger.L_Gprime, "Gsecond": ledger.L_Gsecond}[kind]
        if kind == "G" and ledger.theta2 is not None:
            interface_bound = ledger.alpha / ledger.theta2

    report = LipschitzReport(
        kind=kind,
        quotients=[q for q, _ in kept],
        n_skipped=len(results) - len(kept),
        bound=bound,
        interface_quotients=[q for _, q in kept] if kind == "G" else [],
        interface_bound=interface_bound,
    )
    logger.info("Lipschitz %s: observed %.6g against %s (%s).", kind, report.observed, bound, report.status.value)
    return report


def sample_ball_pair(state: StateSolver, y_bound: float, rng: np.random.Generator) -> StatePair:
    """
    A random pair in the invariant ball.

    ``gamma`` has mean-free random slopes scaled to ``max |gamma'| <= 1``;
    ``y`` is a random zero-trace field with ``|y|_W1p <= y_bound``.
    """
    interval, square = state.interval, state.square
    slopes = rng.uniform(-1.0, 1.0, interval.n_elems)
    slopes -= slopes.mean()
    peak = np.max(np.abs(slopes))
    if peak > 0.0:
        slopes *= rng.uniform() / peak
    gamma = np.concatenate([[0.0], np.cumsum(slopes) * interval.h])
    gamma[-1] = 0.0

    y = np.zeros(square.n_nodes)
    if y_bound > 0.0:
        y[square.interior_nodes] = rng.standard_normal(square.interior_nodes.size)
        norm = w1_bulk_seminorm(square, y, state.data.p)
        if norm > 0.0:
            y *= y_bound * rng.uniform() / norm
    return StatePair(
        BoundaryCurve(interval, gamma),
        BulkField(square, y, BoundaryCondition.ZERO_ON_BOUNDARY),
    )


def measure_contraction(
    state: StateSolver,
    u: ControlProfile,
    ledger: "ConstantsLedger",
    n_pairs: int = 100,
    rng: Optional[np.random.Generator] = None,
) -> ContractionReport:
    """
    Sampled ``|T(a) - T(b)| / |a - b|`` over pairs in the invariant ball.

    Also counts images that leave the ball.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    y_bound = ledger.beta * ledger.C_A * state.v_norm
    pairs = [(sample_ball_pair(state, y_bound, rng), sample_ball_pair(state, y_bound, rng)) for _ in range(n_pairs)]

    def evaluate(job: Tuple[StatePair, StatePair]) -> Tuple[Optional[float], int]:
        a, b = job
        ta, tb = state.apply_T(a, u), state.apply_T(b, u)
        outside = sum(not state.check_ball(t, ledger).inside for t in (ta, tb))
        d = state.distance(a, b)
        return (state.distance(ta, tb) / d if d > 0.0 else None), outside

    results = parallel_map(evaluate, pairs)
    report = ContractionReport(
        ratios=[r for r, _ in results if r is not None],
        bound=1.0 - ledger.theta2,
        n_outside=sum(o for _, o in results),
    )
    logger.info("Contraction: max ratio %.6g against %.6g, %d images outside the ball.",
                report.max_ratio, report.bound, report.n_outside)
    return report
