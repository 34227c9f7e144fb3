"""
Projected Gradient Optimizer

Iterates ``u <- P(u - tau J'(u))`` with Armijo backtracking on the
projection arc:

    J(u_new) <= J(u) - sigma / tau * |u_new - u|^2,    tau = 1/lam, 1/(2 lam), ...

Stationarity is measured by the projection residual
``|u - P(u - J'(u) / lam)|`` at the fixed reference step ``1/lam``, which
vanishes exactly at solutions of the variational inequality.
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING, Optional

from ..fem.fields import ControlProfile
from ..output.models import OptResult
from .cost import ReducedCost
from .projection import l2_norm, project_Uad

if TYPE_CHECKING:
    from ..constants.ledger import ConstantsLedger

logger = logging.getLogger(__name__)

ARMIJO_SIGMA = 1e-4
BACKTRACK_FACTOR = 0.5
MAX_BACKTRACKS = 50


def stationarity_residual(u: ControlProfile, gradient: ControlProfile, lam: float, radius: float) -> float:
    return l2_norm(u - project_Uad(u - gradient * (1.0 / lam), radius))


def optimize(
    cost: ReducedCost,
    u0: ControlProfile,
    radius: float,
    opt_tol: float = 1e-9,
    max_iter: int = 200,
    ledger: Optional["ConstantsLedger"] = None,
) -> OptResult:
    """
    Minimize the reduced cost over the admissible ball.

    Args:
        cost:     Reduced cost (holds the data and the solvers).
        u0:       Initial control (projected onto the ball first).
        radius:   Radius of ``U_ad``.
        opt_tol:  Tolerance on the stationarity residual.
        max_iter: Iteration cap; the best iterate is returned unconverged.
        ledger:   Complete ledger for feasibility snapshots (optional).

    Returns:
        :class:`~fbpopt.output.models.OptResult` with the cost,
        gradient-norm, residual and step histories.
    """
    lam = cost.lam
    state = cost.state
    if ledger is not None and ledger.is_complete:
        report = state.check_admissibility(project_Uad(u0, radius), ledger)
        if not report.passed:
            logger.warning("Feasibility premises fail at the initial control: %s.", ", ".join(report.failures()))

    u = project_Uad(u0, radius)
    j = cost.eval_cost(u)
    g = cost.eval_gradient(u)
    res = stationarity_residual(u, g, lam, radius)
    result = OptResult(control=u, costs=[j], grad_norms=[l2_norm(g)], vi_residuals=[res])
    best_u, best_j = u, j

    while res > opt_tol and result.iterations < max_iter:
        tau = 1.0 / lam
        for _ in range(MAX_BACKTRACKS):
            trial = project_Uad(u - g * tau, radius)
            step = l2_norm(trial - u)
            j_trial = cost.eval_cost(trial)
            if j_trial <= j - ARMIJO_SIGMA / tau * step**2:
                break
            tau *= BACKTRACK_FACTOR
        else:
            logger.warning("Line search failed after %d halvings; stopping at residual %.3e.", MAX_BACKTRACKS, res)
            break

        u, j = trial, j_trial
        g = cost.eval_gradient(u)
        res = stationarity_residual(u, g, lam, radius)
        result.costs.append(j)
        result.grad_norms.append(l2_norm(g))
        result.vi_residuals.append(res)
        result.step_sizes.append(tau)
        if j <= best_j:
            best_u, best_j = u, j
        logger.debug("Iteration %d: J=%.12g residual=%.3e tau=%.3e.", result.iterations, j, res, tau)

    result.converged = res <= opt_tol
    result.control = u if result.converged else best_u
    if result.converged:
        logger.info("Optimizer converged in %d iterations: J=%.12g residual=%.3e.", result.iterations, j, res)
    else:
        logger.warning("Optimizer stopped after %d iterations with residual %.3e.", result.iterations, res)

    if ledger is not None and ledger.is_complete:
        result.feasibility = state.check_admissibility(result.control, ledger).to_dict()
    return result
