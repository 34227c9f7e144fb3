"""
Constant Estimates

Numerical surrogates for the base constants of the ledger:

- ``C_A``:   sup of the entrywise max-norms of ``A``, ``DA`` and ``D^2A``
  over the admissible box, evaluated from the closed-form derivatives of
  ``phi`` on a grid (:func:`analytic_CA_parts`).
- ``alpha``: ``2 / kappa`` (:func:`default_alpha`).
- ``beta``:  norm of the inverse bulk operator from ``(W^{1,q}_0)*`` to
  ``W^{1,p}_0``, by a duality-map power iteration (:func:`estimate_beta`).
- ``C_E``:   norm of the discrete extension from ``W^{1,1}_0(I)`` to
  ``W^{1,q}`` on the square (:func:`compute_CE`).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import ConvergenceError
from ..fem.assembly import assemble_B_Omega, flat_stiffness
from ..fem.extension import extension_matrix
from ..fem.fields import BoundaryCurve
from ..fem.linalg import ReducedSolver
from ..fem.mesh import IntervalMesh, SquareMesh
from ..fem.norms import w1_bulk_seminorm, w1_interval_seminorm
from ..fem.quadrature import square_quadrature
from ..model.coeffs import CoeffPoint, eval_grad_phi, eval_hess_phi, eval_phi

logger = logging.getLogger(__name__)

BETA_RTOL = 1e-10
CE_RANDOM_SAMPLES = 16


# ---------------------------------------------------------------------------
# C_A
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CABounds:
    """Separate sups of the three coefficient bounds."""

    A_part:   float
    DA_part:  float
    D2A_part: float

    @property
    def maximum(self) -> float:
        return max(self.A_part, self.DA_part, self.D2A_part)

    @property
    def total(self) -> float:
        return self.A_part + self.DA_part + self.D2A_part

    def to_dict(self) -> dict:
        return {
            "A_part":   self.A_part,
            "DA_part":  self.DA_part,
            "D2A_part": self.D2A_part,
            "maximum":  self.maximum,
            "total":    self.total,
        }


def analytic_CA_parts(
    gamma_bound: float = 0.5,
    slope_bound: float = 1.0,
    direction_bound: float = 0.5,
    direction_slope_bound: float = 1.0,
    n_grid: int = 41,
) -> CABounds:
    """
    Grid maximization of the coefficient bounds.

    The box is ``|gamma| <= gamma_bound``, ``|gamma'| <= slope_bound``,
    ``x2 in [0, 1]``; directions satisfy ``|h| <= direction_bound`` and
    ``|h'| <= direction_slope_bound``.  At each grid point the sup over
    directions is taken in closed form, entry by entry.
    """
    if not 0.0 <= gamma_bound < 1.0:
        raise ValueError(f"gamma_bound must lie in [0, 1), got {gamma_bound!r}.")
    a, d, x2 = np.meshgrid(
        np.linspace(-gamma_bound, gamma_bound, n_grid),
        np.linspace(-slope_bound, slope_bound, n_grid),
        np.linspace(0.0, 1.0, n_grid),
        indexing="ij",
    )
    p = CoeffPoint(a, d, x2)
    hb, db = direction_bound, direction_slope_bound

    phi = np.asarray(eval_phi(p))
    a_part = np.maximum.reduce([1.0 + a, np.abs(x2 * d), phi])

    phi_a, phi_b = (np.abs(np.asarray(g)) for g in eval_grad_phi(p))
    da_part = np.maximum.reduce([np.full_like(a, hb), x2 * db, hb * phi_a + x2 * db * phi_b])

    hess = eval_hess_phi(p)
    d2a_part = (
        hb * hb * np.abs(hess.a11)
        + 2.0 * hb * db * x2 * np.abs(hess.a12)
        + db * db * x2 * x2 * np.abs(hess.a22)
    )
    return CABounds(float(a_part.max()), float(da_part.max()), float(d2a_part.max()))


def analytic_CA(combine: str = "max", **box: float) -> float:
    """``C_A`` as the maximum (default) or the sum of the three parts."""
    parts = analytic_CA_parts(**box)
    if combine == "max":
        return parts.maximum
    if combine == "sum":
        return parts.total
    raise ValueError(f"combine must be 'max' or 'sum', got {combine!r}.")


def default_alpha(kappa: float) -> float:
    if not kappa > 0.0:
        raise ValueError(f"kappa must be positive, got {kappa!r}.")
    return 2.0 / kappa


# ---------------------------------------------------------------------------
# beta
# ---------------------------------------------------------------------------

def _duality_load(square: SquareMesh, w: np.ndarray, r: float) -> np.ndarray:
    """``J_r(w) = int |grad w|^(r-2) grad w . grad phi_b``; zero where the gradient vanishes."""
    quad = square_quadrature(square)
    gx, gy = quad.gradient(w)
    mag = np.hypot(gx, gy)
    scale = np.zeros_like(mag)
    nz = mag > 0.0
    scale[nz] = mag[nz] ** (r - 2.0)
    weights = quad.weights * scale
    return quad.grad_x.T @ (weights * gx) + quad.grad_y.T @ (weights * gy)


def estimate_beta(
    square: SquareMesh,
    p: float,
    curve: Optional[BoundaryCurve] = None,
    max_iter: int = 500,
    rtol: float = BETA_RTOL,
    extrapolate: bool = True,
) -> float:
    """
    Estimate ``|K^-1|`` from ``(W^{1,q}_0)*`` to ``W^{1,p}_0`` for ``K = B_Omega[.,.; A[gamma]]``.

    The discrete norm on one mesh comes from :func:`discrete_beta`.  It
    increases toward its limit under refinement, so with *extrapolate* (and
    an even ``n >= 4``) the mesh value ``b_h`` is combined with the value
    ``b_2h`` on the mesh with half the elements as ``max(b_h, 2 b_h - b_2h)``,
    the first-order extrapolation in ``h``.

    Args:
        square:      Bulk mesh.
        p:           Exponent of the solution space (``q = p / (p - 1)``).
        curve:       Interface displacement (flat when ``None``).
        extrapolate: Combine with the half mesh as described above.

    Raises:
        ConvergenceError: A power iteration did not settle.
    """
    fine = discrete_beta(square, p, curve, max_iter, rtol)
    if not extrapolate or square.n % 2 or square.n < 4:
        return fine
    half = SquareMesh(square.n // 2)
    half_curve = None if curve is None else BoundaryCurve.from_function(IntervalMesh(half.n), curve.evaluate)
    coarse = discrete_beta(half, p, half_curve, max_iter, rtol)
    beta = max(fine, 2.0 * fine - coarse)
    logger.info("beta estimate %.6g (n = %d: %.6g, n = %d: %.6g).", beta, square.n, fine, half.n, coarse)
    return beta


def discrete_beta(
    square: SquareMesh,
    p: float,
    curve: Optional[BoundaryCurve] = None,
    max_iter: int = 500,
    rtol: float = BETA_RTOL,
) -> float:
    """
    Discrete ``|K^-1|`` on *square* by a duality-map power iteration.

    Starts from the torsion function and alternates the normalized
    ``q``-duality map, a solve with ``K``, the ``p``-duality map and a
    solve with ``K^T``.  Stops once the ratio changes by at most *rtol*
    relative to itself.

    Raises:
        ConvergenceError: No such step within *max_iter*.
    """
    if not p > 1.0:
        raise ValueError(f"p must exceed 1, got {p!r}.")
    q = p / (p - 1.0)
    stiffness = flat_stiffness(square) if curve is None else assemble_B_Omega(square, curve)
    solver = ReducedSolver(stiffness, square.boundary_nodes)

    w = solver.solve(np.ones(square.n_nodes))
    ratio = 0.0
    for k in range(max_iter):
        w_norm = w1_bulk_seminorm(square, w, q)
        if w_norm == 0.0:
            return ratio
        y = solver.solve(_duality_load(square, w, q) / w_norm ** (q - 1.0))
        estimate = w1_bulk_seminorm(square, y, p)
        logger.debug("beta iteration %d: %.15g.", k, estimate)
        if abs(estimate - ratio) <= rtol * estimate:
            return estimate
        ratio = estimate
        w = solver.solve(_duality_load(square, y, p))
    raise ConvergenceError(f"beta power iteration did not settle in {max_iter} iterations.", iterate=ratio)


# ---------------------------------------------------------------------------
# C_E
# ---------------------------------------------------------------------------

def compute_CE(
    interval: IntervalMesh,
    square: SquareMesh,
    q: float,
    n_random: int = CE_RANDOM_SAMPLES,
    seed: int = 0,
) -> float:
    """
    Largest sampled ``|E zeta|_W1q / |zeta|_W11``, at least 1.

    Samples every interior hat function and *n_random* seeded Gaussian
    combinations of hats.
    """
    ext = extension_matrix(interval, square)
    interior = interval.interior
    rng = np.random.default_rng(seed)

    samples = []
    for node in interior:
        zeta = np.zeros(interval.n_nodes)
        zeta[node] = 1.0
        samples.append(zeta)
    for _ in range(n_random):
        zeta = np.zeros(interval.n_nodes)
        zeta[interior] = rng.standard_normal(interior.size)
        samples.append(zeta)

    best = 1.0
    for zeta in samples:
        denominator = w1_interval_seminorm(interval, zeta, 1.0)
        if denominator > 0.0:
            best = max(best, w1_bulk_seminorm(square, ext @ zeta, q) / denominator)
    logger.info("C_E estimate %.6g (q = %.4g, n = %d).", best, q, interval.n_elems)
    return best
