"""
Assembly of the Interface and Bulk Forms

- ``B_Gamma[gamma, zeta] = kappa * int_I gamma' zeta'``  (P1 on I)
- ``B_Omega[y, z; C]    = int_Omega C grad y . grad z``  (Q1 on the square)

Bulk matrices are assembled from coefficient values at the Gauss points as
``G^T diag(w C) G`` products, which keeps every reduction order fixed.
:class:`BulkOperator` bundles ``A[gamma]``, its stiffness matrix and its
interior factorization with the derivative actions needed by the tangent,
adjoint and second-order solvers.
"""

from __future__ import annotations

import logging
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sp

from ..model.coeffs import CoeffPoint, Direction1D, Matrix2, eval_A, eval_D2A, eval_DA_parts
from .fields import BoundaryCurve
from .linalg import ReducedSolver
from .mesh import IntervalMesh, SquareMesh
from .quadrature import SquareQuadrature, interval_quadrature, p1_evaluation, square_quadrature

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Interval forms
# ---------------------------------------------------------------------------

@lru_cache(maxsize=16)
def assemble_mass_1d(mesh: IntervalMesh) -> sp.csr_matrix:
    """P1 mass matrix on I (the L^2 pairing of controls and test functions)."""
    quad = interval_quadrature(mesh)
    return sp.csr_matrix(quad.values.T @ sp.diags(quad.weights) @ quad.values)


def assemble_B_Gamma(mesh: IntervalMesh, kappa: float) -> sp.csr_matrix:
    """
    Surface-tension stiffness ``kappa * int gamma' zeta'`` on all P1 nodes.

    Endpoint rows are eliminated by the solver (see
    :class:`~fbpopt.fem.linalg.ReducedSolver`).
    """
    if not kappa > 0.0:
        raise ValueError(f"kappa must be positive, got {kappa!r}.")
    return kappa * unit_stiffness_1d(mesh)


@lru_cache(maxsize=16)
def unit_stiffness_1d(mesh: IntervalMesh) -> sp.csr_matrix:
    quad = interval_quadrature(mesh)
    return sp.csr_matrix(quad.derivs.T @ sp.diags(quad.weights) @ quad.derivs)


def load_1d(mesh: IntervalMesh, point_values: np.ndarray) -> np.ndarray:
    """Load vector ``int f phi_i`` from values of ``f`` at the interval Gauss points."""
    quad = interval_quadrature(mesh)
    return quad.values.T @ (quad.weights * point_values)


# ---------------------------------------------------------------------------
# Bulk forms
# ---------------------------------------------------------------------------

@lru_cache(maxsize=16)
def curve_operators(interval: IntervalMesh, square: SquareMesh) -> Tuple[sp.csr_matrix, sp.csr_matrix]:
    """Evaluate P1 curves (value, slope) at the square Gauss points."""
    return p1_evaluation(interval, square_quadrature(square).x1)


@lru_cache(maxsize=16)
def column_operators(interval: IntervalMesh, square: SquareMesh) -> Tuple[sp.csr_matrix, sp.csr_matrix]:
    """Evaluate P1 curves (value, slope) at the square column abscissae."""
    return p1_evaluation(interval, square_quadrature(square).column_x1)


def coefficient_stiffness(quad: SquareQuadrature, coeff: Matrix2) -> sp.csr_matrix:
    """Assemble ``int C grad y . grad z`` for a symmetric coefficient given at Gauss points."""
    w = quad.weights
    gx, gy = quad.grad_x, quad.grad_y
    c11, c12, c22 = (np.broadcast_to(np.asarray(c, dtype=float), w.shape) for c in (coeff.a11, coeff.a12, coeff.a22))
    kxx = gx.T @ sp.diags(w * c11) @ gx
    kyy = gy.T @ sp.diags(w * c22) @ gy
    kxy = gx.T @ sp.diags(w * c12) @ gy
    stiffness = kxx + kyy + kxy + kxy.T
    return sp.csr_matrix(0.5 * (stiffness + stiffness.T))


def curve_point(curve: BoundaryCurve, square: SquareMesh) -> CoeffPoint:
    """Arguments of ``phi`` at every square Gauss point for the interface *curve*."""
    values, derivs = curve_operators(curve.mesh, square)
    return CoeffPoint(values @ curve.values, derivs @ curve.values, square_quadrature(square).x2)


def assemble_B_Omega(mesh: SquareMesh, curve: BoundaryCurve) -> sp.csr_matrix:
    """Q1 stiffness matrix with coefficient ``A[gamma]``."""
    return coefficient_stiffness(square_quadrature(mesh), eval_A(curve_point(curve, mesh)))


class BulkOperator:
    """
    ``A[gamma]`` on a fixed interface, with stiffness and factorization.

    Args:
        curve:  Interface displacement gamma.
        square: Square mesh (must refine ``curve.mesh``).
        method: Linear solver used for Dirichlet problems.
    """

    def __init__(self, curve: BoundaryCurve, square: SquareMesh, method: str = "direct") -> None:
        self.curve = curve
        self.square = square
        self.method = method
        self.quad = square_quadrature(square)
        self.curve_values, self.curve_derivs = curve_operators(curve.mesh, square)
        self.point = curve_point(curve, square)
        self.coefficient = eval_A(self.point)
        self.da_parts = eval_DA_parts(self.point)
        self.stiffness = coefficient_stiffness(self.quad, self.coefficient)
        self._solver: Optional[ReducedSolver] = None

    # ------------------------------------------------------------------
    # Solves
    # ------------------------------------------------------------------

    @property
    def solver(self) -> ReducedSolver:
        """Factorization of the interior block (built on first use)."""
        if self._solver is None:
            self._solver = ReducedSolver(self.stiffness, self.square.boundary_nodes, self.method)
        return self._solver

    def solve_dirichlet(self, load: np.ndarray, boundary_values: Optional[np.ndarray] = None) -> np.ndarray:
        """
        Solve ``B_Omega[x, z; A] = load(z)`` for interior test functions.

        Args:
            load:            Full load vector (boundary rows ignored).
            boundary_values: Full nodal vector whose boundary entries give
                             the Dirichlet data (zeros when ``None``).
        """
        g = None
        if boundary_values is not None:
            g = np.asarray(boundary_values, dtype=float)[self.square.boundary_nodes]
        return self.solver.solve(load, g)

    # ------------------------------------------------------------------
    # Actions
    # ------------------------------------------------------------------

    def apply(self, w: np.ndarray) -> np.ndarray:
        """``B_Omega[w, phi_b; A]`` for every basis function."""
        return self.stiffness @ w

    def flux_load(self, flux_x: np.ndarray, flux_y: np.ndarray) -> np.ndarray:
        """``int F . grad phi_b`` for a flux given at the Gauss points."""
        w = self.quad.weights
        return self.quad.grad_x.T @ (w * flux_x) + self.quad.grad_y.T @ (w * flux_y)

    def direction(self, h: np.ndarray) -> Direction1D:
        return Direction1D(self.curve_values @ h, self.curve_derivs @ h)

    def da_apply(self, w: np.ndarray, h: np.ndarray) -> np.ndarray:
        """``B_Omega[w, phi_b; DA[gamma]<h>]`` for every basis function."""
        a1, a2 = self.da_parts
        gx, gy = self.quad.gradient(w)
        d = self.direction(h)
        d11 = np.asarray(d.h_val)
        d12 = np.asarray(a2.a12) * d.dh_val
        d22 = np.asarray(a1.a22) * d.h_val + np.asarray(a2.a22) * d.dh_val
        return self.flux_load(d11 * gx + d12 * gy, d12 * gx + d22 * gy)

    def coupling_matrix(self, w: np.ndarray) -> sp.csr_matrix:
        """
        Matrix of ``h -> B_Omega[w, phi_b; DA[gamma]<h>]``.

        Shape ``(square.n_nodes, interval.n_nodes)``; its transpose applied
        to a bulk field ``r`` gives ``B_Omega[w, r; DA[gamma]<phi_i>]``.
        """
        a1, a2 = self.da_parts
        gx, gy = self.quad.gradient(w)
        x2 = self.quad.x2
        wts = sp.diags(self.quad.weights)
        vals, ders = self.curve_values, self.curve_derivs
        flux_x = sp.diags(gx) @ vals + sp.diags(-x2 * gy) @ ders
        flux_y = sp.diags(np.asarray(a1.a22) * gy) @ vals + sp.diags(-x2 * gx + np.asarray(a2.a22) * gy) @ ders
        return sp.csr_matrix(self.quad.grad_x.T @ wts @ flux_x + self.quad.grad_y.T @ wts @ flux_y)

    def d2a_apply(self, w: np.ndarray, h1: np.ndarray, h2: np.ndarray) -> np.ndarray:
        """``B_Omega[w, phi_b; D^2A[gamma]<h1, h2>]`` for every basis function."""
        d2 = eval_D2A(self.point, self.direction(h1), self.direction(h2))
        _, gy = self.quad.gradient(w)
        return self.flux_load(np.zeros_like(gy), np.asarray(d2.a22) * gy)


@lru_cache(maxsize=16)
def flat_stiffness(square: SquareMesh) -> sp.csr_matrix:
    """Q1 Laplacian (``A = I``), the discrete ``W^{1,2}_0`` inner product."""
    quad = square_quadrature(square)
    one = np.ones(quad.n_points)
    zero = np.zeros(quad.n_points)
    return coefficient_stiffness(quad, Matrix2(one, zero, zero, one))
