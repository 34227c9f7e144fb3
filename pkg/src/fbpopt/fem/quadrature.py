"""
Quadrature and Basis Evaluation

Every integral in the package is a sum over 2-point Gauss points per
direction.  The quadrature objects below store, for each point, its
coordinates and weight together with sparse evaluation operators mapping
nodal vectors to point values (and gradients), so that

    integral(f(w) * z) = z.T @ (values.T @ (weights * f(values @ w)))

is a pair of sparse matrix-vector products.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np
import scipy.sparse as sp

from .mesh import IntervalMesh, SquareMesh

GAUSS_POINTS = np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)])
GAUSS_WEIGHTS = np.array([0.5, 0.5])


def p1_evaluation(mesh: IntervalMesh, x: np.ndarray) -> Tuple[sp.csr_matrix, sp.csr_matrix]:
    """
    Sparse operators evaluating a P1 function and its derivative at *x*.

    Points on an element boundary are assigned to the element on their
    right (the last node to the last element).

    Returns:
        ``(values, derivatives)``, both of shape ``(len(x), mesh.n_nodes)``.
    """
    x = np.asarray(x, dtype=float).ravel()
    h = mesh.h
    elem = np.clip(np.floor(x / h).astype(int), 0, mesh.n_elems - 1)
    t = x / h - elem
    rows = np.repeat(np.arange(x.size), 2)
    cols = np.stack([elem, elem + 1], axis=1).ravel()
    vals = np.stack([1.0 - t, t], axis=1).ravel()
    ders = np.tile(np.array([-1.0 / h, 1.0 / h]), x.size)
    shape = (x.size, mesh.n_nodes)
    return (
        sp.csr_matrix((vals, (rows, cols)), shape=shape),
        sp.csr_matrix((ders, (rows, cols)), shape=shape),
    )


@dataclass(frozen=True)
class IntervalQuadrature:
    """
    Two Gauss points per interval element.

    Attributes:
        x:        Point coordinates, shape ``(2 n,)``.
        weights:  Weights including the element size.
        values:   P1 basis values at the points.
        derivs:   P1 basis derivatives at the points.
    """

    x: np.ndarray
    weights: np.ndarray
    values: sp.csr_matrix
    derivs: sp.csr_matrix

    def integrate(self, point_values: np.ndarray) -> float:
        return float(np.dot(self.weights, point_values))


@lru_cache(maxsize=16)
def interval_quadrature(mesh: IntervalMesh) -> IntervalQuadrature:
    left = mesh.nodes[:-1]
    x = (left[:, None] + mesh.h * GAUSS_POINTS[None, :]).ravel()
    weights = np.tile(mesh.h * GAUSS_WEIGHTS, mesh.n_elems)
    values, derivs = p1_evaluation(mesh, x)
    return IntervalQuadrature(x=x, weights=weights, values=values, derivs=derivs)


@dataclass(frozen=True)
class SquareQuadrature:
    """
    Tensor 2x2 Gauss points on every square element.

    Point ``q = 4 e + 2 gy + gx`` belongs to element ``e`` and sits at Gauss
    abscissae ``(gx, gy)``.  Points sharing an x1 coordinate form a
    *column*; ``column[q]`` indexes ``column_x1`` and the weight factors as
    ``weights = column_weights[column] * vertical_weights``.

    Attributes:
        x1, x2:            Point coordinates.
        weights:           Full 2D weights.
        column:            Column index of every point.
        column_x1:         Abscissa of every column.
        column_weights:    Horizontal weight of every column.
        vertical_weights:  Vertical weight of every point.
        values:            Q1 basis values, shape ``(Q, n_nodes)``.
        grad_x, grad_y:    Q1 basis partial derivatives.
    """

    x1: np.ndarray
    x2: np.ndarray
    weights: np.ndarray
    column: np.ndarray
    column_x1: np.ndarray
    column_weights: np.ndarray
    vertical_weights: np.ndarray
    values: sp.csr_matrix
    grad_x: sp.csr_matrix
    grad_y: sp.csr_matrix

    @property
    def n_points(self) -> int:
        return self.x1.size

    def gradient(self, nodal: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return self.grad_x @ nodal, self.grad_y @ nodal

    def column_integral(self, point_values: np.ndarray) -> np.ndarray:
        """Vertical integral over each column, ``int_0^1 (.) dx2`` at ``column_x1``."""
        return np.bincount(
            self.column,
            weights=self.vertical_weights * point_values,
            minlength=self.column_x1.size,
        )


def _q1_tables() -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    gx = np.tile(GAUSS_POINTS, 2)
    gy = np.repeat(GAUSS_POINTS, 2)
    phi = np.stack([(1 - gx) * (1 - gy), gx * (1 - gy), gx * gy, (1 - gx) * gy], axis=1)
    dxi = np.stack([-(1 - gy), (1 - gy), gy, -gy], axis=1)
    deta = np.stack([-(1 - gx), -gx, gx, (1 - gx)], axis=1)
    return phi, dxi, deta


@lru_cache(maxsize=16)
def square_quadrature(mesh: SquareMesh) -> SquareQuadrature:
    n, h = mesh.n, mesh.h
    e = np.arange(mesh.n_elems)
    ei, ej = e % n, e // n
    local_gx = np.tile([0, 1], 2)
    local_gy = np.repeat([0, 1], 2)

    x1 = ((ei[:, None] + GAUSS_POINTS[local_gx][None, :]) * h).ravel()
    x2 = ((ej[:, None] + GAUSS_POINTS[local_gy][None, :]) * h).ravel()
    vertical = np.tile(h * GAUSS_WEIGHTS[local_gy], mesh.n_elems)
    column = (2 * ei[:, None] + local_gx[None, :]).ravel()
    column_x1 = ((np.arange(n)[:, None] + GAUSS_POINTS[None, :]) * h).ravel()
    column_weights = np.tile(h * GAUSS_WEIGHTS, n)
    weights = column_weights[column] * vertical

    phi, dxi, deta = _q1_tables()
    n_points = 4 * mesh.n_elems
    rows = np.repeat(np.arange(n_points), 4)
    cols = np.repeat(mesh.element_nodes, 4, axis=0).ravel()
    shape = (n_points, mesh.n_nodes)

    def build(table: np.ndarray) -> sp.csr_matrix:
        data = np.tile(table, (mesh.n_elems, 1)).ravel()
        return sp.csr_matrix((data, (rows, cols)), shape=shape)

    return SquareQuadrature(
        x1=x1,
        x2=x2,
        weights=weights,
        column=column,
        column_x1=column_x1,
        column_weights=column_weights,
        vertical_weights=vertical,
        values=build(phi),
        grad_x=build(dxi / h),
        grad_y=build(deta / h),
    )
