"""
Discrete Extension Operator

``E zeta (x1, x2) = zeta(x1) * x2`` at the square nodes.  The square mesh
must refine the interval mesh (``n_square`` a multiple of ``n_interval``),
so the Gamma trace of ``E zeta`` reproduces ``zeta`` exactly and the Sigma
nodes carry exact zeros.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .fields import BoundaryCondition, BoundaryCurve, BulkField
from .mesh import IntervalMesh, SquareMesh


def check_nested(interval: IntervalMesh, square: SquareMesh) -> int:
    """Return the refinement ratio ``n_square / n_interval``."""
    if square.n % interval.n_elems:
        raise ValueError(
            f"n_square ({square.n}) must be a multiple of n_interval ({interval.n_elems})."
        )
    return square.n // interval.n_elems


@lru_cache(maxsize=16)
def transfer_matrix(interval: IntervalMesh, square: SquareMesh) -> sp.csr_matrix:
    """P1 interpolation from interval nodes to the ``n_square + 1`` column abscissae."""
    ratio = check_nested(interval, square)
    cols = np.arange(square.n + 1)
    elem = np.minimum(cols // ratio, interval.n_elems - 1)
    t = (cols - elem * ratio) / ratio
    rows = np.repeat(cols, 2)
    idx = np.stack([elem, elem + 1], axis=1).ravel()
    vals = np.stack([1.0 - t, t], axis=1).ravel()
    return sp.csr_matrix((vals, (rows, idx)), shape=(square.n + 1, interval.n_nodes))


@lru_cache(maxsize=16)
def extension_matrix(interval: IntervalMesh, square: SquareMesh) -> sp.csr_matrix:
    """Sparse matrix of ``E``, shape ``(square.n_nodes, interval.n_nodes)``."""
    transfer = transfer_matrix(interval, square)
    return sp.csr_matrix(sp.diags(square.x2) @ transfer[square.grid_i])


def extend(zeta: BoundaryCurve, square: SquareMesh) -> BulkField:
    """Extend *zeta* into the square; the result vanishes on Sigma."""
    values = extension_matrix(zeta.mesh, square) @ zeta.values
    return BulkField(square, values, BoundaryCondition.ZERO_ON_SIGMA)
