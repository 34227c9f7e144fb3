"""
Sparse Linear Solves with Dirichlet Elimination

Constrained nodes are removed symmetrically: the free block ``A_ff`` is
factorized once and reused for any right-hand side and any constrained
values,

    x_c = g,    A_ff x_f = b_f - A_fc g.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import SingularSystemError

logger = logging.getLogger(__name__)

RESIDUAL_RTOL = 1e-12


@dataclass(frozen=True)
class SparseSystem:
    """
    A linear system with a set of constrained (Dirichlet) nodes.

    Attributes:
        matrix:             Full sparse matrix, constrained rows included.
        rhs:                Full right-hand side.
        constrained:        Indices of constrained nodes.
        constrained_values: Values imposed there (zeros when ``None``).
    """

    matrix: sp.spmatrix
    rhs: np.ndarray
    constrained: np.ndarray
    constrained_values: Optional[np.ndarray] = None


class ReducedSolver:
    """
    Factorization of the free block of a constrained matrix.

    Args:
        matrix:      Full sparse matrix.
        constrained: Indices of constrained nodes.
        method:      ``"direct"`` (sparse LU) or ``"cg"``.
    """

    def __init__(self, matrix: sp.spmatrix, constrained: np.ndarray, method: str = "direct") -> None:
        if method not in ("direct", "cg"):
            raise ValueError(f"Unknown linear solver '{method}'.")
        matrix = sp.csr_matrix(matrix)
        n = matrix.shape[0]
        mask = np.ones(n, dtype=bool)
        mask[np.asarray(constrained, dtype=int)] = False
        self.n = n
        self.method = method
        self.free = np.flatnonzero(mask)
        self.constrained = np.flatnonzero(~mask)
        self.matrix = matrix
        self.free_block = sp.csc_matrix(matrix[self.free][:, self.free])
        self.coupling = matrix[self.free][:, self.constrained]
        self._lu = None
        if method == "direct" and self.free.size:
            try:
                self._lu = spla.splu(self.free_block)
            except RuntimeError as exc:
                raise SingularSystemError(f"Sparse factorization failed: {exc}") from exc

    # ------------------------------------------------------------------
    # Public API
    # ------------------------------------------------------------------

    def solve_free(self, rhs_free: np.ndarray) -> np.ndarray:
        """Solve ``A_ff x = rhs_free`` for the free unknowns only."""
        if not self.free.size:
            return np.zeros(0)
        if self.method == "direct":
            x = self._lu.solve(np.asarray(rhs_free, dtype=float))
        else:
            x, info = spla.cg(self.free_block, rhs_free, rtol=1e-14, atol=0.0, maxiter=10 * self.free.size)
            if info != 0:
                raise SingularSystemError(f"CG did not converge (info={info}).")
        if not np.all(np.isfinite(x)):
            raise SingularSystemError("Linear solve produced non-finite values.")
        return x

    def solve(self, rhs: np.ndarray, constrained_values: Optional[np.ndarray] = None) -> np.ndarray:
        """
        Solve the full system.

        Args:
            rhs:                Full right-hand side (constrained rows ignored).
            constrained_values: Values of the constrained nodes.

        Returns:
            Full solution vector with the constrained values in place.
        """
        x = np.zeros(self.n)
        rhs_free = np.asarray(rhs, dtype=float)[self.free]
        if constrained_values is not None and self.constrained.size:
            g = np.asarray(constrained_values, dtype=float)
            x[self.constrained] = g
            rhs_free = rhs_free - self.coupling @ g
        x_free = self.solve_free(rhs_free)
        x[self.free] = x_free

        residual = self.free_block @ x_free - rhs_free
        scale = np.linalg.norm(rhs_free)
        if np.linalg.norm(residual) > RESIDUAL_RTOL * max(scale, np.finfo(float).tiny) and scale > 0.0:
            logger.warning(
                "Linear solve residual %.3e exceeds %.0e relative to |b| = %.3e.",
                np.linalg.norm(residual), RESIDUAL_RTOL, scale,
            )
        return x


def solve(system: SparseSystem, method: str = "direct") -> np.ndarray:
    """Solve a :class:`SparseSystem` by symmetric elimination of its constraints."""
    solver = ReducedSolver(system.matrix, system.constrained, method=method)
    return solver.solve(system.rhs, system.constrained_values)
