"""
Coefficient Matrix of the Reference-Domain Problem

Pointwise evaluation of the vertical stretch

    Psi(x1, x2) = (x1, (1 + gamma(x1)) * x2)

and of the coefficient matrix it induces on the unit square,

    A[gamma] = [[1 + a,   -b       ],
                [-b,      phi(a, b)]],   phi(a, b) = (1 + b^2) / (1 + a),

with ``a = gamma(x1)`` and ``b = x2 * gamma'(x1)``, together with its first
and second directional derivatives in ``gamma`` and the Taylor remainders.

Every function accepts scalars or NumPy arrays of matching shape and
broadcasts entrywise, so assembly code evaluates a whole quadrature grid in
one call.  Directions are passed as independent ``(h, h')`` values; the FE
basis is evaluated by the caller.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Tuple, Union

import numpy as np

from ..errors import DegenerateGeometryError

if TYPE_CHECKING:
    from ..fem.fields import BoundaryCurve

ArrayLike = Union[float, np.ndarray]


def _out(value: np.ndarray) -> ArrayLike:
    value = np.asarray(value, dtype=float)
    return float(value) if value.ndim == 0 else value


# ---------------------------------------------------------------------------
# Value types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoeffPoint:
    """
    Arguments of ``phi`` at one or many points.

    Attributes:
        gamma_val:  gamma(x1).
        dgamma_val: d gamma / d x1 at x1.
        x2:         Vertical reference coordinate in [0, 1].
    """

    gamma_val: ArrayLike
    dgamma_val: ArrayLike
    x2: ArrayLike

    @property
    def a(self) -> np.ndarray:
        return np.asarray(self.gamma_val, dtype=float)

    @property
    def b(self) -> np.ndarray:
        return np.asarray(self.x2, dtype=float) * np.asarray(self.dgamma_val, dtype=float)

    def shifted(self, h: "Direction1D") -> "CoeffPoint":
        """Return the point for ``gamma + h``."""
        return CoeffPoint(
            gamma_val=np.asarray(self.gamma_val, dtype=float) + h.h_val,
            dgamma_val=np.asarray(self.dgamma_val, dtype=float) + h.dh_val,
            x2=self.x2,
        )


@dataclass(frozen=True)
class Direction1D:
    """A direction ``h`` in gamma-space, sampled as ``(h(x1), h'(x1))``."""

    h_val: ArrayLike
    dh_val: ArrayLike


@dataclass(frozen=True)
class Matrix2:
    """Symmetric-by-construction 2x2 matrix with scalar or array entries."""

    a11: ArrayLike
    a12: ArrayLike
    a21: ArrayLike
    a22: ArrayLike

    def as_array(self) -> np.ndarray:
        """Stack to shape ``(..., 2, 2)``."""
        e11, e12, e21, e22 = np.broadcast_arrays(
            *(np.asarray(e, dtype=float) for e in (self.a11, self.a12, self.a21, self.a22))
        )
        return np.stack([np.stack([e11, e12], axis=-1), np.stack([e21, e22], axis=-1)], axis=-2)

    def max_norm(self) -> float:
        """Largest absolute entry over all points."""
        return float(np.max(np.abs(self.as_array()))) if np.size(self.as_array()) else 0.0

    def det(self) -> ArrayLike:
        return _out(np.asarray(self.a11) * self.a22 - np.asarray(self.a12) * self.a21)

    def __add__(self, other: "Matrix2") -> "Matrix2":
        return Matrix2(
            _out(np.add(self.a11, other.a11)),
            _out(np.add(self.a12, other.a12)),
            _out(np.add(self.a21, other.a21)),
            _out(np.add(self.a22, other.a22)),
        )

    def __sub__(self, other: "Matrix2") -> "Matrix2":
        return Matrix2(
            _out(np.subtract(self.a11, other.a11)),
            _out(np.subtract(self.a12, other.a12)),
            _out(np.subtract(self.a21, other.a21)),
            _out(np.subtract(self.a22, other.a22)),
        )

    def scaled(self, factor: ArrayLike) -> "Matrix2":
        return Matrix2(
            _out(np.multiply(factor, self.a11)),
            _out(np.multiply(factor, self.a12)),
            _out(np.multiply(factor, self.a21)),
            _out(np.multiply(factor, self.a22)),
        )


# ---------------------------------------------------------------------------
# phi and its derivatives
# ---------------------------------------------------------------------------

def _check_admissible(p: CoeffPoint) -> np.ndarray:
    one_plus_a = 1.0 + p.a
    if np.any(~(one_plus_a > 0.0)):
        worst = float(np.min(one_plus_a))
        raise DegenerateGeometryError(
            f"Degenerate geometry: 1 + gamma = {worst:.6g} <= 0 at an evaluation point."
        )
    return one_plus_a


def eval_phi(p: CoeffPoint) -> ArrayLike:
    """Return ``(1 + (x2 * dgamma)^2) / (1 + gamma)``."""
    one_plus_a = _check_admissible(p)
    b = p.b
    return _out((1.0 + b * b) / one_plus_a)


def eval_grad_phi(p: CoeffPoint) -> Tuple[ArrayLike, ArrayLike]:
    """Return ``(d_a phi, d_b phi)`` at ``(a, b) = (gamma, x2 * dgamma)``."""
    one_plus_a = _check_admissible(p)
    b = p.b
    d_a = -(1.0 + b * b) / (one_plus_a * one_plus_a)
    d_b = 2.0 * b / one_plus_a
    return _out(d_a), _out(d_b)


def eval_hess_phi(p: CoeffPoint) -> Matrix2:
    """Return the Hessian of ``phi`` in ``(a, b)``."""
    one_plus_a = _check_admissible(p)
    b = p.b
    d_aa = 2.0 * (1.0 + b * b) / one_plus_a**3
    d_ab = -2.0 * b / (one_plus_a * one_plus_a)
    d_bb = 2.0 / one_plus_a * np.ones_like(b)
    return Matrix2(_out(d_aa), _out(d_ab), _out(d_ab), _out(d_bb))


# ---------------------------------------------------------------------------
# A and its derivatives
# ---------------------------------------------------------------------------

def eval_A(p: CoeffPoint) -> Matrix2:
    """Return ``A[gamma]`` at *p*; symmetric with unit determinant."""
    phi = eval_phi(p)
    off = -p.b
    return Matrix2(_out(1.0 + p.a + 0.0 * off), _out(off), _out(off), phi)


def eval_DA_parts(p: CoeffPoint) -> Tuple[Matrix2, Matrix2]:
    """
    Split ``DA[gamma]<h>`` into the factors multiplying ``h`` and ``h'``.

    Returns:
        ``(A1, A2)`` with ``A1 = diag(1, d_a phi)`` and
        ``A2 = [[0, -x2], [-x2, x2 * d_b phi]]``.
    """
    d_a, d_b = eval_grad_phi(p)
    x2 = np.asarray(p.x2, dtype=float) + 0.0 * p.b
    zero = np.zeros_like(x2)
    a1 = Matrix2(_out(zero + 1.0), _out(zero), _out(zero), d_a)
    a2 = Matrix2(_out(zero), _out(-x2), _out(-x2), _out(x2 * d_b))
    return a1, a2


def eval_DA(p: CoeffPoint, h: Direction1D) -> Matrix2:
    """Directional derivative ``A1[gamma] h + A2[gamma] h'``."""
    a1, a2 = eval_DA_parts(p)
    return a1.scaled(h.h_val) + a2.scaled(h.dh_val)


def eval_D2A(p: CoeffPoint, h1: Direction1D, h2: Direction1D) -> Matrix2:
    """
    Second derivative ``D^2 A[gamma]<h1, h2>``; only the (2,2) entry is nonzero.

    The products are grouped so that swapping *h1* and *h2* gives a bitwise
    identical result.
    """
    hess = eval_hess_phi(p)
    x2 = np.asarray(p.x2, dtype=float)
    hh = np.multiply(h1.h_val, h2.h_val)
    mixed = np.multiply(h1.h_val, h2.dh_val) + np.multiply(h2.h_val, h1.dh_val)
    dd = np.multiply(h1.dh_val, h2.dh_val)
    d2 = hess.a11 * hh + hess.a12 * x2 * mixed + hess.a22 * (x2 * x2) * dd
    zero = np.zeros_like(np.asarray(d2, dtype=float))
    return Matrix2(_out(zero), _out(zero), _out(zero), _out(d2))


def eval_remainder_A(p: CoeffPoint, h: Direction1D) -> Matrix2:
    """First-order remainder ``A[gamma + h] - A[gamma] - DA[gamma]<h>``."""
    return eval_A(p.shifted(h)) - eval_A(p) - eval_DA(p, h)


def eval_remainder_DA(p: CoeffPoint, h1: Direction1D, h2: Direction1D) -> Matrix2:
    """Remainder ``DA[gamma + h2]<h1> - DA[gamma]<h1> - D^2A[gamma]<h1, h2>``."""
    return eval_DA(p.shifted(h2), h1) - eval_DA(p, h1) - eval_D2A(p, h1, h2)


# ---------------------------------------------------------------------------
# Domain map
# ---------------------------------------------------------------------------

def map_psi(
    curve: "BoundaryCurve",
    point: Tuple[ArrayLike, ArrayLike],
) -> Tuple[ArrayLike, ArrayLike]:
    """
    Map reference coordinates to the physical domain.

    Args:
        curve: Interface displacement gamma (piecewise linear).
        point: ``(x1, x2)`` in the unit square (scalars or arrays).

    Returns:
        ``(x1, (1 + gamma(x1)) * x2)``.
    """
    x1, x2 = point
    gamma = curve.evaluate(x1)
    return _out(np.asarray(x1, dtype=float)), _out((1.0 + gamma) * np.asarray(x2, dtype=float))
