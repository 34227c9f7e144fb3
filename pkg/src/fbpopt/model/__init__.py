"""
Model Module

Pointwise coefficients of the reference-domain problem.  Problem data live
in :mod:`fbpopt.model.problem` (imported directly, since it depends on
:mod:`fbpopt.fem`).
"""

from .coeffs import (
    CoeffPoint,
    Direction1D,
    Matrix2,
    eval_A,
    eval_D2A,
    eval_DA,
    eval_DA_parts,
    eval_grad_phi,
    eval_hess_phi,
    eval_phi,
    eval_remainder_A,
    eval_remainder_DA,
    map_psi,
)

__all__ = [
    "CoeffPoint",
    "Direction1D",
    "Matrix2",
    "eval_A",
    "eval_D2A",
    "eval_DA",
    "eval_DA_parts",
    "eval_grad_phi",
    "eval_hess_phi",
    "eval_phi",
    "eval_remainder_A",
    "eval_remainder_DA",
    "map_psi",
]
