from .estimates import (
    CABounds,
    analytic_CA,
    analytic_CA_parts,
    compute_CE,
    default_alpha,
    discrete_beta,
    estimate_beta,
)
from .ledger import DEFAULT_THETA2, ConstantsLedger, compute_thresholds
from .lipschitz import measure_contraction, measure_lipschitz, sample_ball_pair, sample_controls
from .regularity import gagliardo_seminorm, gagliardo_seminorm_of_slopes, recovered_slopes

__all__ = [
    "CABounds",
    "ConstantsLedger",
    "DEFAULT_THETA2",
    "analytic_CA",
    "analytic_CA_parts",
    "compute_CE",
    "compute_thresholds",
    "default_alpha",
    "discrete_beta",
    "estimate_beta",
    "gagliardo_seminorm",
    "gagliardo_seminorm_of_slopes",
    "measure_contraction",
    "measure_lipschitz",
    "recovered_slopes",
    "sample_ball_pair",
    "sample_controls",
]
