"""
Constants Ledger

:class:`ConstantsLedger` keeps the base constants of the well-posedness
theory (``alpha``, ``beta``, ``C_A``, ``C_E``, ``theta1``, ``theta2``)
together with every derived threshold.  :func:`compute_thresholds` fills
the derived fields from the base ones and the data norms:

    Lambda1 = 1 + beta C_A,      Lambda2 = 1 + 2 beta C_A
    omega1  = 1 + |gamma_d|,     omega2  = (1 - theta1) / (alpha C_E C_A) + |y_d|
    v_inv   = (1 - theta1) / (alpha C_E C_A Lambda1)
    v_contr = (1 - theta2) / (alpha C_E C_A Lambda1^2)
    L_G     = (alpha / theta2) Lambda1^2 |v|
    theta3  = theta2^2 / (alpha^2 Lambda1)
              / [ (C_A Lambda2 / theta2) (alpha C_E Lambda1 (omega1 + omega2^2 / 2)
                                          + 2 beta omega2)
                  + 2 Lambda1^2 omega2 ]
    v_soc   = theta3 lambda / 2

Every report embeds the ledger through :meth:`ConstantsLedger.to_dict`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, fields, replace
from typing import Any, Dict, Optional

from ..errors import ThresholdRangeError
from ..model.problem import DataNorms

logger = logging.getLogger(__name__)

DEFAULT_THETA2 = 0.5


@dataclass(frozen=True)
class ConstantsLedger:
    """
    Base constants and derived thresholds.

    ``theta1``/``theta2`` left as ``None`` are set by
    :func:`compute_thresholds` (midpoint of the admissible interval and
    :data:`DEFAULT_THETA2`).  ``L_Gprime`` and ``L_Gsecond`` are recorded
    empirical values (unset until measured or overridden).
    """

    kappa:  float
    lam:    float
    p:      float
    alpha:  float
    beta:   float
    C_A:    float
    C_E:    float
    theta1: Optional[float] = None
    theta2: Optional[float] = None

    # derived
    lambda1:       Optional[float] = None
    lambda2:       Optional[float] = None
    omega1:        Optional[float] = None
    omega2:        Optional[float] = None
    theta3:        Optional[float] = None
    v_invariance:  Optional[float] = None
    v_contraction: Optional[float] = None
    v_soc:         Optional[float] = None
    u_radius:      Optional[float] = None
    uad_radius:    Optional[float] = None
    L_G:           Optional[float] = None
    L_Gprime:      Optional[float] = None
    L_Gsecond:     Optional[float] = None
    data_norms:    Optional[DataNorms] = None

    # ------------------------------------------------------------------
    # Properties
    # ------------------------------------------------------------------

    @property
    def q(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def theta1_interval(self) -> tuple[float, float]:
        """Open interval ``(beta C_A / (1 + beta C_A), 1)`` for theta1."""
        bc = self.beta * self.C_A
        return bc / (1.0 + bc), 1.0

    @property
    def is_complete(self) -> bool:
        return self.theta3 is not None

    # ------------------------------------------------------------------
    # Serialization
    # ------------------------------------------------------------------

    def to_dict(self) -> Dict[str, Any]:
        out = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "data_norms"}
        out["q"] = self.q
        out["data_norms"] = self.data_norms.to_dict() if self.data_norms else None
        return out

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "ConstantsLedger":
        names = {f.name for f in fields(cls)}
        kwargs = {k: v for k, v in payload.items() if k in names and k != "data_norms"}
        norms = payload.get("data_norms")
        if norms:
            kwargs["data_norms"] = DataNorms(**norms)
        return cls(**kwargs)

    def with_overrides(self, **overrides: Any) -> "ConstantsLedger":
        """Replace base constants; ``None`` values are ignored."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


def compute_thresholds(ledger: ConstantsLedger, data_norms: DataNorms) -> ConstantsLedger:
    """
    Fill every derived field of *ledger*.

    Args:
        ledger:     Ledger with base constants set.
        data_norms: ``|gamma_d|_L2``, ``|y_d|_L2`` and ``|v|_W1p``.

    Returns:
        A new, complete ledger.  Recorded ``L_Gprime``/``L_Gsecond`` are kept.

    Raises:
        ThresholdRangeError: theta1 or theta2 outside its open interval.
        ValueError:          Non-positive base constants.
    """
    for name in ("kappa", "lam", "alpha", "beta", "C_A", "C_E"):
        if not getattr(ledger, name) > 0.0:
            raise ValueError(f"Ledger constant {name} must be positive, got {getattr(ledger, name)!r}.")

    lower, upper = ledger.theta1_interval
    theta1 = ledger.theta1 if ledger.theta1 is not None else 0.5 * (lower + upper)
    theta2 = ledger.theta2 if ledger.theta2 is not None else DEFAULT_THETA2
    if not lower < theta1 < upper:
        raise ThresholdRangeError(
            f"theta1 = {theta1!r} must lie in the open interval ({lower:.17g}, {upper:.17g})."
        )
    if not 0.0 < theta2 < 1.0:
        raise ThresholdRangeError(f"theta2 = {theta2!r} must lie in the open interval (0, 1).")

    alpha, beta, c_a, c_e = ledger.alpha, ledger.beta, ledger.C_A, ledger.C_E
    aec = alpha * c_e * c_a
    lambda1 = 1.0 + beta * c_a
    lambda2 = 1.0 + 2.0 * beta * c_a
    omega1 = 1.0 + data_norms.gamma_d_l2
    omega2 = (1.0 - theta1) / aec + data_norms.y_d_l2

    inner = alpha * c_e * lambda1 * (omega1 + 0.5 * omega2**2) + 2.0 * beta * omega2
    denominator = c_a * lambda2 / theta2 * inner + 2.0 * lambda1**2 * omega2
    theta3 = theta2**2 / (alpha**2 * lambda1) / denominator

    completed = replace(
        ledger,
        theta1=theta1,
        theta2=theta2,
        lambda1=lambda1,
        lambda2=lambda2,
        omega1=omega1,
        omega2=omega2,
        theta3=theta3,
        v_invariance=(1.0 - theta1) / (aec * lambda1),
        v_contraction=(1.0 - theta2) / (aec * lambda1**2),
        v_soc=0.5 * theta3 * ledger.lam,
        u_radius=theta1 / alpha,
        uad_radius=theta1 / (2.0 * alpha),
        L_G=alpha / theta2 * lambda1**2 * data_norms.v_w1p,
        data_norms=data_norms,
    )
    logger.info(
        "Thresholds: theta1=%.6g theta2=%.6g theta3=%.6g v_inv=%.6g v_contr=%.6g.",
        theta1, theta2, theta3, completed.v_invariance, completed.v_contraction,
    )
    return completed
