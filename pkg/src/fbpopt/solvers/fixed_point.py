"""
Picard Driver

:func:`picard` iterates an :class:`~fbpopt.solvers.interface.IFixedPointMap`
from its initial iterate and records a :class:`FixedPointTrace`.  Hitting
the iteration cap raises :class:`~fbpopt.errors.ConvergenceError` carrying
the partial trace and the last iterate.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Tuple, TypeVar

import numpy as np
import pandas as pd

from ..errors import ConvergenceError
from .interface import IFixedPointMap

logger = logging.getLogger(__name__)

Iterate = TypeVar("Iterate")


@dataclass
class FixedPointTrace:
    """
    History of a fixed-point iteration.

    Attributes:
        distances:   Distance between iterates ``k`` and ``k + 1``.
        residuals:   Equation residuals of the final iterate.
        converged:   Whether the tolerance was met.
    """

    distances: List[float]        = field(default_factory=list)
    residuals: Dict[str, float]   = field(default_factory=dict)
    converged: bool               = False

    @property
    def iterations(self) -> int:
        return len(self.distances)

    @property
    def ratios(self) -> List[float]:
        """Successive distance ratios (pairs with a zero predecessor are skipped)."""
        d = self.distances
        return [d[k] / d[k - 1] for k in range(1, len(d)) if d[k - 1] > 0.0]

    def max_ratio(self, burn_in: int = 1, floor: float = 0.0) -> float:
        """Largest ratio after *burn_in* steps, ignoring steps at or below *floor*."""
        d = self.distances
        ratios = [
            d[k] / d[k - 1]
            for k in range(max(1, burn_in), len(d))
            if d[k - 1] > floor and d[k] > floor
        ]
        return max(ratios) if ratios else 0.0

    def to_frame(self) -> pd.DataFrame:
        ratio = [np.nan] + [
            self.distances[k] / self.distances[k - 1] if self.distances[k - 1] > 0.0 else np.nan
            for k in range(1, len(self.distances))
        ]
        return pd.DataFrame({
            "iteration": np.arange(1, len(self.distances) + 1),
            "distance": self.distances,
            "ratio": ratio,
        })

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "final_distance": self.distances[-1] if self.distances else None,
            "max_ratio": self.max_ratio(),
            "residuals": dict(self.residuals),
        }


def picard(fp_map: IFixedPointMap, tol: float, max_iter: int) -> Tuple[Iterate, FixedPointTrace]:
    """
    Iterate *fp_map* until both stopping measures are at most *tol*.

    Raises:
        ConvergenceError: After *max_iter* steps without convergence.
    """
    trace = FixedPointTrace()
    current = fp_map.initial()
    for k in range(max_iter):
        new = fp_map.step(current)
        dist = fp_map.distance(new, current)
        extra = fp_map.secondary_distance(new, current)
        trace.distances.append(dist)
        logger.debug("%s iteration %d: distance %.3e (secondary %.3e).", fp_map.label, k + 1, dist, extra)
        current = new
        if dist <= tol and extra <= tol:
            trace.converged = True
            break
    else:
        raise ConvergenceError(
            f"{fp_map.label} did not converge in {max_iter} iterations "
            f"(last distance {trace.distances[-1]:.3e}, tolerance {tol:.1e}).",
            trace=trace,
            iterate=current,
        )

    trace.residuals = fp_map.residuals(current)
    logger.info(
        "%s converged in %d iterations (distance %.3e, max ratio %.3g).",
        fp_map.label, trace.iterations, trace.distances[-1], trace.max_ratio(),
    )
    return current, trace
