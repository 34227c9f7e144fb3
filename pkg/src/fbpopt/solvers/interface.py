"""
Fixed-Point Map Interface

The state, tangent and adjoint solvers all iterate a map ``T`` until two
successive iterates are close.  Each implements :class:`IFixedPointMap`
and is driven by :func:`~fbpopt.solvers.fixed_point.picard`.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Dict, Generic, TypeVar

Iterate = TypeVar("Iterate")


class IFixedPointMap(ABC, Generic[Iterate]):
    """
    Interface for maps iterated by the Picard driver.

    The driver stops when :meth:`distance` and :meth:`secondary_distance`
    between successive iterates are both below the tolerance, then records
    :meth:`residuals` of the converged iterate.
    """

    label: str = "fixed point"

    @abstractmethod
    def initial(self) -> Iterate:
        """Return the starting iterate."""
        ...

    @abstractmethod
    def step(self, iterate: Iterate) -> Iterate:
        """Apply the map once."""
        ...

    @abstractmethod
    def distance(self, a: Iterate, b: Iterate) -> float:
        """Distance in the metric in which the map contracts."""
        ...

    def secondary_distance(self, a: Iterate, b: Iterate) -> float:
        """Additional stopping measure; 0 when the metric alone decides."""
        return 0.0

    @abstractmethod
    def residuals(self, iterate: Iterate) -> Dict[str, float]:
        """Residuals of the equations the fixed point should satisfy."""
        ...
