"""
Structured Meshes

:class:`IntervalMesh` discretizes the interface parameter interval
I = (0, 1) with uniform P1 elements; :class:`SquareMesh` discretizes the
reference square with uniform Q1 elements.  Square nodes are numbered
row by row, ``index = j * (n + 1) + i`` for the node at ``(i h, j h)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class IntervalMesh:
    """Uniform mesh of (0, 1) with ``n_elems`` elements."""

    n_elems: int

    def __post_init__(self) -> None:
        if int(self.n_elems) != self.n_elems or self.n_elems < 2:
            raise ValueError(f"IntervalMesh needs n_elems >= 2, got {self.n_elems!r}.")

    @property
    def h(self) -> float:
        return 1.0 / self.n_elems

    @property
    def n_nodes(self) -> int:
        return self.n_elems + 1

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_nodes)

    @cached_property
    def interior(self) -> np.ndarray:
        return np.arange(1, self.n_elems)

    @cached_property
    def endpoints(self) -> np.ndarray:
        return np.array([0, self.n_elems])


@dataclass(frozen=True)
class SquareMesh:
    """
    Uniform mesh of the unit square with ``n`` elements per side.

    Boundary tags: ``gamma`` is the top edge ``x2 = 1`` (corners included),
    ``sigma`` is the lateral and bottom edges (corners included), so the
    two top corners carry both tags.
    """

    n: int

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"SquareMesh needs n >= 2, got {self.n!r}.")

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def n_nodes(self) -> int:
        return (self.n + 1) ** 2

    @property
    def n_elems(self) -> int:
        return self.n * self.n

    def node_index(self, i: int | np.ndarray, j: int | np.ndarray) -> int | np.ndarray:
        return j * (self.n + 1) + i

    @cached_property
    def grid_i(self) -> np.ndarray:
        return np.arange(self.n_nodes) % (self.n + 1)

    @cached_property
    def grid_j(self) -> np.ndarray:
        return np.arange(self.n_nodes) // (self.n + 1)

    @cached_property
    def x1(self) -> np.ndarray:
        return self.grid_i / self.n

    @cached_property
    def x2(self) -> np.ndarray:
        return self.grid_j / self.n

    @cached_property
    def gamma_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.grid_j == self.n)

    @cached_property
    def sigma_nodes(self) -> np.ndarray:
        i, j = self.grid_i, self.grid_j
        return np.flatnonzero((i == 0) | (i == self.n) | (j == 0))

    @cached_property
    def boundary_nodes(self) -> np.ndarray:
        return np.union1d(self.gamma_nodes, self.sigma_nodes)

    @cached_property
    def interior_nodes(self) -> np.ndarray:
        return np.setdiff1d(np.arange(self.n_nodes), self.boundary_nodes)

    @cached_property
    def element_nodes(self) -> np.ndarray:
        """Global node indices of every element, counter-clockwise from the lower left."""
        e = np.arange(self.n_elems)
        i, j = e % self.n, e // self.n
        return np.stack(
            [
                self.node_index(i, j),
                self.node_index(i + 1, j),
                self.node_index(i + 1, j + 1),
                self.node_index(i, j + 1),
            ],
            axis=1,
        )
