"""Shared fixtures: coarse meshes, the generic data set and seeded generators."""

from __future__ import annotations

from typing import Callable

import numpy as np
import pytest

from fbpopt.control.cost import ReducedCost
from fbpopt.data.expression import Expression
from fbpopt.fem.fields import ControlProfile
from fbpopt.fem.mesh import IntervalMesh, SquareMesh
from fbpopt.model.problem import ProblemData
from fbpopt.solvers.state import SolverSettings, StateSolver

GENERIC_V = "0.05*x2*sin(pi*x1)"
GENERIC_GAMMA_D = "0.1*sin(pi*x1)"


def make_data(
    v: object = 0.0,
    gamma_d: object = 0.0,
    y_d: object = 0.0,
    u0: object = 0.0,
    kappa: float = 1.0,
    lam: float = 0.1,
    p: float = 4.0,
) -> ProblemData:
    def source(value: object) -> object:
        return Expression.parse(value) if isinstance(value, str) else value

    return ProblemData(kappa, lam, p, source(v), source(gamma_d), source(y_d), source(u0))


def make_state(n: int = 8, n_square: int | None = None, settings: SolverSettings = SolverSettings(), **data) -> StateSolver:
    return StateSolver(make_data(**data), IntervalMesh(n), SquareMesh(n_square or n), settings)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240607)


@pytest.fixture
def generic_state() -> StateSolver:
    return make_state(8, v=GENERIC_V, gamma_d=GENERIC_GAMMA_D)


@pytest.fixture
def generic_cost(generic_state: StateSolver) -> ReducedCost:
    return ReducedCost(generic_state)


@pytest.fixture
def decoupled_cost() -> ReducedCost:
    """``v = 0``: the interface equation decouples and the cost is quadratic."""
    return ReducedCost(make_state(8, gamma_d="0.05*sin(pi*x1)"))


@pytest.fixture
def random_profile(rng: np.random.Generator) -> Callable[[IntervalMesh, float], ControlProfile]:
    def build(mesh: IntervalMesh, scale: float = 1.0) -> ControlProfile:
        return ControlProfile(mesh, scale * rng.standard_normal(mesh.n_nodes))

    return build
