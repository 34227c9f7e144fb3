import numpy as np
import pytest

from fbpopt.errors import DegenerateGeometryError
from fbpopt.fem.fields import BoundaryCurve
from fbpopt.fem.mesh import IntervalMesh
from fbpopt.model.coeffs import (
    CoeffPoint,
    Direction1D,
    eval_A,
    eval_D2A,
    eval_DA,
    eval_phi,
    eval_remainder_A,
    eval_remainder_DA,
    map_psi,
)


@pytest.fixture
def points(rng):
    n = 10_000
    return CoeffPoint(
        gamma_val=rng.uniform(-0.5, 0.5, n),
        dgamma_val=rng.uniform(-1.0, 1.0, n),
        x2=rng.uniform(0.0, 1.0, n),
    )


def _direction(rng, n, scale=1.0):
    return Direction1D(scale * rng.uniform(-0.5, 0.5, n), scale * rng.uniform(-1.0, 1.0, n))


def _scaled(h, eps):
    return Direction1D(eps * np.asarray(h.h_val), eps * np.asarray(h.dh_val))


def test_flat_coefficient_is_identity():
    a = eval_A(CoeffPoint(0.0, 0.0, 0.7))
    assert (a.a11, a.a12, a.a21, a.a22) == (1.0, 0.0, 0.0, 1.0)


def test_A_symmetric_with_unit_determinant(points):
    a = eval_A(points)
    np.testing.assert_array_equal(a.a12, a.a21)
    np.testing.assert_allclose(a.det(), 1.0, rtol=0.0, atol=1e-14)


def test_phi_matches_closed_form():
    p = CoeffPoint(0.25, 0.8, 0.5)
    assert eval_phi(p) == pytest.approx((1.0 + 0.4**2) / 1.25, rel=1e-15)


def test_degenerate_geometry_raises():
    with pytest.raises(DegenerateGeometryError):
        eval_A(CoeffPoint(np.array([0.0, -1.0]), np.zeros(2), np.ones(2)))


@pytest.mark.parametrize("remainder", ["A", "DA"])
def test_taylor_remainders_are_second_order(points, rng, remainder):
    h1 = _direction(rng, points.a.size)
    h2 = _direction(rng, points.a.size)
    errors = []
    for eps in (1e-3, 5e-4, 2.5e-4):
        if remainder == "A":
            r = eval_remainder_A(points, _scaled(h1, eps))
        else:
            r = eval_remainder_DA(points, h1, _scaled(h2, eps))
        errors.append(r.max_norm())
    orders = [np.log(errors[k] / errors[k + 1]) / np.log(2.0) for k in range(2)]
    assert min(orders) >= 1.9


def test_DA_matches_central_difference(points, rng):
    h = _direction(rng, points.a.size)
    eps = 1e-6
    fd = (eval_A(points.shifted(_scaled(h, eps))) - eval_A(points.shifted(_scaled(h, -eps)))).scaled(0.5 / eps)
    np.testing.assert_allclose(fd.as_array(), eval_DA(points, h).as_array(), atol=1e-7)


def test_D2A_is_bitwise_symmetric(points, rng):
    h1 = _direction(rng, points.a.size)
    h2 = _direction(rng, points.a.size)
    np.testing.assert_array_equal(eval_D2A(points, h1, h2).as_array(), eval_D2A(points, h2, h1).as_array())


def test_D2A_only_in_lower_right_entry(points, rng):
    d2 = eval_D2A(points, _direction(rng, points.a.size), _direction(rng, points.a.size))
    assert not np.any(d2.a11) and not np.any(d2.a12)


def test_map_psi_stretches_vertically():
    mesh = IntervalMesh(4)
    curve = BoundaryCurve(mesh, np.array([0.0, 0.1, 0.2, 0.1, 0.0]))
    x1, x2 = map_psi(curve, (np.array([0.5, 0.25]), np.array([1.0, 0.5])))
    np.testing.assert_allclose(x1, [0.5, 0.25])
    np.testing.assert_allclose(x2, [1.2, 0.55])
