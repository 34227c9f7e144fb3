import numpy as np
import pytest

from fbpopt.control import (
    ReducedCost,
    check_quadratic_growth,
    check_stationarity,
    in_cone,
    l2_inner,
    l2_norm,
    on_boundary,
    optimize,
    project_Uad,
    sample_cone_directions,
    verify_soc,
)
from fbpopt.fem import assemble_B_Gamma, assemble_mass_1d, interval_quadrature
from fbpopt.fem.fields import ControlProfile
from fbpopt.fem.mesh import IntervalMesh

from conftest import make_state

DECOUPLED_GAMMA_D = "0.05*sin(pi*x1)"


def _dense_oracle(cost):
    """Minimizer of the quadratic cost obtained when the lift vanishes."""
    state = cost.state
    mesh = state.interval
    mass = assemble_mass_1d(mesh).toarray()
    stiff = assemble_B_Gamma(mesh, state.data.kappa).toarray()
    inner = mesh.interior
    s = np.zeros((mesh.n_nodes, mesh.n_nodes))
    s[inner] = np.linalg.solve(stiff[np.ix_(inner, inner)], mass[inner])
    iq = interval_quadrature(mesh)
    b = iq.values.T @ (iq.weights * state.data.gamma_d_at(iq.x))
    hessian = s.T @ mass @ s + cost.lam * mass
    return s, np.linalg.solve(hessian, s.T @ b)


# ---------------------------------------------------------------------------
# Projection
# ---------------------------------------------------------------------------

def test_projection_onto_ball():
    mesh = IntervalMesh(4)
    u = ControlProfile(mesh, 3.0 * np.ones(mesh.n_nodes))
    projected = project_Uad(u, 1.0)
    assert l2_norm(projected) == pytest.approx(1.0)
    assert on_boundary(projected, 1.0)
    np.testing.assert_allclose(projected.values, np.ones(mesh.n_nodes))
    inside = ControlProfile(mesh, 0.5 * np.ones(mesh.n_nodes))
    assert project_Uad(inside, 1.0) is inside
    assert not on_boundary(inside, 1.0)


def test_projection_rejects_radius():
    with pytest.raises(ValueError, match="radius"):
        project_Uad(ControlProfile.zeros(IntervalMesh(2)), 0.0)


def test_inner_product_mesh_mismatch():
    with pytest.raises(ValueError, match="different meshes"):
        l2_inner(ControlProfile.zeros(IntervalMesh(2)), ControlProfile.zeros(IntervalMesh(4)))


# ---------------------------------------------------------------------------
# Derivatives of the reduced cost
# ---------------------------------------------------------------------------

def test_gradient_matches_finite_differences(generic_cost, random_profile):
    interval = generic_cost.state.interval
    u = random_profile(interval, 0.2)
    h = random_profile(interval)
    table = generic_cost.gradient_fd_table(u, h, [1e-2, 1e-3])
    assert list(table.columns) == ["eps", "fd", "adjoint", "abs_error", "rel_error"]
    assert table["rel_error"].iloc[-1] <= 1e-4


def test_sensitivity_route_of_zero_direction(generic_cost):
    u = ControlProfile.zeros(generic_cost.state.interval)
    assert generic_cost.eval_gradient_direction(u, u) == 0.0


def test_second_derivative_symmetric(generic_cost, random_profile):
    interval = generic_cost.state.interval
    u = random_profile(interval, 0.2)
    h1, h2 = random_profile(interval), random_profile(interval)
    a = generic_cost.eval_Jsecond(u, h1, h2)
    b = generic_cost.eval_Jsecond(u, h2, h1)
    assert a == pytest.approx(b, rel=1e-8)


def test_decoupled_hessian_is_quadratic_form(decoupled_cost, random_profile):
    s, _ = _dense_oracle(decoupled_cost)
    interval = decoupled_cost.state.interval
    mass = assemble_mass_1d(interval).toarray()
    h = random_profile(interval)
    expected = (s @ h.values) @ mass @ (s @ h.values) + decoupled_cost.lam * h.values @ mass @ h.values
    u = random_profile(interval, 0.2)
    assert decoupled_cost.eval_Jsecond(u, h, h) == pytest.approx(expected, rel=1e-10)


def test_hessian_matches_gradient_differences(generic_cost, random_profile):
    interval = generic_cost.state.interval
    u = random_profile(interval, 0.2)
    assert generic_cost.hessian_fd_error(u, random_profile(interval)) <= 1e-3


# ---------------------------------------------------------------------------
# Optimizer
# ---------------------------------------------------------------------------

def test_optimizer_reaches_unconstrained_minimizer():
    cost = ReducedCost(make_state(16, gamma_d=DECOUPLED_GAMMA_D))
    _, u_star = _dense_oracle(cost)
    result = optimize(cost, ControlProfile.zeros(cost.state.interval), radius=10.0)
    assert result.converged
    assert result.vi_residual <= 1e-9
    assert all(b <= a + 1e-15 for a, b in zip(result.costs, result.costs[1:]))
    np.testing.assert_allclose(result.control.values, u_star, atol=1e-7)


@pytest.mark.slow
def test_optimizer_on_finer_mesh():
    cost = ReducedCost(make_state(32, gamma_d=DECOUPLED_GAMMA_D))
    _, u_star = _dense_oracle(cost)
    result = optimize(cost, ControlProfile.zeros(cost.state.interval), radius=10.0)
    np.testing.assert_allclose(result.control.values, u_star, atol=1e-7)


def test_optimizer_with_active_constraint(decoupled_cost):
    _, u_star = _dense_oracle(decoupled_cost)
    interval = decoupled_cost.state.interval
    radius = 0.5 * l2_norm(ControlProfile(interval, u_star))
    result = optimize(decoupled_cost, ControlProfile.zeros(interval), radius=radius, opt_tol=1e-10)
    assert result.converged
    assert result.vi_residual <= 1e-8
    assert on_boundary(result.control, radius, rtol=1e-8)


def test_optimizer_returns_best_iterate_when_capped(decoupled_cost):
    interval = decoupled_cost.state.interval
    result = optimize(decoupled_cost, ControlProfile.zeros(interval), radius=10.0, max_iter=1)
    assert not result.converged
    assert result.iterations == 1
    assert decoupled_cost.eval_cost(result.control) == pytest.approx(min(result.costs))


# ---------------------------------------------------------------------------
# Second-order checks
# ---------------------------------------------------------------------------

def test_cone_rejects_outward_direction(decoupled_cost, rng):
    interval = decoupled_cost.state.interval
    u = ControlProfile(interval, np.ones(interval.n_nodes))
    radius = l2_norm(u)
    assert not in_cone(u, u, radius)
    assert in_cone(u, -1.0 * u, radius)
    assert in_cone(u, u, 2.0 * radius)
    directions, rejected = sample_cone_directions(u, radius, 5, rng)
    assert rejected >= 1
    assert all(l2_inner(u, h) <= 1e-12 for h in directions)
    assert all(l2_norm(h) == pytest.approx(1.0) for h in directions)


def test_soc_holds_without_lift(decoupled_cost, rng):
    interval = decoupled_cost.state.interval
    result = optimize(decoupled_cost, ControlProfile.zeros(interval), radius=1.0)
    report = verify_soc(decoupled_cost, result.control, 1.0, n_samples=8, rng=rng)
    assert report.passed
    assert report.min_ratio >= decoupled_cost.lam * (1.0 - 1e-10)
    assert report.premise_ok is None


def test_growth_and_stationarity_at_optimum(decoupled_cost, rng):
    interval = decoupled_cost.state.interval
    result = optimize(decoupled_cost, ControlProfile.zeros(interval), radius=1.0)
    growth = check_quadratic_growth(decoupled_cost, result.control, 1.0, n_directions=4, rng=rng)
    assert growth.stationary
    assert growth.passed
    assert growth.largest_radius == pytest.approx(0.1)
    stationarity = check_stationarity(decoupled_cost, result.control, 1.0, n_samples=10, opt_tol=1e-8, rng=rng)
    assert stationarity.passed


def test_growth_steps_stay_in_ball_at_boundary_control(decoupled_cost, rng):
    interval = decoupled_cost.state.interval
    free = optimize(decoupled_cost, ControlProfile.zeros(interval), radius=1.0).control
    radius = 0.5 * l2_norm(free)
    result = optimize(decoupled_cost, ControlProfile.zeros(interval), radius=radius)
    assert on_boundary(result.control, radius, rtol=1e-8)
    growth = check_quadratic_growth(decoupled_cost, result.control, radius, n_directions=20, rng=rng)
    assert len(growth.rows) == 4 * growth.n_directions >= 4 * 20
    for row in growth.rows:
        assert row["u_norm"] <= radius * (1.0 + 1e-12)
        assert row["h_norm"] <= row["scale"] * (1.0 + 1e-12)
    assert growth.passed


def test_growth_step_is_unchanged_inside_ball(decoupled_cost, rng):
    u_bar = ControlProfile.zeros(decoupled_cost.state.interval)
    growth = check_quadratic_growth(decoupled_cost, u_bar, 1.0, n_directions=3, rng=rng)
    for row in growth.rows:
        assert row["h_norm"] == pytest.approx(row["scale"], rel=1e-12)
