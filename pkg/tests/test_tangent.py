import numpy as np
import pytest

from fbpopt.constants import ConstantsLedger, compute_thresholds
from fbpopt.fem.fields import ControlProfile
from fbpopt.solvers.tangent import LinearRHS, TangentSolver

from conftest import make_state


@pytest.fixture
def tangent(generic_state):
    return TangentSolver(generic_state)


@pytest.fixture
def base_u(generic_state, random_profile):
    return random_profile(generic_state.interval, 0.2)


def _ledger(state):
    base = ConstantsLedger(kappa=1.0, lam=0.1, p=4.0, alpha=1.0, beta=2.0, C_A=20.0, C_E=1.0)
    return compute_thresholds(base, state.data.data_norms(state.interval, state.square))


def test_decoupled_derivative_is_interface_solve():
    state = make_state(8)
    interval = state.interval
    pair = TangentSolver(state).apply_Gprime(
        ControlProfile.zeros(interval), ControlProfile(interval, np.ones(interval.n_nodes))
    )
    x = interval.nodes
    np.testing.assert_allclose(pair.gamma.values, 0.5 * x * (1.0 - x), atol=1e-12)
    assert np.max(np.abs(pair.y.values)) <= 1e-14


def test_derivative_is_linear(tangent, base_u, random_profile):
    interval = tangent.state.interval
    h1, h2 = random_profile(interval), random_profile(interval)
    combined = tangent.apply_Gprime(base_u, 2.0 * h1 - 3.0 * h2)
    t1 = tangent.apply_Gprime(base_u, h1)
    t2 = tangent.apply_Gprime(base_u, h2)
    np.testing.assert_allclose(combined.gamma.values, 2.0 * t1.gamma.values - 3.0 * t2.gamma.values, atol=1e-9)
    np.testing.assert_allclose(combined.y.values, 2.0 * t1.y.values - 3.0 * t2.y.values, atol=1e-9)


def test_linearized_residuals(tangent, base_u, random_profile):
    state = tangent.state
    base, _ = state.solve_state(base_u)
    _, trace = tangent.solve_linearized(base, tangent.first_rhs(random_profile(state.interval)))
    assert trace.converged
    assert max(trace.residuals.values()) <= 1e-9


@pytest.mark.parametrize("order", [1, 2])
def test_frechet_ratios_decrease(tangent, base_u, random_profile, order):
    h = random_profile(tangent.state.interval)
    frame = tangent.verify_frechet(base_u, h, order=order)
    assert list(frame.columns) == ["eps", "remainder", "ratio"]
    ratios = frame["ratio"].to_numpy()
    assert ratios[-1] <= 0.5 * ratios[0]


def test_frechet_zero_direction(tangent, base_u):
    frame = tangent.verify_frechet(base_u, ControlProfile.zeros(tangent.state.interval))
    assert (frame["ratio"] == 0.0).all()


def test_frechet_rejects_order(tangent, base_u):
    with pytest.raises(ValueError, match="order"):
        tangent.verify_frechet(base_u, base_u, order=3)


def test_second_derivative_symmetric(tangent, base_u, random_profile):
    interval = tangent.state.interval
    h1, h2 = random_profile(interval), random_profile(interval)
    a = tangent.apply_Gsecond(base_u, h1, h2)
    b = tangent.apply_Gsecond(base_u, h2, h1)
    np.testing.assert_allclose(a.gamma.values, b.gamma.values, atol=1e-9)
    np.testing.assert_allclose(a.y.values, b.y.values, atol=1e-9)


def test_second_derivative_matches_difference_of_first(tangent, base_u, random_profile):
    interval = tangent.state.interval
    h1, h2 = random_profile(interval), random_profile(interval)
    eps = 1e-3
    plus = tangent.apply_Gprime(base_u + eps * h2, h1)
    minus = tangent.apply_Gprime(base_u - eps * h2, h1)
    exact = tangent.apply_Gsecond(base_u, h1, h2)
    fd = (plus.gamma.values - minus.gamma.values) / (2.0 * eps)
    scale = np.max(np.abs(exact.gamma.values))
    assert scale > 0.0
    np.testing.assert_allclose(fd, exact.gamma.values, atol=1e-4 * scale)


def test_rhs_shape_mismatch(tangent, base_u):
    base, _ = tangent.state.solve_state(base_u)
    with pytest.raises(ValueError, match="dimensions"):
        tangent.solve_linearized(base, LinearRHS(np.zeros(3), np.zeros(3)))


def test_a_priori_bound_report(tangent, base_u, random_profile):
    state = tangent.state
    base, _ = state.solve_state(base_u)
    h = random_profile(state.interval)
    report = tangent.a_priori_bound(base, tangent.first_rhs(h), _ledger(state))
    assert set(report) == {
        "F_Omega_dual", "F_Gamma_dual", "gamma_norm", "gamma_bound", "y_norm", "y_bound", "within_bounds",
    }
    assert report["F_Omega_dual"] == 0.0
    assert report["F_Gamma_dual"] > 0.0


def test_second_derivative_bound_report(tangent, base_u, random_profile):
    interval = tangent.state.interval
    report = tangent.second_derivative_bound(
        base_u, random_profile(interval), random_profile(interval), _ledger(tangent.state)
    )
    assert report["gamma_norm"] > 0.0
    assert isinstance(report["within_bounds"], bool)
