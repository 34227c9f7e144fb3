import numpy as np
import pytest

from fbpopt.constants import ConstantsLedger, compute_thresholds
from fbpopt.errors import ConvergenceError, DegenerateGeometryError
from fbpopt.fem.fields import BoundaryCurve, ControlProfile
from fbpopt.model.problem import DataNorms
from fbpopt.solvers.state import SolverSettings

from conftest import GENERIC_GAMMA_D, GENERIC_V, make_state


def _ledger(beta=2.0, c_a=20.0):
    base = ConstantsLedger(kappa=1.0, lam=0.1, p=4.0, alpha=1.0, beta=beta, C_A=c_a, C_E=1.0)
    return compute_thresholds(base, DataNorms())


def test_flat_data_gives_zero_state_in_one_step():
    state = make_state(32)
    pair, trace = state.solve_state(ControlProfile.zeros(state.interval))
    assert trace.iterations == 1
    assert trace.converged
    assert np.max(np.abs(pair.gamma.values)) <= 1e-12
    assert np.max(np.abs(pair.y.values)) <= 1e-12


def test_constant_control_without_lift_bends_interface():
    state = make_state(8)
    u = ControlProfile(state.interval, np.ones(state.interval.n_nodes))
    pair, trace = state.solve_state(u)
    x = state.interval.nodes
    np.testing.assert_allclose(pair.gamma.values, 0.5 * x * (1.0 - x), atol=1e-12)
    assert np.max(np.abs(pair.y.values)) == 0.0
    assert trace.iterations <= 2


def test_zero_control_with_lift_converges_in_one_step():
    state = make_state(8, v=0.3)
    pair, trace = state.solve_state(ControlProfile.zeros(state.interval))
    assert trace.iterations == 1
    assert np.max(np.abs(pair.gamma.values)) <= 1e-12


def test_generic_state_residuals_and_contraction(generic_state, random_profile):
    u = random_profile(generic_state.interval, 0.2)
    pair, trace = generic_state.solve_state(u)
    assert trace.converged
    residuals = generic_state.state_residuals(pair, u)
    assert residuals["interface"] <= 1e-9
    assert residuals["bulk"] <= 1e-9
    assert trace.max_ratio(floor=1e-10) <= 0.5
    assert pair.satisfies_state_constraint


def test_solution_is_fixed_point_of_step(generic_state, random_profile):
    u = random_profile(generic_state.interval, 0.2)
    pair, _ = generic_state.solve_state(u)
    again = generic_state.apply_T(pair, u)
    assert generic_state.distance(again, pair) <= 1e-9


def test_states_are_cached(generic_state):
    u = ControlProfile.zeros(generic_state.interval)
    first = generic_state.solve_state(u)
    second = generic_state.solve_state(ControlProfile.zeros(generic_state.interval))
    assert first[0] is second[0]
    assert first[1] is second[1]


def test_degenerate_geometry_is_reported():
    state = make_state(8)
    u = ControlProfile(state.interval, -20.0 * np.ones(state.interval.n_nodes))
    with pytest.raises(DegenerateGeometryError):
        state.solve_state(u)


def test_iteration_cap_raises_with_trace():
    state = make_state(8, settings=SolverSettings(max_iter=1), v=GENERIC_V, gamma_d=GENERIC_GAMMA_D)
    u = ControlProfile(state.interval, np.ones(state.interval.n_nodes))
    with pytest.raises(ConvergenceError) as info:
        state.solve_state(u)
    assert info.value.trace.iterations == 1
    assert not info.value.trace.converged
    assert info.value.iterate is not None


def test_mesh_must_be_nested():
    with pytest.raises(ValueError, match="multiple"):
        make_state(4, n_square=6)


def test_ball_membership(generic_state):
    pair, _ = generic_state.solve_state(ControlProfile.zeros(generic_state.interval))
    report = generic_state.check_ball(pair, _ledger())
    assert report.slope_ok
    assert report.y_ok
    assert report.inside


def test_admissibility_flags_large_control(generic_state):
    ledger = _ledger()
    small = generic_state.check_admissibility(ControlProfile.zeros(generic_state.interval), ledger)
    assert small.u_in_U and small.u_in_Uad
    big = ControlProfile(generic_state.interval, 5.0 * np.ones(generic_state.interval.n_nodes))
    report = generic_state.check_admissibility(big, ledger)
    assert not report.u_in_U
    assert not report.passed
    assert report.failures()


def test_weighted_norm_uses_floor():
    state = make_state(4, settings=SolverSettings(weight_floor=1e-3))
    assert state.v_norm == 0.0
    assert state.weight == pytest.approx(1e-3)


# ---------------------------------------------------------------------------
# Partial maps
# ---------------------------------------------------------------------------

def test_interface_update_of_unit_load():
    state = make_state(8)
    flat = state.zero_pair()
    u = ControlProfile(state.interval, np.ones(state.interval.n_nodes))
    gamma = state.apply_T1(flat.gamma, flat.y, u)
    x = state.interval.nodes
    np.testing.assert_allclose(gamma.values, 0.5 * x * (1.0 - x), atol=1e-12)
    assert np.all(state.apply_T1(flat.gamma, flat.y, ControlProfile.zeros(state.interval)).values == 0.0)


def test_interface_update_is_affine_in_control(generic_state, random_profile):
    u1 = random_profile(generic_state.interval, 0.2)
    u2 = random_profile(generic_state.interval, 0.2)
    pair, _ = generic_state.solve_state(u1)
    zero = ControlProfile.zeros(generic_state.interval)

    def step(u):
        return generic_state.apply_T1(pair.gamma, pair.y, u).values

    np.testing.assert_allclose(step(u1 + u2) + step(zero), step(u1) + step(u2), atol=1e-13)
    flat = generic_state.zero_pair()
    decoupled = make_state(8)
    np.testing.assert_allclose(
        decoupled.apply_T1(flat.gamma, flat.y, u1 * 2.0).values,
        2.0 * decoupled.apply_T1(flat.gamma, flat.y, u1).values,
        atol=1e-14,
    )


def test_bulk_update_vanishes_without_lift():
    state = make_state(8)
    gamma = BoundaryCurve.from_function(state.interval, lambda x: 0.2 * np.sin(np.pi * x))
    y = state.apply_T2(gamma)
    assert np.all(y.values == 0.0)


@pytest.mark.parametrize("v", [0.3, "x2"])
def test_bulk_update_of_harmonic_lift(v):
    state = make_state(8, v=v)
    y = state.apply_T2(BoundaryCurve.zeros(state.interval))
    assert np.max(np.abs(y.values)) <= 1e-12


# ---------------------------------------------------------------------------
# Symmetry
# ---------------------------------------------------------------------------

def test_mirror_symmetric_data_give_symmetric_state():
    state = make_state(16, v=GENERIC_V)
    u = ControlProfile.from_function(state.interval, lambda x: 0.3 * np.cos(2.0 * np.pi * x))
    pair, trace = state.solve_state(u)
    assert trace.converged
    square = state.square
    mirrored = square.node_index(square.n - square.grid_i, square.grid_j)
    np.testing.assert_allclose(pair.gamma.values, pair.gamma.values[::-1], atol=1e-10)
    np.testing.assert_allclose(pair.y.values, pair.y.values[mirrored], atol=1e-10)
    assert np.max(np.abs(pair.y.values)) > 0.0
