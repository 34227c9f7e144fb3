import numpy as np
import pytest

from fbpopt.constants import (
    ConstantsLedger,
    analytic_CA,
    analytic_CA_parts,
    compute_CE,
    compute_thresholds,
    default_alpha,
    discrete_beta,
    estimate_beta,
    gagliardo_seminorm,
    gagliardo_seminorm_of_slopes,
    measure_contraction,
    measure_lipschitz,
    recovered_slopes,
    sample_ball_pair,
)
from fbpopt.errors import ThresholdRangeError
from fbpopt.fem.fields import BoundaryCurve, ControlProfile
from fbpopt.fem.mesh import IntervalMesh, SquareMesh
from fbpopt.model.problem import DataNorms
from fbpopt.output.models import CheckStatus

from conftest import GENERIC_V, make_state

SMALL_V = "0.001*x2*sin(pi*x1)"


def _unit_ledger(**overrides):
    values = dict(kappa=1.0, lam=1.0, p=4.0, alpha=1.0, beta=1.0, C_A=1.0, C_E=1.0, theta1=0.6, theta2=0.5)
    values.update(overrides)
    return ConstantsLedger(**values)


def _state_ledger(state):
    base = ConstantsLedger(kappa=1.0, lam=0.1, p=4.0, alpha=2.0, beta=2.0, C_A=20.0, C_E=1.0)
    return compute_thresholds(base, state.data.data_norms(state.interval, state.square))


# ---------------------------------------------------------------------------
# Ledger
# ---------------------------------------------------------------------------

def test_thresholds_of_unit_constants():
    ledger = compute_thresholds(_unit_ledger(), DataNorms())
    assert ledger.is_complete
    assert ledger.lambda1 == pytest.approx(2.0)
    assert ledger.lambda2 == pytest.approx(3.0)
    assert ledger.omega1 == pytest.approx(1.0)
    assert ledger.omega2 == pytest.approx(0.4)
    assert ledger.v_invariance == pytest.approx(0.2)
    assert ledger.v_contraction == pytest.approx(0.125)
    assert ledger.theta3 == pytest.approx(0.125 / 20.96, rel=1e-12)
    assert ledger.v_soc == pytest.approx(0.5 * 0.125 / 20.96, rel=1e-12)
    assert ledger.u_radius == pytest.approx(0.6)
    assert ledger.uad_radius == pytest.approx(0.3)
    assert ledger.L_G == 0.0


def test_default_thresholds():
    ledger = compute_thresholds(_unit_ledger(theta1=None, theta2=None), DataNorms())
    assert ledger.theta1 == pytest.approx(0.75)
    assert ledger.theta2 == 0.5


@pytest.mark.parametrize("overrides", [{"theta1": 0.4}, {"theta1": 1.0}, {"theta2": 1.0}, {"theta2": 0.0}])
def test_threshold_range(overrides):
    with pytest.raises(ThresholdRangeError):
        compute_thresholds(_unit_ledger(**overrides), DataNorms())


def test_non_positive_constant_rejected():
    with pytest.raises(ValueError, match="C_E"):
        compute_thresholds(_unit_ledger(C_E=0.0), DataNorms())


def test_ledger_dict_round_trip():
    ledger = compute_thresholds(_unit_ledger(), DataNorms(gamma_d_l2=0.1))
    payload = ledger.to_dict()
    assert payload["q"] == pytest.approx(4.0 / 3.0)
    assert ConstantsLedger.from_dict(payload) == ledger


# ---------------------------------------------------------------------------
# Base constant estimates
# ---------------------------------------------------------------------------

def test_CA_parts_on_default_box():
    parts = analytic_CA_parts()
    assert parts.A_part == pytest.approx(4.0)
    assert parts.DA_part == pytest.approx(8.0)
    assert parts.D2A_part == pytest.approx(20.0)
    assert analytic_CA() == pytest.approx(20.0)
    assert analytic_CA("sum") == pytest.approx(32.0)


def test_CA_argument_errors():
    with pytest.raises(ValueError, match="combine"):
        analytic_CA("mean")
    with pytest.raises(ValueError, match="gamma_bound"):
        analytic_CA_parts(gamma_bound=1.0)


def test_default_alpha():
    assert default_alpha(2.0) == 1.0
    with pytest.raises(ValueError):
        default_alpha(0.0)


def test_beta_is_one_for_flat_energy_norm():
    assert estimate_beta(SquareMesh(8), 2.0) == pytest.approx(1.0, rel=1e-9)


def test_beta_grows_with_p():
    square = SquareMesh(8)
    assert estimate_beta(square, 4.0) > 0.0


def test_beta_is_at_least_mesh_value():
    square = SquareMesh(8)
    assert estimate_beta(square, 4.0) >= discrete_beta(square, 4.0)
    assert estimate_beta(SquareMesh(5), 4.0) == discrete_beta(SquareMesh(5), 4.0)
    assert estimate_beta(square, 4.0, extrapolate=False) == discrete_beta(square, 4.0)


@pytest.mark.slow
def test_beta_settles_under_refinement():
    coarse, fine = (estimate_beta(SquareMesh(n), 4.0) for n in (16, 32))
    assert abs(fine / coarse - 1.0) < 0.05


def test_CE_at_least_one():
    assert compute_CE(IntervalMesh(4), SquareMesh(8), 4.0 / 3.0) >= 1.0


# ---------------------------------------------------------------------------
# Fractional regularity
# ---------------------------------------------------------------------------

def test_recovered_slopes():
    np.testing.assert_array_equal(recovered_slopes(np.array([1.0, -1.0])), [1.0, 0.0, -1.0])


def test_gagliardo_of_tent_slope():
    assert gagliardo_seminorm_of_slopes(np.array([1.0, -1.0]), 0.5, 0.5, 2.0) == pytest.approx(2.0, rel=1e-10)


def test_gagliardo_of_constant_slope_vanishes():
    assert gagliardo_seminorm_of_slopes(np.full(6, 0.3), 1.0 / 6.0, 0.25, 4.0) == 0.0


def test_gagliardo_is_homogeneous():
    mesh = IntervalMesh(8)
    curve = BoundaryCurve.from_function(mesh, lambda x: 0.1 * np.sin(np.pi * x))
    base = gagliardo_seminorm(curve, 0.75, 4.0)
    assert base > 0.0
    assert gagliardo_seminorm(3.0 * curve, 0.75, 4.0) == pytest.approx(3.0 * base, rel=1e-12)


def test_gagliardo_argument_errors():
    with pytest.raises(ValueError, match="s must"):
        gagliardo_seminorm_of_slopes(np.ones(2), 0.5, 1.0, 2.0)
    with pytest.raises(ValueError, match="p must"):
        gagliardo_seminorm_of_slopes(np.ones(2), 0.5, 0.5, 1.0)


@pytest.mark.slow
def test_gagliardo_of_solved_interface_settles():
    values = []
    for n in (16, 32, 64):
        state = make_state(n, v=GENERIC_V)
        u = ControlProfile(state.interval, np.ones(state.interval.n_nodes))
        pair, _ = state.solve_state(u)
        values.append(gagliardo_seminorm(pair.gamma, 1.0 / state.data.q, state.data.p))
    assert all(np.isfinite(values)) and min(values) > 0.0
    for coarse, fine in zip(values, values[1:]):
        assert abs(fine / coarse - 1.0) <= 0.1


# ---------------------------------------------------------------------------
# Empirical constants
# ---------------------------------------------------------------------------

def test_ball_samples_stay_in_ball(rng):
    state = make_state(8, v=SMALL_V)
    pair = sample_ball_pair(state, 0.01, rng)
    assert pair.slope_max <= 1.0
    assert pair.gamma.values[0] == 0.0 and pair.gamma.values[-1] == 0.0


def test_state_map_contracts_for_small_lift(rng):
    state = make_state(8, v=SMALL_V)
    ledger = _state_ledger(state)
    report = measure_contraction(state, ControlProfile.zeros(state.interval), ledger, n_pairs=6, rng=rng)
    assert len(report.ratios) == 6
    assert report.bound == pytest.approx(0.5)
    assert report.contraction_ok
    assert report.range_ok
    assert report.passed


def test_interface_lipschitz_quotient_within_bound(rng):
    state = make_state(8, v=SMALL_V)
    ledger = _state_ledger(state)
    report = measure_lipschitz("G", state, ledger.uad_radius, ledger=ledger, n_pairs=4, rng=rng)
    assert len(report.quotients) == 4
    assert report.interface_bound == pytest.approx(4.0)
    assert report.interface_observed <= report.interface_bound


def test_identical_pairs_are_skipped(rng):
    state = make_state(8, v=SMALL_V)
    u = ControlProfile(state.interval, np.ones(state.interval.n_nodes))
    report = measure_lipschitz("Gprime", state, 1.0, pairs=[(u, u)], rng=rng)
    assert report.n_skipped == 1
    assert report.quotients == []
    assert report.status is CheckStatus.VACUOUS


def test_unknown_lipschitz_kind():
    with pytest.raises(ValueError, match="kind"):
        measure_lipschitz("H", make_state(4), 1.0)
