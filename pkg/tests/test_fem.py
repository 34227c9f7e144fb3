import numpy as np
import pytest
import scipy.sparse as sp

from fbpopt.fem import (
    BoundaryCondition,
    BoundaryCurve,
    BulkField,
    BulkOperator,
    ControlProfile,
    IntervalMesh,
    ReducedSolver,
    SparseSystem,
    SquareMesh,
    assemble_B_Gamma,
    assemble_B_Omega,
    assemble_mass_1d,
    compute_norm,
    extend,
    flat_stiffness,
    interval_quadrature,
    load_1d,
    solve,
)
from fbpopt.fem.extension import check_nested


def _bump(mesh, scale=0.2):
    return BoundaryCurve.from_function(mesh, lambda x: scale * np.sin(np.pi * x))


# ---------------------------------------------------------------------------
# Meshes and fields
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("mesh_cls", [IntervalMesh, SquareMesh])
def test_mesh_rejects_single_element(mesh_cls):
    with pytest.raises(ValueError):
        mesh_cls(1)


def test_square_boundary_tags():
    square = SquareMesh(4)
    assert square.gamma_nodes.size == 5
    assert square.sigma_nodes.size == 13
    assert square.interior_nodes.size == 9
    # top corners carry both tags
    assert set(square.gamma_nodes) & set(square.sigma_nodes) == {20, 24}


def test_nested_meshes():
    assert check_nested(IntervalMesh(4), SquareMesh(8)) == 2
    with pytest.raises(ValueError, match="multiple"):
        check_nested(IntervalMesh(4), SquareMesh(6))


def test_boundary_curve_endpoints_must_vanish():
    with pytest.raises(ValueError, match="endpoint"):
        BoundaryCurve(IntervalMesh(2), np.array([0.1, 0.2, 0.0]))


def test_bulk_field_pinned_nodes_must_vanish():
    square = SquareMesh(2)
    with pytest.raises(ValueError):
        BulkField(square, np.ones(square.n_nodes), BoundaryCondition.ZERO_ON_SIGMA)


def test_field_arithmetic_checks_mesh():
    a = ControlProfile.zeros(IntervalMesh(2))
    b = ControlProfile.zeros(IntervalMesh(4))
    with pytest.raises(ValueError):
        a + b
    c = 2.0 * ControlProfile(IntervalMesh(2), np.array([1.0, 2.0, 3.0])) - a
    np.testing.assert_array_equal(c.values, [2.0, 4.0, 6.0])


# ---------------------------------------------------------------------------
# Interval forms
# ---------------------------------------------------------------------------

def test_mass_matrix_integrates_constants():
    mesh = IntervalMesh(8)
    assert assemble_mass_1d(mesh).sum() == pytest.approx(1.0, abs=1e-14)


def test_B_Gamma_rejects_non_positive_kappa():
    with pytest.raises(ValueError):
        assemble_B_Gamma(IntervalMesh(4), 0.0)


def test_B_Gamma_solve_is_nodally_exact():
    mesh = IntervalMesh(8)
    quad = interval_quadrature(mesh)
    load = load_1d(mesh, np.ones_like(quad.x))
    gamma = ReducedSolver(assemble_B_Gamma(mesh, 1.0), mesh.endpoints).solve(load)
    x = mesh.nodes
    np.testing.assert_allclose(gamma, 0.5 * x * (1.0 - x), atol=1e-12)


# ---------------------------------------------------------------------------
# Extension
# ---------------------------------------------------------------------------

def test_extension_trace_and_sigma():
    interval, square = IntervalMesh(4), SquareMesh(8)
    zeta = _bump(interval)
    ext = extend(zeta, square)
    assert ext.bc is BoundaryCondition.ZERO_ON_SIGMA
    assert np.all(ext.values[square.sigma_nodes] == 0.0)
    columns = np.linspace(0.0, 1.0, square.n + 1)
    np.testing.assert_allclose(ext.trace_on_gamma(), zeta.evaluate(columns), atol=1e-14)


def test_extension_is_linear_in_x2():
    interval = IntervalMesh(4)
    square = SquareMesh(4)
    zeta = _bump(interval)
    ext = extend(zeta, square)
    np.testing.assert_allclose(ext.values, zeta.evaluate(square.x1) * square.x2, atol=1e-14)


# ---------------------------------------------------------------------------
# Bulk forms
# ---------------------------------------------------------------------------

def test_flat_stiffness_annihilates_constants():
    square = SquareMesh(4)
    np.testing.assert_allclose(flat_stiffness(square) @ np.ones(square.n_nodes), 0.0, atol=1e-13)


def test_bulk_operator_flat_curve_is_laplacian():
    interval, square = IntervalMesh(4), SquareMesh(8)
    op = BulkOperator(BoundaryCurve.zeros(interval), square)
    diff = (op.stiffness - flat_stiffness(square)).toarray()
    assert np.max(np.abs(diff)) <= 1e-14


def test_B_Omega_is_symmetric():
    interval, square = IntervalMesh(4), SquareMesh(8)
    k = assemble_B_Omega(square, _bump(interval)).toarray()
    np.testing.assert_array_equal(k, k.T)


def test_dirichlet_solve_reproduces_linear_data():
    interval, square = IntervalMesh(4), SquareMesh(8)
    op = BulkOperator(BoundaryCurve.zeros(interval), square)
    y = op.solve_dirichlet(np.zeros(square.n_nodes), boundary_values=square.x1)
    np.testing.assert_allclose(y, square.x1, atol=1e-12)


def test_cg_matches_direct(rng):
    interval, square = IntervalMesh(4), SquareMesh(8)
    curve = _bump(interval)
    load = rng.standard_normal(square.n_nodes)
    direct = BulkOperator(curve, square, "direct").solve_dirichlet(load)
    cg = BulkOperator(curve, square, "cg").solve_dirichlet(load)
    np.testing.assert_allclose(cg, direct, atol=1e-10)


def test_unknown_linear_solver_raises():
    with pytest.raises(ValueError):
        ReducedSolver(sp.identity(3), np.array([0]), method="gmres")


def test_sparse_system_solve():
    matrix = sp.csr_matrix(np.array([[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]]))
    system = SparseSystem(matrix, np.array([0.0, 2.0, 0.0]), np.array([0, 2]), np.array([1.0, 1.0]))
    np.testing.assert_allclose(solve(system), [1.0, 2.0, 1.0])


def test_coupling_matrix_matches_action(rng):
    interval, square = IntervalMesh(4), SquareMesh(8)
    op = BulkOperator(_bump(interval), square)
    w = rng.standard_normal(square.n_nodes)
    h = rng.standard_normal(interval.n_nodes)
    np.testing.assert_allclose(op.coupling_matrix(w) @ h, op.da_apply(w, h), atol=1e-12)


def test_da_apply_matches_stiffness_difference(rng):
    interval, square = IntervalMesh(4), SquareMesh(8)
    curve = _bump(interval)
    op = BulkOperator(curve, square)
    w = rng.standard_normal(square.n_nodes)
    h = _bump(interval, 1.0).values
    eps = 1e-5
    plus = assemble_B_Omega(square, BoundaryCurve(interval, curve.values + eps * h)) @ w
    minus = assemble_B_Omega(square, BoundaryCurve(interval, curve.values - eps * h)) @ w
    exact = op.da_apply(w, h)
    np.testing.assert_allclose((plus - minus) / (2 * eps), exact, atol=1e-6 * np.max(np.abs(exact)))


def test_d2a_apply_matches_first_derivative_difference(rng):
    interval, square = IntervalMesh(4), SquareMesh(8)
    curve = _bump(interval)
    w = rng.standard_normal(square.n_nodes)
    h1 = _bump(interval, 1.0).values
    h2 = BoundaryCurve.from_function(interval, lambda x: x * (1.0 - x)).values
    eps = 1e-5
    plus = BulkOperator(BoundaryCurve(interval, curve.values + eps * h2), square).da_apply(w, h1)
    minus = BulkOperator(BoundaryCurve(interval, curve.values - eps * h2), square).da_apply(w, h1)
    exact = BulkOperator(curve, square).d2a_apply(w, h1, h2)
    np.testing.assert_allclose((plus - minus) / (2 * eps), exact, atol=1e-6 * np.max(np.abs(exact)))


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------

def test_interval_norms():
    mesh = IntervalMesh(2)
    hat = BoundaryCurve(mesh, np.array([0.0, 0.5, 0.0]))
    assert compute_norm("W1inf0", hat) == pytest.approx(1.0)
    assert compute_norm("W1p0", hat, p=4) == pytest.approx(1.0)
    assert compute_norm("L2", ControlProfile(mesh, np.ones(3))) == pytest.approx(1.0)
    assert compute_norm("Linf", hat) == 0.5


def test_bulk_w1p0_matches_stiffness_form(rng):
    square = SquareMesh(4)
    values = rng.standard_normal(square.n_nodes)
    values[square.boundary_nodes] = 0.0
    field = BulkField(square, values, BoundaryCondition.ZERO_ON_BOUNDARY)
    expected = np.sqrt(values @ (flat_stiffness(square) @ values))
    assert compute_norm("W1p0", field, p=2) == pytest.approx(expected, rel=1e-12)


def test_norm_argument_errors():
    hat = BoundaryCurve(IntervalMesh(2), np.array([0.0, 0.5, 0.0]))
    with pytest.raises(ValueError, match="Unknown norm"):
        compute_norm("H1", hat)
    with pytest.raises(ValueError, match="exponent"):
        compute_norm("W1p0", hat)
