import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import (
    fd_gradient,
    numeric,
    sympy_array3,
    sympy_dual,
    sympy_levi_civita,
    sympy_matrix,
    sympy_riemann,
)
from statgeom.expr import eval_value, parse_array, parse_expr
from statgeom.geometry import (
    ChartGeometry,
    DualConnection,
    SamplePlan,
    SingularMetricError,
    bianchi_residual,
    connection_at,
    constant_curvature_check,
    constant_curvature_fit,
    covariant_derivative_tensor11_at,
    curvature_duality_check,
    dual_connection_at,
    dual_involution_check,
    duality_residual,
    is_statistical_check,
    levi_civita_at,
    mean_metric_check,
    metric_at,
    metric_inverse_at,
    nabla_g_at,
    riemann_at,
)
from statgeom.scenarios import bundled_document, random_statistical_geometry

X4 = ("x1", "x2", "x3", "x4")
BOX4 = ((-1.0, 1.0),) * 4
EUCLID4 = [[1 if i == j else 0 for j in range(4)] for i in range(4)]
PLAN = SamplePlan(grid=2, random=12, seed=7)


def geometry(doc_id="E2"):
    d = bundled_document(doc_id)
    metric = parse_array(d["manifold"]["metric"], X4)
    gamma = parse_array(d["connection"]["gamma"], X4) if "connection" in d else None
    return ChartGeometry(X4, metric, BOX4, gamma)


def euclid():
    return ChartGeometry(X4, parse_array(EUCLID4, X4), BOX4)


def sphere():
    c = ("th", "ph")
    return ChartGeometry(c, parse_array([[1, 0], [0, "sin(th)^2"]], c), ((0.6, 2.5), (-1.0, 1.0)))


@pytest.fixture(scope="module")
def e2_symbolic():
    d = bundled_document("E2")
    g, syms = sympy_matrix(d["manifold"]["metric"], X4)
    gam, _ = sympy_array3(d["connection"]["gamma"], X4)
    return g, gam, syms


# ------------------------------------------------------------------ metric


def test_metric_at_origin_of_product_example():
    g, dg, d2g = metric_at(geometry("E1"), np.zeros(4))
    np.testing.assert_array_equal(g, np.diag([2.0, 1, 1, 1]))
    assert dg[0, 0, 0] == -1.0
    # finite-difference confirmation of d_1 g_11
    t = parse_expr("1+exp(-x1+x3)", X4)
    assert fd_gradient(lambda q: eval_value(t, q), np.zeros(4))[0] == pytest.approx(-1.0, abs=1e-9)
    assert d2g.shape == (4, 4, 4, 4)


def test_euclidean_metric_has_zero_derivatives():
    g, dg, d2g = metric_at(euclid(), np.random.default_rng(0).uniform(-1, 1, (5, 4)))
    assert not dg.any() and not d2g.any()
    np.testing.assert_array_equal(g[0], np.eye(4))


def test_metric_inverse_examples():
    np.testing.assert_array_equal(metric_inverse_at(np.diag([2.0, 1, 1, 1])), np.diag([0.5, 1, 1, 1]))
    np.testing.assert_array_equal(metric_inverse_at(np.eye(4)), np.eye(4))


@given(st.integers(0, 2**31 - 1))
def test_metric_inverse_of_random_spd(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(4, 4))
    g = a @ a.T + 0.5 * np.eye(4)
    inv = metric_inverse_at(g)
    assert np.max(np.abs(g @ inv - np.eye(4))) < 1e-12
    np.testing.assert_array_equal(inv, inv.T)


def test_singular_metric_is_a_hard_error_naming_the_point():
    with pytest.raises(SingularMetricError, match=r"at point \(0.25, -1\)"):
        metric_inverse_at(np.array([[[1.0, 0], [0, 1e-14]]]), np.array([[0.25, -1.0]]))
    geom = ChartGeometry(("x", "y"), parse_array([[1, 0], [0, "x^2"]], ("x", "y")), ((-1.0, 1.0),) * 2)
    with pytest.raises(SingularMetricError):
        geom.metric_jets(np.array([[0.0, 0.3]]))


# -------------------------------------------------------------- connections


def test_levi_civita_flat_is_zero():
    assert not levi_civita_at(euclid(), np.array([0.1, 0.2, 0.3, 0.4])).any()


def test_levi_civita_hand_value_at_origin():
    gam = levi_civita_at(geometry("E1"), np.zeros(4))
    assert gam[0, 0, 0] == pytest.approx(-0.25, abs=1e-15)


def test_levi_civita_against_symbolic_christoffel():
    d = bundled_document("E1")
    g, syms = sympy_matrix(d["manifold"]["metric"], X4)
    lc = sympy_levi_civita(g, syms)
    geom = geometry("E1")
    for p in np.random.default_rng(3).uniform(-1, 1, (4, 4)):
        np.testing.assert_allclose(levi_civita_at(geom, p), numeric(lc, syms, p), atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_levi_civita_is_torsion_free_and_metric(seed):
    geom = random_statistical_geometry(seed)
    p = np.random.default_rng(seed).uniform(-1, 1, 3)
    gam = levi_civita_at(geom, p)
    np.testing.assert_allclose(gam, np.swapaxes(gam, 1, 2), atol=1e-15)
    assert np.max(np.abs(nabla_g_at(geom, p, "levi_civita"))) < 1e-9


def test_dual_connection_spot_values_at_origin():
    star = dual_connection_at(geometry("E2"), np.zeros(4))
    assert star[0, 0, 0] == pytest.approx(-1.5, abs=1e-14)
    assert star[2, 0, 0] == pytest.approx(-2.0, abs=1e-14)
    np.testing.assert_allclose(star[:, 1, 1], [0.5, -1.0, 2.0, 1.0], atol=1e-14)


def test_dual_connection_against_symbolic_derivation(e2_symbolic):
    g, gam, syms = e2_symbolic
    star = sympy_dual(g, gam, syms)
    geom = geometry("E2")
    for p in np.random.default_rng(11).uniform(-1, 1, (5, 4)):
        np.testing.assert_allclose(dual_connection_at(geom, p), numeric(star, syms, p), atol=1e-12)


def test_primal_connection_spot_values_at_origin():
    gam = connection_at(geometry("E2"), np.zeros(4))
    assert gam[0, 0, 0] == 1.0 and gam[2, 0, 0] == 1.0


def test_levi_civita_is_self_dual():
    geom = sphere()
    pts = SamplePlan().points(geom.box)
    mj = geom.metric_jets(pts)
    lc, _ = geom.family("levi_civita").jet(pts, mj)
    star, _ = DualConnection(geom.family("levi_civita")).jet(pts, mj)
    assert np.max(np.abs(star - lc)) < 1e-12


def test_duality_identity_holds_for_derived_dual():
    geom = geometry("E2")
    pts = PLAN.points(BOX4)
    mj = geom.metric_jets(pts)
    gam, _ = geom.primal().jet(pts, mj)
    star, _ = geom.dual().jet(pts, mj)
    assert np.max(np.abs(duality_residual(gam, star, mj.g, mj.dg))) < 1e-10


def test_nabla_g_levi_civita_zero_and_primal_totally_symmetric():
    geom = geometry("E2")
    pts = SamplePlan(grid=0, random=20, seed=5).points(BOX4)
    assert np.max(np.abs(nabla_g_at(geom, pts, "levi_civita"))) < 1e-12
    c = nabla_g_at(geom, pts)
    for perm in ((0, 2, 1, 3), (0, 1, 3, 2), (0, 3, 2, 1)):
        assert np.max(np.abs(c - np.transpose(c, perm))) < 1e-9
    assert np.max(np.abs(nabla_g_at(geom, pts, "mean"))) < 1e-9


def test_statistical_check_pass_and_perturbation_negative_control():
    assert is_statistical_check(geometry("E2"), PLAN, 1e-9).passed
    assert is_statistical_check(sphere(), PLAN, 1e-9).passed
    d = bundled_document("E2")
    gamma = d["connection"]["gamma"]
    # a diagonal slot such as Gamma^1_11 only moves C_111 and keeps C symmetric;
    # Gamma^1_22 moves C_221 and C_212 but not C_122
    gamma[0][1][1] = f"({gamma[0][1][1]}) + 0.1"
    geom = ChartGeometry(X4, parse_array(d["manifold"]["metric"], X4), BOX4, parse_array(gamma, X4))
    rep = is_statistical_check(geom, PLAN, 1e-9)
    assert not rep.passed
    assert rep.components["torsion"] == 0.0
    assert rep.components["codazzi"] > 0.05


def test_dual_involution_and_mean_metric_on_example_data():
    assert dual_involution_check(geometry("E2"), PLAN).passed
    assert mean_metric_check(geometry("E2"), PLAN).passed


# ---------------------------------------------------------------- curvature


def test_flat_curvature_is_zero():
    assert not riemann_at(euclid(), np.array([0.3, 0.1, -0.2, 0.5])).any()


def test_curvature_against_finite_difference_oracle():
    geom = geometry("E2")
    p = np.zeros(4)
    h = 1e-5
    gam = connection_at(geom, p)
    dgam = np.zeros((4, 4, 4, 4))  # [l,j,k,i] = d_i Gamma^l_jk
    for i in range(4):
        e = np.zeros(4)
        e[i] = h
        dgam[..., i] = (connection_at(geom, p + e) - connection_at(geom, p - e)) / (2 * h)
    R = np.einsum("ljki->lijk", dgam) - np.einsum("likj->lijk", dgam)
    R += np.einsum("mjk,lim->lijk", gam, gam) - np.einsum("mik,ljm->lijk", gam, gam)
    assert np.max(np.abs(riemann_at(geom, p) - R)) < 1e-6


def test_curvature_against_symbolic_oracle(e2_symbolic):
    g, gam, syms = e2_symbolic
    R = sympy_riemann(gam, syms)
    geom = geometry("E2")
    p = np.array([0.3, -0.2, 0.1, 0.4])
    np.testing.assert_allclose(riemann_at(geom, p), numeric(R, syms, p), atol=1e-11)


@pytest.mark.parametrize("family", ["primal", "dual", "mean", "levi_civita"])
def test_first_bianchi_identity(family):
    geom = geometry("E2")
    r = riemann_at(geom, PLAN.points(BOX4), family)
    assert np.max(np.abs(bianchi_residual(r))) < 1e-9
    np.testing.assert_array_equal(r, -np.swapaxes(r, 2, 3))


def test_curvature_duality_pass_and_mismatched_pair_fails():
    geom = geometry("E2")
    plan = SamplePlan(grid=0, random=20, seed=1)
    assert curvature_duality_check(geom, plan, 1e-8).passed
    assert curvature_duality_check(sphere(), plan, 1e-8).passed
    assert not curvature_duality_check(geom, plan, 1e-8, pair=("primal", "primal")).passed


def test_constant_curvature_fits():
    flat = constant_curvature_fit(euclid(), PLAN)
    assert flat.c == 0.0 and flat.residual == 0.0
    fit = constant_curvature_fit(sphere(), PLAN)
    assert fit.c == pytest.approx(1.0, abs=1e-6) and fit.residual < 1e-6
    rep = constant_curvature_check(sphere(), PLAN, 1e-6, expected_c=1.0)
    assert rep.passed and rep.details["c_dual"] == pytest.approx(1.0, abs=1e-6)
    e2 = constant_curvature_fit(geometry("E2"), PLAN)
    assert e2.c is not None and np.isfinite(e2.residual)
    with pytest.raises(ValueError):
        constant_curvature_fit(ChartGeometry(("x",), parse_array([[1]], ("x",)), ((-1.0, 1.0),)), PLAN)


def test_sphere_curvature_by_finite_differences_of_christoffels():
    geom = sphere()
    p = np.array([1.1, 0.2])
    h = 1e-5
    d1 = (levi_civita_at(geom, p + [h, 0]) - levi_civita_at(geom, p - [h, 0])) / (2 * h)
    gam = levi_civita_at(geom, p)
    # R^th_{th ph ph} = d_th G^th_phph - d_ph G^th_thph + G^m_phph G^th_thm - G^m_thph G^th_phm
    r = d1[0, 1, 1] + gam[:, 1, 1] @ gam[0, 0, :] - gam[:, 0, 1] @ gam[0, 1, :]
    # for the unit sphere this equals g_phph = sin^2
    assert r == pytest.approx(np.sin(1.1) ** 2, abs=1e-6)
    assert riemann_at(geom, p)[0, 0, 1, 1] == pytest.approx(np.sin(1.1) ** 2, abs=1e-12)


# ---------------------------------------------------------- (1,1)-tensors


def test_covariant_derivative_of_structure():
    F = parse_array(bundled_document("E1")["structure"]["F"], X4)
    assert not covariant_derivative_tensor11_at(euclid(), np.zeros(4), F).any()
    pts = PLAN.points(BOX4)
    assert np.max(np.abs(covariant_derivative_tensor11_at(geometry("E2"), pts, F))) < 1e-9
    Fs = parse_array(bundled_document("E1")["structure"]["expected_F_star"], X4)
    assert np.max(np.abs(covariant_derivative_tensor11_at(geometry("E2"), pts, Fs, "dual"))) < 1e-9


# ------------------------------------------------------------- properties


@given(st.integers(0, 10_000))
def test_random_statistical_geometries_are_statistical_and_dual_involutive(seed):
    geom = random_statistical_geometry(seed)
    plan = SamplePlan(grid=1, random=4, seed=seed)
    assert dual_involution_check(geom, plan, 1e-10).passed
    assert is_statistical_check(geom, plan, 1e-9).passed
    assert mean_metric_check(geom, plan, 1e-9).passed
    assert curvature_duality_check(geom, plan, 1e-8).passed


@given(st.integers(0, 10_000), st.integers(1, 4), st.integers(0, 5))
def test_sample_plan_is_deterministic_and_inside_box(seed, grid, random):
    plan = SamplePlan(grid=grid, random=random, seed=seed)
    box = np.array([[-1.0, 2.0], [0.5, 0.7], [-3.0, -2.0]])
    a, b = plan.points(box), plan.points(box)
    np.testing.assert_array_equal(a, b)
    assert a.shape == (grid**3 + random, 3)
    assert np.all(a >= box[:, 0]) and np.all(a <= box[:, 1])


def test_empty_sample_plan_rejected():
    with pytest.raises(ValueError):
        SamplePlan(grid=0, random=0)
