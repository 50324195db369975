import numpy as np
import pytest
from pytest import raises

from cartanlab.connection import (
    CartanConnection,
    algebroid_transport,
    check_multiplicative,
    check_unital,
    infinitesimalize,
    infinitesimalize_along,
    parallel_transport,
)
from cartanlab.errors import EscapeError
from cartanlab.groupoid import (
    algebroid_vec,
    aligned_frame,
    random_section,
    sample_base_point,
)

from conftest import CORE_MODELS


def test_multiplicativity_canonical_translation(zoo):
    model, S = zoo("translation-R2")
    rep = check_multiplicative(S, seed=3, count=40)
    assert rep.max_error <= 1e-9
    assert S.multiplicative_verified


@pytest.mark.parametrize("name", CORE_MODELS)
def test_multiplicativity_all_shipped(zoo, name, rng):
    model, S = zoo(name)
    rep = check_multiplicative(S, seed=5, count=30)
    assert rep.max_error <= 1e-7
    assert check_unital(S, rng) <= 1e-9


def test_multiplicativity_detects_kernel_fault(zoo):
    # deliberately perturb the horizontal jets by a nonzero kernel section;
    # measured deviation on this fault is ~1.4e-1
    model, S = zoo("translation-R2")
    frame = aligned_frame(model, np.zeros(2))

    def perturbed(g):
        K = frame(model.src(g))
        C = 0.05 * np.array([[1.0 + g[2], 0.5 * g[3]], [0.2, 1.0 - g[2]]])
        return S.mu_at(g) + K @ C

    bad = CartanConnection(model, perturbed, name="faulted")
    rep = check_multiplicative(bad, seed=3, count=30)
    assert rep.max_error > 1e-3
    assert not bad.multiplicative_verified


def test_pair_chart_parallelism_multiplicative(zoo):
    model, S = zoo("pair-R2")
    rep = check_multiplicative(S, seed=11, count=40)
    assert rep.max_error <= 1e-8


def test_transport_identity_and_constant_path(zoo, rng):
    model, S = zoo("se2-action")
    m = np.array([0.2, -0.1])
    g = model.arrow(model.arrow_with_source(m, rng))
    same = parallel_transport(S, lambda t: m, 0.0, 1.0, g)
    assert np.max(np.abs(same.coords - g.coords)) < 1e-12
    same2 = parallel_transport(S, lambda t: m + t * np.array([0.3, 0.1]), 0.0, 0.0, g)
    assert np.max(np.abs(same2.coords - g.coords)) < 1e-12


def test_transport_fixes_units(zoo):
    model, S = zoo("se2-action")
    gamma = lambda t: np.array([0.1, -0.2]) + t * np.array([0.4, 0.3])
    g0 = model.unit_arrow(gamma(0.0))
    out = parallel_transport(S, gamma, 0.0, 1.0, g0)
    assert np.max(np.abs(out.coords - model.unit(gamma(1.0)))) < 1e-8


def test_transport_cocycle(zoo, rng):
    model, S = zoo("isojet-sphere")
    m = np.array([0.05, -0.1])
    gamma = lambda t: m + t * np.array([0.3, 0.2]) + t * t * np.array([-0.1, 0.15])
    g = model.arrow(np.array([m[0], m[1], 0.2, -0.15, 0.3]))
    ab = parallel_transport(S, gamma, 0.0, 0.7, g)
    bc = parallel_transport(S, gamma, 0.7, 1.0, ab)
    ac = parallel_transport(S, gamma, 0.0, 1.0, g)
    assert np.max(np.abs(bc.coords - ac.coords)) < 1e-8


def test_transport_translation_closed_form(zoo, rng):
    # horizontal leaves of the constant-bisection connection keep the group
    # coordinate fixed and slide the base point along the path
    model, S = zoo("translation-R2")
    m = np.array([0.3, 0.1])
    gamma = lambda t: m + t * np.array([-0.5, 0.4])
    g = model.arrow(model.arrow_with_source(m, rng))
    out = parallel_transport(S, gamma, 0.0, 1.0, g)
    expected = np.concatenate([g.coords[:2], gamma(1.0)])
    assert np.max(np.abs(out.coords - expected)) < 1e-10


def test_transport_escape(zoo, rng):
    model, S = zoo("translation-R2")
    m = np.array([0.5, 0.0])
    g = model.arrow(model.arrow_with_source(m, rng))
    with raises(EscapeError):
        parallel_transport(S, lambda t: m + t * np.array([3.0, 0.0]), 0.0, 1.0, g)


def test_algebroid_transport_linear_on_fibres(zoo, rng):
    model, S = zoo("se2-action")
    m = np.array([0.0, 0.2])
    gamma = lambda t: m + t * np.array([0.4, -0.3])
    X = random_section(model, rng)
    Y = random_section(model, rng)
    a, b = 0.7, -1.3
    vx = algebroid_vec(model, m, X(m), check=False)
    vy = algebroid_vec(model, m, Y(m), check=False)
    vz = algebroid_vec(model, m, a * X(m) + b * Y(m), check=False)
    tx = algebroid_transport(S, gamma, 0.0, 1.0, vx)
    ty = algebroid_transport(S, gamma, 0.0, 1.0, vy)
    tz = algebroid_transport(S, gamma, 0.0, 1.0, vz)
    assert np.max(np.abs(tz.vec - a * tx.vec - b * ty.vec)) < 1e-6


@pytest.mark.parametrize("method", ["direct-formula", "flow-formula",
                                    "parallel-transport"])
def test_translation_constant_sections_are_parallel(zoo, method):
    model, S = zoo("translation-R2")
    nab = infinitesimalize(S, method)
    X = lambda m: np.array([0.4, -0.7, 0.0, 0.0])
    val = nab(np.array([0.1, 0.2]), np.array([1.0, -0.5]), X)
    assert np.max(np.abs(val.vec)) < 1e-9


def test_unknown_method_rejected(zoo):
    _, S = zoo("translation-R2")
    with raises(ValueError):
        infinitesimalize(S, "secant")


@pytest.mark.parametrize("name", ["se2-action", "so3-sphere", "isojet-sphere"])
def test_two_routes_agree(zoo, name, rng):
    model, S = zoo(name)
    nf = infinitesimalize(S, "flow-formula")
    nt = infinitesimalize(S, "parallel-transport")
    nd = infinitesimalize(S, "direct-formula")
    for _ in range(5):
        m = sample_base_point(model, rng)
        v = rng.uniform(-1, 1, size=model.n)
        X = random_section(model, rng)
        a, b, c = nd(m, v, X).vec, nf(m, v, X).vec, nt(m, v, X).vec
        assert np.max(np.abs(b - c)) < 1e-4
        assert np.max(np.abs(a - b)) < 1e-4
        assert np.max(np.abs(a - c)) < 1e-4


def test_routes_agree_on_finite_difference_path(zoo, rng):
    # same geometry with every analytic jacobian stripped: the widened
    # derivative steps keep the two literal routes inside the 1e-4 contract
    from cartanlab.connection import CartanConnection

    model, S = zoo("se2-action")
    fd_model = model.without_jacobians()
    fd_S = CartanConnection(fd_model, S.mu_at, name=S.name)
    nf = infinitesimalize(fd_S, "flow-formula")
    nt = infinitesimalize(fd_S, "parallel-transport")
    nd = infinitesimalize(fd_S, "direct-formula")
    for _ in range(4):
        m = sample_base_point(fd_model, rng)
        v = rng.uniform(-1, 1, size=fd_model.n)
        X = random_section(fd_model, rng)
        a, b, c = nd(m, v, X).vec, nf(m, v, X).vec, nt(m, v, X).vec
        assert np.max(np.abs(b - c)) < 1e-4
        assert np.max(np.abs(a - b)) < 1e-4


@pytest.mark.parametrize("name", ["se2-action", "isojet-sphere"])
def test_leibniz_rule(zoo, name, rng):
    model, S = zoo(name)
    nd = infinitesimalize(S, "direct-formula")
    for _ in range(5):
        m = sample_base_point(model, rng)
        v = rng.uniform(-1, 1, size=model.n)
        X = random_section(model, rng)
        grad = rng.uniform(-0.5, 0.5, size=model.n)

        def fX(mm):
            return (1.0 + grad @ np.asarray(mm)) * np.asarray(X(mm))

        lhs = nd(m, v, fX).vec
        rhs = (grad @ v) * np.asarray(X(m)) + (1.0 + grad @ m) * nd(m, v, X).vec
        assert np.max(np.abs(lhs - rhs)) < 1e-6


def test_path_independence_of_transport_route(zoo, rng):
    model, S = zoo("se2-action")
    straight = infinitesimalize(S, "parallel-transport")
    bent = infinitesimalize_along(
        S, lambda m, v: (lambda t: m + t * v + t * t * np.array([0.3, -0.2])))
    for _ in range(5):
        m = sample_base_point(model, rng)
        v = rng.uniform(-1, 1, size=model.n)
        X = random_section(model, rng)
        assert np.max(np.abs(straight(m, v, X).vec - bent(m, v, X).vec)) < 1e-4


def test_integral_bisections_close_under_products_gauge(zoo, rng):
    # left-translation bisections integrate the Maurer-Cartan horizontal field;
    # their pointwise products must stay integral
    from cartanlab.groupoid import compose_bisections, oracle_jet
    from cartanlab.models.rotations import rot2

    model, S = zoo("gauge-se2-so2")

    def translation_bisection(a):
        return lambda m: np.concatenate([[a[0]], a[1:] + rot2(a[0]) @ m, m])

    def integrality_defect(b, m):
        j = oracle_jet(model, b, m)
        return float(np.max(np.abs(j.mu - S.mu_at(j.g.coords))))

    b1 = translation_bisection(np.array([0.3, 0.1, -0.2]))
    b2 = translation_bisection(np.array([-0.2, 0.05, 0.15]))
    prod = compose_bisections(model, b1, b2)
    for _ in range(6):
        m = rng.uniform(-0.3, 0.3, size=2)
        assert integrality_defect(b1, m) < 1e-8
        assert integrality_defect(b2, m) < 1e-8
        assert integrality_defect(prod, m) < 1e-6


def test_integral_bisections_close_under_products_sphere(zoo, rng):
    # first-order extensions of actual sphere rotations integrate the
    # prolongation field, and so do their products
    from cartanlab.groupoid import compose_bisections, oracle_jet
    from cartanlab.models.actions import stereo, stereo_jac, unstereo, unstereo_jac
    from cartanlab.models.rotations import exp_so3

    model, S = zoo("isojet-sphere")
    metric = model.extras["metric"]

    def isometry_extension(w):
        R = exp_so3(w)

        def b(m):
            m = np.asarray(m, dtype=float)
            u = unstereo(m)
            mp = stereo(R @ u)
            A = stereo_jac(R @ u) @ R @ unstereo_jac(m)
            lam_ratio = np.sqrt(metric(mp)[0, 0] / metric(m)[0, 0])
            Rth = A * lam_ratio
            theta = np.arctan2(Rth[1, 0], Rth[0, 0])
            return np.concatenate([m, mp, [theta]])

        return b

    def integrality_defect(b, m):
        j = oracle_jet(model, b, m)
        return float(np.max(np.abs(j.mu - S.mu_at(j.g.coords))))

    b1 = isometry_extension(np.array([0.2, -0.1, 0.3]))
    b2 = isometry_extension(np.array([-0.15, 0.25, 0.1]))
    prod = compose_bisections(model, b1, b2)
    for _ in range(4):
        m = rng.uniform(-0.3, 0.3, size=2)
        assert integrality_defect(b1, m) < 1e-6
        assert integrality_defect(b2, m) < 1e-6
        assert integrality_defect(prod, m) < 1e-6


def test_additivity_in_direction(zoo, rng):
    model, S = zoo("se2-action")
    nd = infinitesimalize(S, "direct-formula")
    m = sample_base_point(model, rng)
    X = random_section(model, rng)
    v = rng.uniform(-1, 1, size=2)
    w = rng.uniform(-1, 1, size=2)
    lhs = nd(m, v + w, X).vec
    rhs = nd(m, v, X).vec + nd(m, w, X).vec
    assert np.max(np.abs(lhs - rhs)) < 1e-8
