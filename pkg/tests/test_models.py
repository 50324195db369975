import numpy as np
import pytest
from pytest import raises

from cartanlab.chartcalc import jacobian_fd
from cartanlab.errors import MetricError
from cartanlab.groupoid import jet_distance, oracle_jet, oracle_jet_mul
from cartanlab.jetalg import random_jet
from cartanlab.models import make_model
from cartanlab.models.isojet import chol2, dchol2, isometry_matrix, prolongation_jet
from cartanlab.models.metrics import (
    euclidean_metric,
    hyperbolic_metric,
    perturbed_metric,
    sphere_metric,
)
from cartanlab.models.rotations import (
    compose_so3,
    compose_so3_jac,
    exp_so3,
    hat,
    jl,
    jl_inv,
    jr,
    jr_inv,
    log_so3,
)

from conftest import CORE_MODELS


def test_unknown_model_rejected():
    with raises(KeyError):
        make_model("moebius")


@pytest.mark.parametrize("name", CORE_MODELS + ["isojet-hyperbolic"])
def test_structure_map_jacobians_match_fd(zoo, name, rng):
    model, _ = zoo(name)
    for _ in range(4):
        g, h = model.sample_composable(rng)
        Dg, Dh = model.mul_jac(g.coords, h.coords)
        assert np.max(np.abs(Dg - jacobian_fd(lambda x: model.mul(x, h.coords),
                                              g.coords))) < 1e-9
        assert np.max(np.abs(Dh - jacobian_fd(lambda x: model.mul(g.coords, x),
                                              h.coords))) < 1e-9
        assert np.max(np.abs(model.inv_jac(g.coords)
                             - jacobian_fd(model.inv, g.coords))) < 1e-9
        J = model.tgt.jacobian(g.coords)
        assert np.max(np.abs(J - jacobian_fd(model.tgt.eval, g.coords))) < 1e-9
        Dr, Dm = model.retract_tgt_jac(g.coords, g.target)
        assert np.max(np.abs(Dr - jacobian_fd(
            lambda x: model.retract_tgt(x, g.target), g.coords))) < 1e-9
        assert np.max(np.abs(Dm - jacobian_fd(
            lambda x: model.retract_tgt(g.coords, x), g.target))) < 1e-9


@pytest.mark.parametrize("name", CORE_MODELS)
def test_fd_model_agrees_with_analytic(zoo, name, rng):
    # the stripped model runs every tangent map through central differences;
    # oracle jets must land on the same values
    model, S = zoo(name)
    fd_model = model.without_jacobians()
    assert not fd_model.has_jacobians
    for _ in range(3):
        g, h = model.sample_composable(rng)
        j1 = random_jet(model, S.jet, g, rng)
        j2 = random_jet(model, S.jet, h, rng)
        p_analytic = oracle_jet_mul(model, j1, j2)
        p_fd = oracle_jet_mul(fd_model, j1, j2)
        assert jet_distance(p_analytic, p_fd) < 1e-8


def test_rotation_vector_roundtrip(rng):
    for _ in range(20):
        w = rng.uniform(-0.9, 0.9, size=3)
        R = exp_so3(w)
        assert np.max(np.abs(R @ R.T - np.eye(3))) < 1e-12
        assert abs(np.linalg.det(R) - 1.0) < 1e-12
        assert np.max(np.abs(log_so3(R) - w)) < 1e-10
    # small-angle branch
    w = np.array([1e-8, -2e-8, 5e-9])
    assert np.max(np.abs(log_so3(exp_so3(w)) - w)) < 1e-14


def test_rotation_jacobian_identities(rng):
    # d/dt exp((w + t d)^) = (J_l(w) d)^ exp(w^)
    for _ in range(10):
        w = rng.uniform(-0.8, 0.8, size=3)
        d = rng.uniform(-1, 1, size=3)
        h = 1e-6
        lhs = (exp_so3(w + h * d) - exp_so3(w - h * d)) / (2 * h)
        rhs = hat(jl(w) @ d) @ exp_so3(w)
        assert np.max(np.abs(lhs - rhs)) < 1e-8
        assert np.max(np.abs(jl(w) @ jl_inv(w) - np.eye(3))) < 1e-12
        assert np.max(np.abs(jr(w) @ jr_inv(w) - np.eye(3))) < 1e-12


def test_compose_so3_jacobians(rng):
    for _ in range(10):
        w2 = rng.uniform(-0.5, 0.5, size=3)
        w1 = rng.uniform(-0.5, 0.5, size=3)
        D2, D1 = compose_so3_jac(w2, w1)
        D2_fd = jacobian_fd(lambda x: compose_so3(x, w1), w2)
        D1_fd = jacobian_fd(lambda x: compose_so3(w2, x), w1)
        assert np.max(np.abs(D2 - D2_fd)) < 1e-8
        assert np.max(np.abs(D1 - D1_fd)) < 1e-8


@pytest.mark.parametrize("metric", [euclidean_metric(), sphere_metric(),
                                    hyperbolic_metric(), perturbed_metric(0.4)])
def test_metric_positive_and_partials(metric, rng):
    for _ in range(10):
        x = rng.uniform(-0.6, 0.6, size=2)
        G = metric(x)
        assert np.min(np.linalg.eigvalsh(G)) > 0.0
        dG = metric.dg(x)
        h = 1e-6
        for l in range(2):
            e = np.zeros(2)
            e[l] = h
            fd = (metric(x + e) - metric(x - e)) / (2 * h)
            assert np.max(np.abs(dG[:, :, l] - fd)) < 1e-8


def test_cholesky_derivative(rng):
    for _ in range(10):
        B = rng.uniform(-1, 1, size=(2, 2))
        G = B @ B.T + 2.0 * np.eye(2)
        dG = rng.uniform(-1, 1, size=(2, 2))
        dG = dG + dG.T
        L = chol2(G)
        assert np.max(np.abs(L @ L.T - G)) < 1e-12
        h = 1e-7
        fd = (chol2(G + h * dG) - chol2(G - h * dG)) / (2 * h)
        assert np.max(np.abs(dchol2(L, dG) - fd)) < 1e-6


def test_chol2_rejects_indefinite():
    with raises(MetricError):
        chol2(np.array([[1.0, 2.0], [2.0, 1.0]]))


@pytest.mark.parametrize("metric", [sphere_metric(), hyperbolic_metric(),
                                    perturbed_metric(0.4)])
def test_isometry_matrix_preserves_metric(metric, rng):
    for _ in range(10):
        m = rng.uniform(-0.5, 0.5, size=2)
        mp = rng.uniform(-0.5, 0.5, size=2)
        th = rng.uniform(-0.7, 0.7)
        A = isometry_matrix(metric, m, mp, th)
        defect = A.T @ metric(mp) @ A - metric(m)
        assert np.max(np.abs(defect)) < 1e-12
        assert np.linalg.det(A) > 0.0


@pytest.mark.parametrize("name", ["isojet-plane", "isojet-sphere",
                                  "isojet-hyperbolic", "isojet-perturbed"])
def test_prolongation_solve_consistent(zoo, name, rng):
    model, S = zoo(name)
    metric = model.extras["metric"]
    for _ in range(10):
        g = model.sample_arrow(rng)
        mu, residual = prolongation_jet(metric, g.coords)
        assert residual < 1e-8
        assert np.max(np.abs(model.Tsrc(g.coords) @ mu - np.eye(2))) < 1e-12


def test_prolongation_euclidean_is_rigid_motion_extension(zoo, rng):
    # flat metric: horizontal jets extend arrows to rigid-motion one-jet fields
    # (constant isometry part, no rotation drift)
    model, S = zoo("isojet-plane")
    for _ in range(5):
        g = model.sample_arrow(rng)
        mu = S.mu_at(g.coords)
        from cartanlab.models.rotations import rot2

        assert np.max(np.abs(mu[2:4, :] - rot2(g.coords[4]))) < 1e-12
        assert np.max(np.abs(mu[4, :])) < 1e-12


def test_isojet_oracle_jets_metric_compatible_first_order(zoo, rng):
    from cartanlab.groupoid import extend_bisection

    model, S = zoo("isojet-sphere")
    metric = model.extras["metric"]
    for _ in range(6):
        g = model.sample_arrow(rng)
        j = oracle_jet(model, extend_bisection(model, S.jet(g)), g.source)
        Tphi = model.Ttgt(j.g.coords) @ j.mu
        defect = Tphi.T @ metric(j.g.target) @ Tphi - metric(j.g.source)
        assert np.max(np.abs(defect)) < 1e-7
