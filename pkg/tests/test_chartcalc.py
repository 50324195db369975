import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pytest import raises

from cartanlab.chartcalc import (
    ChartMap,
    FD_STEP,
    MetricChart,
    christoffel,
    differentiate,
    flow,
    jacobian_fd,
)
from cartanlab.errors import DomainError, NonFiniteError, SingularMetricError
from cartanlab.groupoid import right_invariant_field
from cartanlab.models.actions import se2_group
from cartanlab.models.metrics import euclidean_metric, sphere_metric
from cartanlab.models.pair import make_pair_groupoid


def test_differentiate_identity():
    f = ChartMap(3, 3, lambda x: x)
    x = np.array([0.3, -0.7, 1.2])
    assert np.allclose(differentiate(f, x), np.eye(3), atol=1e-9)


def test_differentiate_product_sum():
    f = ChartMap(2, 2, lambda x: np.array([x[0] * x[1], x[0] + x[1]]))
    J = differentiate(f, np.array([2.0, 3.0]))
    assert np.allclose(J, [[3.0, 2.0], [1.0, 1.0]], atol=1e-9)


def test_differentiate_composed_multiplication_vs_richardson():
    # composed group-multiplication map checked against a Richardson-extrapolated
    # central-difference estimate of higher order
    group = se2_group()
    rng = np.random.default_rng(0)
    a1 = rng.uniform(-0.4, 0.4, size=3)
    a2 = rng.uniform(-0.4, 0.4, size=3)
    B = rng.uniform(-0.5, 0.5, size=(3, 3))

    def eval_map(x):
        return group.compose(a2 + B @ x, group.compose(a1, np.array([x[0], x[1], -x[2]])))

    f = ChartMap(3, 3, eval_map)
    x = rng.uniform(-0.2, 0.2, size=3)
    J = differentiate(f, x)
    J_h = jacobian_fd(eval_map, x, h=FD_STEP)
    J_h2 = jacobian_fd(eval_map, x, h=FD_STEP / 2)
    J_rich = (4.0 * J_h2 - J_h) / 3.0
    assert np.max(np.abs(J - J_rich)) <= 10 * FD_STEP**2


def test_differentiate_prefers_analytic_jacobian():
    marker = np.full((2, 2), 7.0)
    f = ChartMap(2, 2, lambda x: x, jacobian=lambda x: marker)
    assert np.array_equal(differentiate(f, np.zeros(2)), marker)


def test_differentiate_domain_and_nonfinite_errors():
    box = np.array([[-1.0, 1.0], [-1.0, 1.0]])
    f = ChartMap(2, 2, lambda x: x, box=box)
    with raises(DomainError):
        differentiate(f, np.array([1.0, 0.0]))
    bad = ChartMap(1, 1, lambda x: np.array([np.nan]))
    with raises(NonFiniteError):
        differentiate(bad, np.zeros(1))


def test_composition_rule_within_contract():
    rng = np.random.default_rng(3)
    A = rng.uniform(-1, 1, size=(3, 3))

    def g_eval(x):
        return np.array([np.sin(x[0]) + x[1], x[0] * x[1], np.cos(x[1])])

    def f_eval(y):
        return A @ np.array([y[0] ** 2, y[1], y[2] * y[0]])

    f = ChartMap(3, 3, f_eval)
    g = ChartMap(2, 3, g_eval)
    comp = ChartMap(2, 3, lambda x: f_eval(g_eval(x)))
    for _ in range(10):
        x = rng.uniform(-0.8, 0.8, size=2)
        lhs = differentiate(comp, x)
        rhs = differentiate(f, g(x)) @ differentiate(g, x)
        assert np.max(np.abs(lhs - rhs)) <= 100 * FD_STEP**2


def test_flow_zero_field():
    x0 = np.array([0.4, -0.2])
    assert np.array_equal(flow(lambda x: np.zeros(2), x0, 3.0, steps=10), x0)


def test_flow_linear_ode():
    out = flow(lambda x: x, np.array([1.0]), 1.0, steps=100)
    assert abs(out[0] - np.e) < 1e-6


def test_flow_right_invariant_translation_field():
    # right-invariant extension of a constant section on the pair groupoid of R
    # integrates to the closed-form translation flow
    model, _ = make_pair_groupoid(np.array([[-2.0, 2.0]]))
    c = 0.37
    field = right_invariant_field(model, lambda m: np.array([c, 0.0]))
    g0 = np.array([0.2, -0.1])
    out = flow(field, g0, 1.5, steps=150)
    assert np.max(np.abs(out - np.array([g0[0] + 1.5 * c, g0[1]]))) < 1e-8


@settings(max_examples=20, deadline=None)
@given(t1=st.floats(-0.8, 0.8), t2=st.floats(-0.8, 0.8))
def test_flow_composition(t1, t2):
    def field(x):
        return np.array([np.sin(x[1]), np.cos(x[0])])

    x0 = np.array([0.1, 0.2])
    one = flow(field, flow(field, x0, t1, 200), t2, 200)
    both = flow(field, x0, t1 + t2, 400)
    assert np.max(np.abs(one - both)) < 1e-9


def test_flow_escape_raises():
    box = np.array([[-1.0, 1.0]])
    with raises(NonFiniteError):
        flow(lambda x: np.ones(1), np.array([0.9]), 1.0, steps=20, box=box)


def test_christoffel_euclidean_zero():
    G = christoffel(euclidean_metric(), np.array([0.3, 0.4]))
    assert np.max(np.abs(G)) == 0.0


def test_christoffel_sphere_origin_zero():
    G = christoffel(sphere_metric(), np.zeros(2))
    assert np.max(np.abs(G)) < 1e-12


def test_christoffel_sphere_against_conformal_symbols():
    # independent oracle: for g = lam * I the symbols are
    # Gamma^k_ij = d_i phi delta_jk + d_j phi delta_ik - d_k phi delta_ij
    # with phi = log(lam)/2; at (0.5, 0): d_1 phi = -0.8, d_2 phi = 0
    G = christoffel(sphere_metric(), np.array([0.5, 0.0]))
    expected = np.zeros((2, 2, 2))
    expected[0] = [[-0.8, 0.0], [0.0, 0.8]]
    expected[1] = [[0.0, -0.8], [-0.8, 0.0]]
    assert np.max(np.abs(G - expected)) < 1e-9


def test_christoffel_symmetry_and_fd_path():
    met = sphere_metric()
    met_fd = MetricChart(2, met.g, None, name="sphere-fd")
    x = np.array([0.31, -0.18])
    Ga = christoffel(met, x)
    Gf = christoffel(met_fd, x)
    assert np.max(np.abs(Ga - np.swapaxes(Ga, 1, 2))) == 0.0
    assert np.max(np.abs(Ga - Gf)) < 1e-8


def test_christoffel_singular_metric():
    degenerate = MetricChart(2, lambda x: np.zeros((2, 2)))
    with raises(SingularMetricError):
        christoffel(degenerate, np.zeros(2))
