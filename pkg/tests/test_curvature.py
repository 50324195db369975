import numpy as np
import pytest
from pytest import raises

from cartanlab.connection import infinitesimalize
from cartanlab.curvature import (
    curvature,
    flatness_experiment,
    frobenius_torsion,
    reconstruct_action,
)
from cartanlab.errors import FlatnessError
from cartanlab.groupoid import sample_base_point
from cartanlab.models import PERTURBED_BOX


@pytest.mark.parametrize("name", ["translation-R2", "pair-R2"])
def test_flat_model_curvature_vanishes(zoo, name, rng):
    model, S = zoo(name)
    nab = infinitesimalize(S, "direct-formula")
    for _ in range(4):
        R = curvature(nab, sample_base_point(model, rng))
        assert R.norm_inf <= 1e-6


def test_sphere_isojet_curvature_flat(zoo, rng):
    model, S = zoo("isojet-sphere")
    nab = infinitesimalize(S, "direct-formula")
    for _ in range(4):
        R = curvature(nab, sample_base_point(model, rng))
        assert R.norm_inf <= 1e-4


def test_perturbed_curvature_large(zoo, rng):
    # threshold locked from the recorded oracle run: observed curvature norms
    # over the shipped sampling box lie in [3.4e-1, 4.5e-1]
    model, S = zoo("isojet-perturbed")
    nab = infinitesimalize(S, "direct-formula")
    norms = [curvature(nab, sample_base_point(model, rng)).norm_inf
             for _ in range(6)]
    assert all(v > 10 * 1e-4 for v in norms)
    assert max(norms) > 1e-1


def test_curvature_antisymmetry(zoo, rng):
    model, S = zoo("isojet-sphere")
    nab = infinitesimalize(S, "direct-formula")
    R = curvature(nab, sample_base_point(model, rng)).R
    assert np.max(np.abs(R + np.transpose(R, (1, 0, 2, 3)))) <= 1e-8


def test_torsion_vanishes_at_units_for_involutive(zoo, rng):
    model, S = zoo("isojet-sphere")
    m = sample_base_point(model, rng)
    tau = frobenius_torsion(S, model.unit_arrow(m))
    assert np.max(np.abs(tau)) <= 1e-5


def test_torsion_translation_random_arrows(zoo, rng):
    model, S = zoo("translation-R2")
    for _ in range(6):
        tau = frobenius_torsion(S, model.sample_arrow(rng))
        assert np.max(np.abs(tau)) <= 1e-5


def test_torsion_perturbed_large(zoo, rng):
    model, S = zoo("isojet-perturbed")
    norms = [float(np.max(np.abs(frobenius_torsion(S, model.sample_arrow(rng)))))
             for _ in range(8)]
    above = sum(v > 10 * 1e-4 for v in norms)
    assert above >= 0.8 * len(norms)


def test_torsion_antisymmetry(zoo, rng):
    model, S = zoo("isojet-perturbed")
    tau = frobenius_torsion(S, model.sample_arrow(rng))
    assert np.max(np.abs(tau + np.transpose(tau, (1, 0, 2)))) == 0.0


@pytest.mark.parametrize("name,expect", [
    ("translation-R2", True),
    ("isojet-sphere", True),
    ("isojet-perturbed", False),
])
def test_flatness_experiment_verdicts(zoo, name, expect):
    model, S = zoo(name)
    rep = flatness_experiment(S, seed=4, count=6)
    assert rep.flat is expect
    assert rep.involutive is expect
    assert rep.agreement


def test_reconstruct_translation_abelian(zoo):
    model, S = zoo("translation-R2")
    nab = infinitesimalize(S, "direct-formula")
    res = reconstruct_action(nab, np.zeros(2), sample_count=3)
    assert res.dim_g0 == 2
    assert np.max(np.abs(res.structure_constants)) <= 1e-10
    assert res.residuals["jacobi"] <= 1e-5
    assert res.residuals["anchor_hom"] <= 1e-5
    assert res.residuals["parallelism"] <= 1e-5
    assert res.residuals["path_dependence"] <= 1e-4


def test_reconstruct_flat_plane_isojet_motion_algebra(zoo):
    # flat-plane isometry jets: three-dimensional algebra with a rank-two
    # derived algebra (the translations), Euclidean-motion type
    model, S = zoo("isojet-plane")
    nab = infinitesimalize(S, "direct-formula")
    res = reconstruct_action(nab, np.zeros(2), sample_count=3)
    assert res.dim_g0 == 3
    c = res.structure_constants
    assert np.max(np.abs(c + np.transpose(c, (1, 0, 2)))) == 0.0
    assert res.residuals["jacobi"] <= 1e-5
    assert res.residuals["anchor_hom"] <= 1e-5
    derived = np.linalg.matrix_rank(c.reshape(-1, 3), tol=1e-6)
    assert derived == 2
    killing = np.einsum("ade,bed->ab", c, c)
    eigs = np.sort(np.linalg.eigvalsh(killing))
    assert eigs[0] < -1e-3 and abs(eigs[1]) < 1e-6 and abs(eigs[2]) < 1e-6


def test_reconstruct_sphere_isojet_rotation_algebra(zoo):
    # sphere isometry jets: fully non-abelian three-dimensional algebra with
    # negative-definite Killing form
    model, S = zoo("isojet-sphere")
    nab = infinitesimalize(S, "direct-formula")
    res = reconstruct_action(nab, np.zeros(2), sample_count=3)
    assert res.dim_g0 == 3
    c = res.structure_constants
    assert res.residuals["jacobi"] <= 1e-5
    assert res.residuals["anchor_hom"] <= 1e-5
    assert res.residuals["path_dependence"] <= 1e-4
    derived = np.linalg.matrix_rank(c.reshape(-1, 3), tol=1e-6)
    assert derived == 3
    killing = np.linalg.eigvalsh(np.einsum("ade,bed->ab", c, c))
    assert np.all(killing < -1e-3)


def test_reconstruct_action_fields_match_anchor(zoo, rng):
    model, S = zoo("se2-action")
    nab = infinitesimalize(S, "direct-formula")
    res = reconstruct_action(nab, np.zeros(2), sample_count=3)
    m = rng.uniform(-0.15, 0.15, size=2)
    for a in range(res.dim_g0):
        lhs = res.action_fields[a](m)
        rhs = model.Ttgt(model.unit(m)) @ res.parallel_sections[a](m)
        assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_reconstruct_refuses_curved_connection(zoo):
    model, S = zoo("isojet-perturbed")
    nab = infinitesimalize(S, "direct-formula")
    m0 = PERTURBED_BOX.mean(axis=1)
    with raises(FlatnessError):
        reconstruct_action(nab, m0, sample_count=2)
