"""Model zoo registry: named constructors for every shipped groupoid model
with its canonical connection."""

import numpy as np

from .actions import (
    make_action_groupoid,
    make_se2_groupoid,
    make_so3_sphere_groupoid,
    make_translation_groupoid,
)
from .classical import (
    ClassicalCartan,
    classical_curvature,
    classical_curvature_parallel_frame,
    classical_invariants,
    classical_to_groupoid,
    nabla_omega,
    rebuild_classical,
    recover_omega,
    se2_maurer_cartan,
    se2_v_bracket,
    so3_v_bracket,
)
from .isojet import isometry_matrix, make_isometry_jet_groupoid, prolongation_jet
from .metrics import (
    euclidean_metric,
    hyperbolic_metric,
    perturbed_metric,
    sphere_metric,
)
from .pair import make_pair_groupoid

PERTURBED_BOX = np.array([[0.15, 0.95], [-0.4, 0.4]])


def _make_gauge_se2_so2(params):
    cc = se2_maurer_cartan()
    return classical_to_groupoid(cc)


def _make_perturbed(params):
    eps = float(params.get("eps", 0.4))
    return make_isometry_jet_groupoid(perturbed_metric(eps), base_box=PERTURBED_BOX)


MODELS = {
    "pair-R2": lambda params: make_pair_groupoid(np.array([[-1.0, 1.0], [-1.0, 1.0]])),
    "pair-R1": lambda params: make_pair_groupoid(np.array([[-1.0, 1.0]])),
    "translation-R2": lambda params: make_translation_groupoid(2),
    "se2-action": lambda params: make_se2_groupoid(),
    "so3-sphere": lambda params: make_so3_sphere_groupoid(),
    "gauge-se2-so2": _make_gauge_se2_so2,
    "isojet-plane": lambda params: make_isometry_jet_groupoid(euclidean_metric()),
    "isojet-sphere": lambda params: make_isometry_jet_groupoid(sphere_metric()),
    "isojet-hyperbolic": lambda params: make_isometry_jet_groupoid(hyperbolic_metric()),
    "isojet-perturbed": _make_perturbed,
}

# whether the shipped connection's induced algebroid connection is flat (and
# its horizontal field involutive)
EXPECTED_FLAT = {
    "pair-R2": True,
    "pair-R1": True,
    "translation-R2": True,
    "se2-action": True,
    "so3-sphere": True,
    "gauge-se2-so2": True,
    "isojet-plane": True,
    "isojet-sphere": True,
    "isojet-hyperbolic": True,
    "isojet-perturbed": False,
}


def make_model(name: str, params: dict | None = None):
    """Instantiate a registered model with its canonical connection."""
    if name not in MODELS:
        raise KeyError(f"unknown model {name!r}; known: {sorted(MODELS)}")
    return MODELS[name](params or {})


__all__ = [
    "MODELS", "EXPECTED_FLAT", "make_model", "make_pair_groupoid",
    "make_translation_groupoid", "make_se2_groupoid", "make_so3_sphere_groupoid",
    "make_action_groupoid", "make_isometry_jet_groupoid", "isometry_matrix",
    "prolongation_jet", "euclidean_metric", "sphere_metric", "hyperbolic_metric",
    "perturbed_metric", "ClassicalCartan", "se2_maurer_cartan",
    "classical_to_groupoid", "recover_omega", "rebuild_classical", "nabla_omega",
    "classical_curvature", "classical_curvature_parallel_frame",
    "classical_invariants", "se2_v_bracket", "so3_v_bracket", "PERTURBED_BOX",
]
