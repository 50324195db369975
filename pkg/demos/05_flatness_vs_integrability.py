"""The flatness <-> integrability experiment.

Curvature of the induced algebroid connection on one side, Frobenius torsion
of the horizontal plane field on the other: the verdicts must agree. Constant
curvature surfaces (plane, sphere, hyperbolic) come out flat and involutive;
breaking the symmetry of the metric breaks both at once.
"""

from cartanlab.curvature import flatness_experiment
from cartanlab.models import make_model

print("=" * 72)
print(f"{'model':20s} {'max |R|':>10s} {'max |tau|':>10s}   verdict")
print("=" * 72)
for name in ("pair-R2", "translation-R2", "se2-action", "so3-sphere",
              "gauge-se2-so2", "isojet-plane", "isojet-sphere",
              "isojet-hyperbolic", "isojet-perturbed"):
    _, S = make_model(name)
    rep = flatness_experiment(S, seed=9, count=10)
    verdict = ("flat, involutive" if rep.flat and rep.involutive
               else "non-flat, non-involutive" if not rep.flat and not rep.involutive
               else "DISAGREE")
    print(f"{name:20s} {rep.max_curvature:10.2e} {rep.max_torsion:10.2e}   {verdict}")

print()
print("the two obstructions land on the same side of the tolerance for every")
print("model: integral horizontal leaves exist exactly when the induced")
print("connection is flat")

print()
print("per-sample norms on the perturbed metric (curvature varies in space):")
_, S = make_model("isojet-perturbed")
rep = flatness_experiment(S, seed=9, count=10)
for rn, tn in zip(rep.curvature_norms, rep.torsion_norms):
    print(f"  |R| {rn:9.3e}   |tau| {tn:9.3e}")
