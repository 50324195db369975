"""Closed-form jet arithmetic against the oracle.

The jets over identity arrows form a group modelled on maps TM -> algebroid
with multiplication psi.phi = psi + phi - psi(anchor(phi .)). Embedding it with
vee and splitting arbitrary jets against a connection turns the whole jet
groupoid into a semidirect product, with every formula checkable against the
brute-force oracle.
"""

import numpy as np

from cartanlab.groupoid import jet_distance, oracle_jet_inverse, oracle_jet_mul
from cartanlab.jetalg import (
    adjoint_hom,
    aut_inv,
    aut_mul,
    jet_decompose,
    jet_invert,
    jet_mul,
    mul_kernel_right,
    random_jet,
    random_kernel_hom,
    vee,
)
from cartanlab.models import make_model

rng = np.random.default_rng(7)

print("=" * 72)
print("Kernel group arithmetic on the SE(2) action groupoid")
print("=" * 72)
model, S = make_model("se2-action")
m = np.array([0.2, -0.3])
psi = random_kernel_hom(model, m, rng)
phi = random_kernel_hom(model, m, rng)

prod = aut_mul(psi, phi)
print("multiplication is a morphism onto TM maps:",
      f"{np.max(np.abs(prod.phi_tm - psi.phi_tm @ phi.phi_tm)):.2e}")
print("inverse really inverts:",
      f"{np.max(np.abs(aut_mul(aut_inv(phi), phi).phi)):.2e}")
print("embedded product vs oracle product of the embeddings:",
      f"{jet_distance(vee(prod), oracle_jet_mul(model, vee(psi), vee(phi))):.2e}")

print()
print("=" * 72)
print("Closed formulas vs oracle on random jets")
print("=" * 72)
g, h = model.sample_composable(rng)
mu1 = random_jet(model, S.jet, g, rng)
mu2 = random_jet(model, S.jet, h, rng)

print("inversion:        ",
      f"{jet_distance(jet_invert(model, mu1), oracle_jet_inverse(model, mu1)):.2e}")
kr = mul_kernel_right(model, mu1, random_kernel_hom(model, g.source, rng))
print("kernel on the right: formula evaluates, source kept:",
      np.round(kr.g.source, 3))
print("full multiplication:",
      f"{jet_distance(jet_mul(model, mu1, mu2, S.jet), oracle_jet_mul(model, mu1, mu2)):.2e}")

garr, part = jet_decompose(model, mu1, S.jet)
print("splitting against the connection: kernel part has magnitude",
      f"{np.max(np.abs(part.phi)):.3f}")
print("horizontal jets split with zero kernel part:",
      f"{np.max(np.abs(jet_decompose(model, S.jet(g), S.jet)[1].phi)):.2e}")

print()
print("conjugating an embedded kernel element by a jet lands back in the kernel:")
phi = random_kernel_hom(model, g.source, rng)
conj = oracle_jet_mul(model, oracle_jet_mul(model, mu1, vee(phi)),
                      jet_invert(model, mu1))
print("  oracle conjugation vs the adjoint action:",
      f"{jet_distance(conj, vee(adjoint_hom(model, mu1, phi))):.2e}")
