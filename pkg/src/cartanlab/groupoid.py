"""Differentiable Lie groupoid models in a single coordinate chart.

A model presents the structure maps of a Lie groupoid G over M in coordinates:
source/target/unit as ChartMaps, multiplication and inversion as callables on
chart points, plus retractions that project near-composable partners onto the
composable set (smooth, identity on composable pairs). The retractions are what
make curves through multiplication differentiable without per-model special
cases in callers.

This module also hosts the bisection-jet oracle: one-jets of explicit local
bisections obtained by numerical differentiation. Oracle multiplication extends
jets to representative bisections, composes them pointwise, and differentiates
the product; it is the ground truth against which every closed jet formula in
the library is tested.
"""

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .chartcalc import ChartMap, FD_STEP, deriv_at_zero, differentiate, jacobian_fd
from .errors import (
    CompositionError,
    FrameError,
    NotABisectionError,
    SamplingError,
    ToleranceError,
)

VERTICALITY_TOL = 1e-8
SECTION_TOL = 1e-9
DET_TOL = 1e-9


@dataclass(frozen=True)
class Arrow:
    """A groupoid element with cached source and target points."""

    coords: np.ndarray
    source: np.ndarray
    target: np.ndarray


@dataclass(frozen=True)
class AlgebroidVec:
    """An algebroid element: a vector at unit(base) tangent to the source fibre."""

    base: np.ndarray
    vec: np.ndarray


@dataclass(frozen=True)
class Jet1:
    """A one-jet of a local bisection: an arrow g together with the tangent map
    mu: T_{src(g)} M -> T_g G of a representative bisection.

    Valid jets satisfy Tsrc . mu = id and det(Ttgt . mu) != 0.
    """

    g: Arrow
    mu: np.ndarray  # (N, n)


@dataclass(frozen=True)
class GroupoidModel:
    """Coordinate-chart presentation of a Lie groupoid with oracle hooks.

    mul and inv are smooth chart expressions that agree with the groupoid
    operations on (near-)composable pairs; retract_src/retract_tgt project an
    arrow onto the set with prescribed source/target. The *_jac hooks, when
    present, supply analytic jacobians (mul_jac returns the pair of N x N
    blocks, retract jacobians return the (arrow, base-point) blocks).
    """

    name: str
    n: int
    N: int
    src: ChartMap
    tgt: ChartMap
    unit: ChartMap
    mul: Callable[[np.ndarray, np.ndarray], np.ndarray]
    inv: Callable[[np.ndarray], np.ndarray]
    retract_src: Callable[[np.ndarray, np.ndarray], np.ndarray]
    retract_tgt: Callable[[np.ndarray, np.ndarray], np.ndarray]
    domain_box: np.ndarray
    base_box: np.ndarray
    arrow_with_source: Callable[[np.ndarray, np.random.Generator], np.ndarray]
    mul_jac: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]] | None = None
    inv_jac: Callable[[np.ndarray], np.ndarray] | None = None
    retract_src_jac: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]] | None = None
    retract_tgt_jac: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]] | None = None
    extend_bisection_hook: Callable[["GroupoidModel", Jet1], Callable] | None = None
    src_fiber_chart: Callable[[np.ndarray], tuple[ChartMap, Callable]] | None = None
    extras: dict = field(default_factory=dict)

    # -- convenience -------------------------------------------------------

    def arrow(self, coords: np.ndarray) -> Arrow:
        coords = np.asarray(coords, dtype=float)
        return Arrow(coords, self.src(coords), self.tgt(coords))

    def unit_arrow(self, m: np.ndarray) -> Arrow:
        return self.arrow(self.unit(np.asarray(m, dtype=float)))

    def Tsrc(self, coords: np.ndarray) -> np.ndarray:
        return differentiate(self.src, coords)

    def Ttgt(self, coords: np.ndarray) -> np.ndarray:
        return differentiate(self.tgt, coords)

    def Tunit(self, m: np.ndarray) -> np.ndarray:
        return differentiate(self.unit, m)

    def without_jacobians(self) -> "GroupoidModel":
        """Copy of the model with every analytic-jacobian hook removed, so the
        finite-difference paths can be exercised on identical geometry."""
        return replace(
            self,
            name=self.name + "-fd",
            src=replace(self.src, jacobian=None),
            tgt=replace(self.tgt, jacobian=None),
            unit=replace(self.unit, jacobian=None),
            mul_jac=None,
            inv_jac=None,
            retract_src_jac=None,
            retract_tgt_jac=None,
        )

    @property
    def has_jacobians(self) -> bool:
        return self.mul_jac is not None

    def sample_arrow(self, rng: np.random.Generator) -> Arrow:
        box = self.domain_box
        coords = rng.uniform(box[:, 0], box[:, 1])
        return self.arrow(coords)

    def sample_composable(self, rng: np.random.Generator) -> tuple[Arrow, Arrow]:
        """Draw (g, h) with src(g) = tgt(h), i.e. the product g h is defined."""
        for _ in range(64):
            h = self.sample_arrow(rng)
            g = self.arrow(self.arrow_with_source(h.target, rng))
            if np.allclose(g.source, h.target, atol=1e-12):
                return g, h
        raise SamplingError(f"could not draw composable pairs on {self.name}")


def algebroid_vec(model: GroupoidModel, m: np.ndarray, vec: np.ndarray,
                  check: bool = True) -> AlgebroidVec:
    """Wrap a chart vector at unit(m) as an algebroid element, verifying it is
    tangent to the source fibre."""
    m = np.asarray(m, dtype=float)
    vec = np.asarray(vec, dtype=float)
    if check:
        defect = float(np.max(np.abs(model.Tsrc(model.unit(m)) @ vec)))
        if defect > SECTION_TOL:
            raise ToleranceError(
                f"vector not source-vertical at {m}: |Tsrc.v| = {defect:.3e}")
    return AlgebroidVec(m, vec)


def kernel_basis(model: GroupoidModel, m: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of ker Tsrc at unit(m), one column per
    algebroid direction (N x (N-n))."""
    A = model.Tsrc(model.unit(np.asarray(m, dtype=float)))
    _, s, vt = np.linalg.svd(A)
    rank = int(np.sum(s > 1e-10))
    basis = vt[rank:].T
    # canonical signs: largest-magnitude entry of each column positive
    for j in range(basis.shape[1]):
        i = int(np.argmax(np.abs(basis[:, j])))
        if basis[i, j] < 0:
            basis[:, j] = -basis[:, j]
    return basis


# -- tangent maps of the structure maps -------------------------------------


def _check_composable(g_src: np.ndarray, h_tgt: np.ndarray) -> None:
    if float(np.max(np.abs(g_src - h_tgt))) > 1e-8:
        raise CompositionError(
            f"arrows not composable: src {g_src} vs tgt {h_tgt}")


def left_translate(model: GroupoidModel, g: Arrow, at: Arrow, v: np.ndarray) -> np.ndarray:
    """T L_g . v at `at`: derivative of h -> g h along the retraction-corrected
    curve through `at` with velocity v (v should be target-vertical)."""
    _check_composable(g.source, at.target)
    v = np.asarray(v, dtype=float)
    _verticality_guard(model.Ttgt(at.coords), v, model.retract_tgt is not None)
    m = g.source
    if model.mul_jac is not None and model.retract_tgt_jac is not None:
        _, Dh = model.mul_jac(g.coords, at.coords)
        Dr, _ = model.retract_tgt_jac(at.coords, m)
        return Dh @ (Dr @ v)
    return deriv_at_zero(lambda t: model.mul(g.coords, model.retract_tgt(at.coords + t * v, m)))


def right_translate(model: GroupoidModel, g: Arrow, at: Arrow, v: np.ndarray) -> np.ndarray:
    """T R_g . v at `at`: derivative of g' -> g' g (v should be source-vertical)."""
    _check_composable(at.source, g.target)
    v = np.asarray(v, dtype=float)
    _verticality_guard(model.Tsrc(at.coords), v, model.retract_src is not None)
    m = g.target
    if model.mul_jac is not None and model.retract_src_jac is not None:
        Dg, _ = model.mul_jac(at.coords, g.coords)
        Dr, _ = model.retract_src_jac(at.coords, m)
        return Dg @ (Dr @ v)
    return deriv_at_zero(lambda t: model.mul(model.retract_src(at.coords + t * v, m), g.coords))


def _verticality_guard(proj: np.ndarray, v: np.ndarray, has_retraction: bool) -> None:
    # with a retraction the curve is corrected onto the fibre, so any v is fine
    if has_retraction:
        return
    defect = float(np.max(np.abs(proj @ v)))
    if defect > VERTICALITY_TOL:
        raise ToleranceError(
            f"curve direction not fibre-vertical (defect {defect:.3e}) "
            "and model supplies no retraction")


def inv_tangent(model: GroupoidModel, at: Arrow, v: np.ndarray) -> np.ndarray:
    """T I . v at `at`."""
    v = np.asarray(v, dtype=float)
    if model.inv_jac is not None:
        return model.inv_jac(at.coords) @ v
    return deriv_at_zero(lambda t: model.inv(at.coords + t * v))


def tangent_map(model: GroupoidModel, which: str, at: Arrow, v: np.ndarray,
                g: Arrow | None = None) -> np.ndarray:
    """Tangent map of a structure map at `at` applied to v.

    which is one of "L" (left multiplication by g), "R" (right multiplication
    by g), "I" (inversion), "src", "tgt". Left/right multiplication require the
    extra arrow g.
    """
    if which in ("L", "R") and g is None:
        raise ValueError("left/right translation needs the multiplying arrow g")
    if which == "L":
        return left_translate(model, g, at, v)
    if which == "R":
        return right_translate(model, g, at, v)
    if which == "I":
        return inv_tangent(model, at, v)
    if which == "src":
        return model.Tsrc(at.coords) @ np.asarray(v, dtype=float)
    if which == "tgt":
        return model.Ttgt(at.coords) @ np.asarray(v, dtype=float)
    raise ValueError(f"unknown structure map {which!r}")


# -- anchor, right-invariant extension, bracket ------------------------------


def anchor(model: GroupoidModel, X: AlgebroidVec) -> np.ndarray:
    """Anchor of an algebroid element: Ttgt applied to its vector."""
    return model.Ttgt(model.unit(X.base)) @ X.vec


def right_invariant_field(model: GroupoidModel,
                          X: Callable[[np.ndarray], np.ndarray]) -> Callable:
    """Right-invariant extension of a section X of the algebroid: the field
    X^R(g) = T R_g . X(tgt(g)) as a callable on chart points of G."""

    def field_at(coords: np.ndarray) -> np.ndarray:
        a = model.arrow(coords)
        m1 = a.target
        xval = np.asarray(X(m1), dtype=float)
        return right_translate(model, a, model.unit_arrow(m1), xval)

    return field_at


def algebroid_bracket(model: GroupoidModel,
                      X: Callable[[np.ndarray], np.ndarray],
                      Y: Callable[[np.ndarray], np.ndarray],
                      m: np.ndarray,
                      h_outer: float | None = None) -> AlgebroidVec:
    """Lie bracket of two algebroid sections at m, computed from their
    right-invariant extensions: [X, Y] = (D Y^R . X^R - D X^R . Y^R)(unit(m)).

    The outer derivative step defaults to the standard FD step when the model
    carries analytic jacobians (the fields are then noise-free) and widens
    otherwise to keep the derivative-of-derivative roundoff in check.
    """
    if h_outer is None:
        h_outer = FD_STEP if model.has_jacobians else 5e-4
    m = np.asarray(m, dtype=float)
    u = model.unit(m)
    XR = right_invariant_field(model, X)
    YR = right_invariant_field(model, Y)
    xr = XR(u)
    yr = YR(u)

    def dfield(F, direction):
        scale = float(np.max(np.abs(direction)))
        if scale == 0.0:
            return np.zeros(model.N)
        d = direction / scale
        return scale * (F(u + h_outer * d) - F(u - h_outer * d)) / (2.0 * h_outer)

    val = dfield(YR, xr) - dfield(XR, yr)
    return algebroid_vec(model, m, val, check=False)


# -- bisection-jet oracle ----------------------------------------------------


def extend_bisection(model: GroupoidModel, j: Jet1) -> Callable[[np.ndarray], np.ndarray]:
    """A representative local bisection with the given one-jet: the affine
    chart extension projected back onto the sections of the source map.

    Any representative with the correct one-jet is valid; affine is the
    cheapest and exactly differentiable, and the source retraction makes it an
    exact section of src.
    """
    if model.extend_bisection_hook is not None:
        return model.extend_bisection_hook(model, j)
    g0 = j.g.coords
    m0 = j.g.source
    mu = j.mu

    def b(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return model.retract_src(g0 + mu @ (x - m0), x)

    return b


def oracle_jet(model: GroupoidModel, b: Callable[[np.ndarray], np.ndarray],
               m: np.ndarray, h: float = FD_STEP) -> Jet1:
    """Ground-truth one-jet of an explicit local bisection at m, by central
    differences of the bisection itself.

    Raises NotABisectionError when b fails to be a section of the source map
    near m (checked to 1e-9) or when its target map is singular.
    """
    m = np.asarray(m, dtype=float)
    g = np.asarray(b(m), dtype=float)
    # section check at m and at probe points
    for probe in (m, *(m + h * e for e in np.eye(model.n)),
                  *(m - h * e for e in np.eye(model.n))):
        defect = float(np.max(np.abs(model.src(np.asarray(b(probe), dtype=float)) - probe)))
        if defect > SECTION_TOL:
            raise NotABisectionError(
                f"src(b(x)) != x near {m}: defect {defect:.3e}")
    mu = jacobian_fd(b, m, h=h)
    arrow = model.arrow(g)
    ad_tm = model.Ttgt(g) @ mu
    if abs(np.linalg.det(ad_tm)) < DET_TOL:
        raise NotABisectionError("target map of the bisection is singular")
    return Jet1(arrow, mu)


def compose_bisections(model: GroupoidModel, b1: Callable, b2: Callable) -> Callable:
    """Pointwise product of local bisections: (b1 b2)(m) = b1(tgt(b2(m))) . b2(m)."""

    def prod(m: np.ndarray) -> np.ndarray:
        h = np.asarray(b2(m), dtype=float)
        mid = model.tgt(h)
        return model.mul(np.asarray(b1(mid), dtype=float), h)

    return prod


def oracle_jet_mul(model: GroupoidModel, j1: Jet1, j2: Jet1) -> Jet1:
    """Definition-level multiplication in the jet groupoid: extend both jets to
    representative bisections, compose pointwise, and take the oracle jet of
    the product at the source of j2.

    Every closed multiplication formula in the library is tested against this.
    """
    _check_composable(j1.g.source, j2.g.target)
    b1 = extend_bisection(model, j1)
    b2 = extend_bisection(model, j2)
    return oracle_jet(model, compose_bisections(model, b1, b2), j2.g.source)


def oracle_jet_inverse(model: GroupoidModel, j: Jet1) -> Jet1:
    """Ground-truth jet inversion: invert a representative bisection.

    The representative's base transformation tgt . b is inverted by Newton
    iteration; the inverse bisection y -> inv(b((tgt . b)^-1(y))) is then
    differentiated at the target point.
    """
    b = extend_bisection(model, j)
    m_tgt = j.g.target

    def phi(x):
        return model.tgt(np.asarray(b(x), dtype=float))

    def phi_inv(y):
        x = j.g.source.copy()
        for _ in range(40):
            r = phi(x) - y
            if float(np.max(np.abs(r))) < 1e-14:
                break
            x = x - np.linalg.solve(jacobian_fd(phi, x), r)
        return x

    def b_inv(y):
        return model.inv(np.asarray(b(phi_inv(np.asarray(y, dtype=float))), dtype=float))

    return oracle_jet(model, b_inv, m_tgt)


def identity_jet(model: GroupoidModel, m: np.ndarray) -> Jet1:
    """The unit element of the jet groupoid over m: the jet of the unit bisection."""
    m = np.asarray(m, dtype=float)
    return Jet1(model.unit_arrow(m), model.Tunit(m))


def jet_distance(j1: Jet1, j2: Jet1) -> float:
    """Max-norm distance between jets: arrow coordinates and mu entries."""
    return max(float(np.max(np.abs(j1.g.coords - j2.g.coords))),
               float(np.max(np.abs(j1.mu - j2.mu))))


# -- sampling ---------------------------------------------------------------


def sample_base_point(model: GroupoidModel, rng: np.random.Generator,
                      shrink: float = 0.15) -> np.ndarray:
    """Uniform base point, drawn a little inside the base box so that finite
    differences and short flows stay in-chart."""
    box = model.base_box
    width = box[:, 1] - box[:, 0]
    return rng.uniform(box[:, 0] + shrink * width, box[:, 1] - shrink * width)


def aligned_frame(model: GroupoidModel, ref_point: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """Smooth orthonormal frame of the source-fibre kernel near ref_point.

    The reference basis at ref_point is projected onto the kernel at the
    requested point and symmetrically re-orthonormalized; this is
    deterministic, smooth wherever no degeneracy occurs, and reproduces the
    reference basis at ref_point. Repeated points hit a cache.
    """
    E_ref = kernel_basis(model, np.asarray(ref_point, dtype=float))
    r = E_ref.shape[1]
    cache: dict[bytes, np.ndarray] = {}

    def frame(m: np.ndarray) -> np.ndarray:
        m = np.asarray(m, dtype=float)
        key = m.tobytes()
        hit = cache.get(key)
        if hit is not None:
            return hit
        A = model.Tsrc(model.unit(m))
        P = np.eye(model.N) - np.linalg.pinv(A) @ A  # projector onto ker A
        E = P @ E_ref
        gram = E.T @ E
        det = float(np.linalg.det(gram))
        if det < 1e-9:
            raise FrameError(f"kernel frame degenerated at {m} (gram det {det:.2e})")
        w, U = np.linalg.eigh(gram)
        out = E @ (U @ np.diag(1.0 / np.sqrt(w)) @ U.T)
        if len(cache) > 4096:
            cache.clear()
        cache[key] = out
        return out

    frame.rank = r
    return frame


def random_section(model: GroupoidModel, rng: np.random.Generator,
                   scale: float = 0.5) -> Callable[[np.ndarray], np.ndarray]:
    """A smooth random algebroid section: kernel frame times affine coefficients."""
    ref = 0.5 * (model.base_box[:, 0] + model.base_box[:, 1])
    frame = aligned_frame(model, ref)
    c0 = rng.uniform(-scale, scale, size=frame.rank)
    c1 = rng.uniform(-scale, scale, size=(frame.rank, model.n))

    def X(m: np.ndarray) -> np.ndarray:
        m = np.asarray(m, dtype=float)
        return frame(m) @ (c0 + c1 @ m)

    return X


def check_axioms(model: GroupoidModel, rng: np.random.Generator,
                 count: int = 100) -> dict[str, float]:
    """Max deviation of the groupoid axioms over seeded random samples."""
    errs = {
        "unit_source_target": 0.0,
        "left_unit": 0.0,
        "right_unit": 0.0,
        "product_source_target": 0.0,
        "inverse": 0.0,
        "associativity": 0.0,
        "retract_identity": 0.0,
    }

    def bump(key, val):
        errs[key] = max(errs[key], float(np.max(np.abs(val))))

    for _ in range(count):
        m = sample_base_point(model, rng)
        u = model.unit(m)
        bump("unit_source_target", model.src(u) - m)
        bump("unit_source_target", model.tgt(u) - m)

        g, h = model.sample_composable(rng)
        bump("left_unit", model.mul(g.coords, model.unit(g.source)) - g.coords)
        bump("right_unit", model.mul(model.unit(g.target), g.coords) - g.coords)
        gh = model.arrow(model.mul(g.coords, h.coords))
        bump("product_source_target", gh.source - h.source)
        bump("product_source_target", gh.target - g.target)
        bump("inverse", model.mul(model.inv(g.coords), g.coords) - model.unit(g.source))
        k = model.arrow(model.arrow_with_source(g.target, rng))
        bump("associativity",
             model.mul(model.mul(k.coords, g.coords), h.coords)
             - model.mul(k.coords, model.mul(g.coords, h.coords)))
        bump("retract_identity", model.retract_src(g.coords, g.source) - g.coords)
        bump("retract_identity", model.retract_tgt(g.coords, g.target) - g.coords)
    return errs
