"""Curvature of algebroid connections, involutivity of horizontal plane fields,
the flatness/integrability experiment, and reconstruction of an action algebra
from a flat connection.

All computations run against a smooth local frame of the algebroid built from
the kernel of the source projection: the frame at nearby points is the
symmetric-orthonormalization of the kernel projection of a fixed reference
basis, which is deterministic and smooth wherever no degeneracy occurs.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .chartcalc import jacobian_fd
from .connection import AlgebroidConnection, CartanConnection, check_multiplicative
from .errors import FlatnessError
from .groupoid import (
    Arrow,
    algebroid_bracket,
    aligned_frame,
    sample_base_point,
)

CURV_FD_STEP = 1e-3  # balances d^3-coefficient truncation against nabla noise
GRID_SPACING = 0.05


# -- frames and connection coefficients ----------------------------------------


def frame_sections(frame: Callable, rank: int) -> list[Callable]:
    """The frame columns as individual algebroid sections."""
    return [lambda m, a=a: frame(m)[:, a] for a in range(rank)]


def connection_matrix(nabla: AlgebroidConnection, frame: Callable, rank: int,
                      m: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Coefficients of the covariant derivative of the frame along w:
    nabla_w e_a = sum_b Gamma[b, a] e_b at m."""
    K = frame(m)
    cols = [nabla(m, w, lambda mm, a=a: frame(mm)[:, a]).vec for a in range(rank)]
    W = np.stack(cols, axis=1)
    coeffs, *_ = np.linalg.lstsq(K, W, rcond=None)
    return coeffs


# -- curvature -----------------------------------------------------------------


@dataclass(frozen=True)
class CurvatureTensor:
    """curv(d_i, d_j) e_a = sum_b R[i, j, b, a] e_b in the local frame."""

    m: np.ndarray
    R: np.ndarray  # (n, n, r, r), antisymmetric in (i, j)
    frame_at_m: np.ndarray

    @property
    def norm_inf(self) -> float:
        return float(np.max(np.abs(self.R)))


def curvature(nabla: AlgebroidConnection, m: np.ndarray,
              frame: Callable | None = None,
              step: float = CURV_FD_STEP) -> CurvatureTensor:
    """Curvature of the connection at m in a smooth kernel frame.

    Connection coefficients Gamma_i are computed at stencil points and
    differentiated by central differences; the coordinate-field bracket term
    vanishes, leaving R_ij = d_i Gamma_j - d_j Gamma_i + [Gamma_i, Gamma_j],
    which is exactly antisymmetric by construction.
    """
    model = nabla.model
    m = np.asarray(m, dtype=float)
    if frame is None:
        frame = aligned_frame(model, m)
    r = frame.rank
    n = model.n
    eye = np.eye(n)

    def gamma(point, i):
        return connection_matrix(nabla, frame, r, point, eye[i])

    G0 = [gamma(m, i) for i in range(n)]
    dG = np.empty((n, n, r, r))  # dG[i, j] = d_i Gamma_j
    for i in range(n):
        for j in range(n):
            dG[i, j] = (gamma(m + step * eye[i], j)
                        - gamma(m - step * eye[i], j)) / (2.0 * step)
    R = np.zeros((n, n, r, r))
    for i in range(n):
        for j in range(n):
            R[i, j] = dG[i, j] - dG[j, i] + G0[i] @ G0[j] - G0[j] @ G0[i]
    return CurvatureTensor(m, R, frame(m))


# -- involutivity of the horizontal plane field ---------------------------------


def frobenius_torsion(S: CartanConnection, g: Arrow, h: float = 1e-5) -> np.ndarray:
    """Obstruction to involutivity at an arrow: Lie brackets of the horizontal
    lift fields V_i(g') = mu(g') e_i, projected modulo the horizontal plane by
    orthogonal least squares. Returns tau[i, j] in chart coordinates,
    antisymmetric in (i, j); any complement would do since only vanishing is
    asserted."""
    model = S.model
    n, N = model.n, model.N
    x = g.coords

    def V(coords):
        return np.asarray(S.mu_at(coords), dtype=float)

    mu0 = V(x)
    Q, _ = np.linalg.qr(mu0)
    P_perp = np.eye(N) - Q @ Q.T
    # DV[k] = jacobian of the k-th lift field at g
    DV = np.empty((n, N, N))
    for l in range(N):
        e = np.zeros(N)
        e[l] = h
        diff = (V(x + e) - V(x - e)) / (2.0 * h)  # (N, n)
        for k in range(n):
            DV[k][:, l] = diff[:, k]
    tau = np.zeros((n, n, N))
    for i in range(n):
        for j in range(i + 1, n):
            bracket = DV[j] @ mu0[:, i] - DV[i] @ mu0[:, j]
            val = P_perp @ bracket
            tau[i, j] = val
            tau[j, i] = -val
    return tau


# -- the flatness <-> integrability experiment ----------------------------------


@dataclass(frozen=True)
class FlatnessReport:
    model: str
    seed: int
    curvature_norms: np.ndarray
    torsion_norms: np.ndarray
    tolerance: float
    flat: bool
    involutive: bool

    @property
    def agreement(self) -> bool:
        return self.flat == self.involutive

    @property
    def max_curvature(self) -> float:
        return float(np.max(self.curvature_norms))

    @property
    def max_torsion(self) -> float:
        return float(np.max(self.torsion_norms))


def flatness_experiment(S: CartanConnection, seed: int = 0, count: int = 20,
                        tolerance: float = 1e-4) -> FlatnessReport:
    """Paired curvature/involutivity tables over seeded samples: the curvature
    of the induced algebroid connection at base points against the torsion of
    the horizontal plane field at arrows, with a joint verdict."""
    from .connection import infinitesimalize

    model = S.model
    if S.verification is None:
        check_multiplicative(S, seed=seed, count=max(10, count // 2))
    rng = np.random.default_rng(seed)
    nabla = infinitesimalize(S, "direct-formula")
    curv_norms = np.empty(count)
    tors_norms = np.empty(count)
    for idx in range(count):
        m = sample_base_point(model, rng)
        curv_norms[idx] = curvature(nabla, m).norm_inf
        g = model.sample_arrow(rng)
        tors_norms[idx] = float(np.max(np.abs(frobenius_torsion(S, g))))
    return FlatnessReport(
        model=model.name,
        seed=seed,
        curvature_norms=curv_norms,
        torsion_norms=tors_norms,
        tolerance=tolerance,
        flat=bool(np.max(curv_norms) <= tolerance),
        involutive=bool(np.max(tors_norms) <= tolerance),
    )


# -- reconstruction of the action algebra from a flat connection ----------------


@dataclass(frozen=True)
class ReconstructionResult:
    """A basis of covariantly constant sections with its bracket table.

    structure_constants[a, b, k] are the coefficients of [xi_a, xi_b] in the
    reconstructed basis (antisymmetric in (a, b) exactly); action_fields are
    the anchored vector fields on the base."""

    dim_g0: int
    structure_constants: np.ndarray
    action_fields: list
    parallel_sections: list
    residuals: dict


def _transport_matrix(nabla: AlgebroidConnection, frame: Callable, rank: int,
                      path: Callable[[float], np.ndarray], steps: int = 16) -> np.ndarray:
    """Parallel-transport matrix of the connection along a path in frame
    coordinates: solves dY/dt = -Gamma(path(t), path'(t)) Y by RK4."""
    Y = np.eye(rank)
    h = 1.0 / steps
    dt = 1e-6

    def gdot(t):
        return (np.asarray(path(t + dt), dtype=float)
                - np.asarray(path(t - dt), dtype=float)) / (2 * dt)

    def rhs(t, Y):
        return -connection_matrix(nabla, frame, rank, np.asarray(path(t), dtype=float), gdot(t)) @ Y

    t = 0.0
    for _ in range(steps):
        k1 = rhs(t, Y)
        k2 = rhs(t + 0.5 * h, Y + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, Y + 0.5 * h * k2)
        k4 = rhs(t + h, Y + h * k3)
        Y = Y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return Y


def reconstruct_action(nabla: AlgebroidConnection, m0: np.ndarray,
                       half_extent: float = 0.2, spacing: float = GRID_SPACING,
                       flatness_tol: float = 1e-4,
                       sample_count: int = 5,
                       seed: int = 0) -> ReconstructionResult:
    """Extend a basis of the algebroid fibre at m0 to covariantly constant
    sections by radial parallel transport, compute the structure constants of
    their bracket algebra, and validate the Lie-algebra axioms and the anchor
    homomorphism.

    Requires the connection to be flat on the grid: transport along two
    homotopic grid paths must agree to flatness_tol, otherwise FlatnessError
    (holonomy) is raised, and the curvature precondition is checked up front.
    """
    model = nabla.model
    m0 = np.asarray(m0, dtype=float)
    frame = aligned_frame(model, m0)
    r = frame.rank
    rng = np.random.default_rng(seed)

    # flatness precondition on a few grid points
    for probe in (m0, m0 + np.full(model.n, half_extent),
                  m0 - np.full(model.n, half_extent)):
        c = curvature(nabla, probe).norm_inf
        if c > flatness_tol:
            raise FlatnessError(
                f"curvature {c:.2e} above {flatness_tol:.1e} at {probe}; "
                "reconstruction requires a flat connection")

    # path independence: two homotopic L-shaped grid paths to the far corner
    corner = m0 + np.full(model.n, half_extent)

    def l_path(first_axis):
        def path(t):
            p = m0.copy()
            if t <= 0.5:
                p[first_axis] += (corner[first_axis] - m0[first_axis]) * 2 * t
            else:
                p[first_axis] = corner[first_axis]
                for ax in range(model.n):
                    if ax != first_axis:
                        p[ax] += (corner[ax] - m0[ax]) * (2 * t - 1)
            return p

        return path

    Y_a = _transport_matrix(nabla, frame, r, l_path(0))
    Y_b = _transport_matrix(nabla, frame, r, l_path(model.n - 1))
    path_dependence = float(np.max(np.abs(Y_a - Y_b)))
    if path_dependence > flatness_tol:
        raise FlatnessError(
            f"holonomy detected: homotopic transports differ by {path_dependence:.2e}")

    # covariantly constant sections by radial transport (smooth in the endpoint
    # because the step count is fixed); repeated evaluation points hit a cache
    transport_cache: dict[bytes, np.ndarray] = {}

    def transport_to(m):
        m = np.asarray(m, dtype=float)
        key = m.tobytes()
        hit = transport_cache.get(key)
        if hit is None:
            hit = _transport_matrix(nabla, frame, r, lambda t: m0 + t * (m - m0))
            transport_cache[key] = hit
        return hit

    def section(a):
        def xi(m):
            return frame(m) @ transport_to(m)[:, a]

        return xi

    sections = [section(a) for a in range(r)]

    def action_field(a):
        def dagger(m):
            m = np.asarray(m, dtype=float)
            return model.Ttgt(model.unit(m)) @ sections[a](m)

        return dagger

    fields = [action_field(a) for a in range(r)]

    # structure constants from the bracket at m0 (transport matrix there = id)
    K0 = frame(m0)
    c = np.zeros((r, r, r))
    for a in range(r):
        for b in range(a + 1, r):
            val = algebroid_bracket(model, sections[a], sections[b], m0).vec
            coeffs, *_ = np.linalg.lstsq(K0, val, rcond=None)
            c[a, b] = coeffs
            c[b, a] = -coeffs

    # residuals
    jac = _jacobi_residual(c)

    par = 0.0
    grid_axis = np.arange(-half_extent, half_extent + spacing / 2, spacing)
    grid_pts = [m0 + np.array(offs) for offs in
                _lattice_offsets(grid_axis, model.n)]
    probe_pts = grid_pts[:: max(1, len(grid_pts) // 9)]
    for m in probe_pts:
        for a in range(r):
            for i in range(model.n):
                par = max(par, float(np.max(np.abs(
                    nabla(m, np.eye(model.n)[i], sections[a]).vec))))

    hom = 0.0
    for _ in range(sample_count):
        m = m0 + rng.uniform(-half_extent, half_extent, size=model.n)
        for a in range(r):
            for b in range(a + 1, r):
                lhs = (jacobian_fd(fields[b], m) @ fields[a](m)
                       - jacobian_fd(fields[a], m) @ fields[b](m))
                rhs = sum(c[a, b, k] * fields[k](m) for k in range(r))
                hom = max(hom, float(np.max(np.abs(lhs - rhs))))

    return ReconstructionResult(
        dim_g0=r,
        structure_constants=c,
        action_fields=fields,
        parallel_sections=sections,
        residuals={
            "jacobi": jac,
            "anchor_hom": hom,
            "parallelism": par,
            "path_dependence": path_dependence,
        },
    )


def _lattice_offsets(axis: np.ndarray, n: int):
    if n == 1:
        return [(a,) for a in axis]
    return [(a, *rest) for a in axis for rest in _lattice_offsets(axis, n - 1)]


def _jacobi_residual(c: np.ndarray) -> float:
    r = c.shape[0]
    worst = 0.0
    for a in range(r):
        for b in range(r):
            for d in range(r):
                total = np.zeros(r)
                for e in range(r):
                    total += (c[a, b, e] * c[e, d]
                              + c[b, d, e] * c[e, a]
                              + c[d, a, e] * c[e, b])
                worst = max(worst, float(np.max(np.abs(total))))
    return worst
