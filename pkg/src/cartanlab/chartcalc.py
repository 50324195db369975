"""Shared numerical kernel: chart-map differentiation, RK4 flows, metric utilities.

Everything here works on plain ndarray coordinates of a single chart. All shipped
models are scaled so chart coordinates are O(1), which is what the default
finite-difference step is tuned for.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, NonFiniteError, SingularMetricError

# Central-difference step on unit-scaled charts: balances O(h^2) truncation
# against double-precision roundoff (eps/h ~ 1e-11).
FD_STEP = 1e-5


@dataclass(frozen=True)
class ChartMap:
    """A smooth map between chart domains, with an optional analytic jacobian.

    eval maps R^dim_in -> R^dim_out. When jacobian is supplied it must return
    the (dim_out, dim_in) derivative matrix and agree with central differences
    of eval to O(h^2); the test suite exercises both paths.
    """

    dim_in: int
    dim_out: int
    eval: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None
    box: np.ndarray | None = None  # (dim_in, 2) domain box, optional

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.eval(np.asarray(x, dtype=float)), dtype=float)


@dataclass(frozen=True)
class MetricChart:
    """Riemannian metric components on one chart: x -> symmetric SPD matrix.

    dg, when supplied, returns the array of partials with dg(x)[i, j, l]
    = d g_ij / d x_l.
    """

    dim: int
    g: Callable[[np.ndarray], np.ndarray]
    dg: Callable[[np.ndarray], np.ndarray] | None = None
    name: str = "metric"

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.g(np.asarray(x, dtype=float)), dtype=float)


def in_box(x: np.ndarray, box: np.ndarray, margin: float = 0.0) -> bool:
    x = np.asarray(x, dtype=float)
    return bool(np.all(x >= box[:, 0] + margin) and np.all(x <= box[:, 1] - margin))


def jacobian_fd(func: Callable, x: np.ndarray, h: float = FD_STEP) -> np.ndarray:
    """Central-difference jacobian of func at x, one column per coordinate."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((np.asarray(func(x + e), dtype=float)
                     - np.asarray(func(x - e), dtype=float)) / (2.0 * h))
    return np.stack(cols, axis=-1)


def differentiate(f: ChartMap, x: np.ndarray, h: float = FD_STEP) -> np.ndarray:
    """Jacobian of a chart map: analytic if supplied, else central differences.

    Central differences carry an O(h^2) per-entry error contract. Raises
    DomainError when x sits within h of the declared box boundary and
    NonFiniteError when eval returns non-finite values.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (f.dim_in,):
        raise DomainError(f"expected point of dimension {f.dim_in}, got shape {x.shape}")
    if f.box is not None and not in_box(x, f.box, margin=h):
        raise DomainError(f"point {x} within step {h} of the domain box boundary")
    if f.jacobian is not None:
        jac = np.asarray(f.jacobian(x), dtype=float)
    else:
        jac = jacobian_fd(f.eval, x, h=h)
    if not np.all(np.isfinite(jac)):
        raise NonFiniteError(f"non-finite derivative at {x}")
    return jac.reshape(f.dim_out, f.dim_in)


def directional_derivative(func: Callable, x: np.ndarray, v: np.ndarray,
                           h: float = FD_STEP) -> np.ndarray:
    """Central-difference derivative of func at x along direction v."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    scale = float(np.max(np.abs(v)))
    if scale == 0.0:
        return np.zeros_like(np.asarray(func(x), dtype=float))
    u = v / scale
    out = (np.asarray(func(x + h * u), dtype=float)
           - np.asarray(func(x - h * u), dtype=float)) / (2.0 * h)
    return scale * out


def deriv_at_zero(curve: Callable[[float], np.ndarray], h: float = FD_STEP) -> np.ndarray:
    """Central-difference derivative at t=0 of a curve of chart points."""
    return (np.asarray(curve(h), dtype=float) - np.asarray(curve(-h), dtype=float)) / (2.0 * h)


def flow(field: Callable[[np.ndarray], np.ndarray], x0: np.ndarray, t: float,
         steps: int, box: np.ndarray | None = None) -> np.ndarray:
    """Classical fixed-step RK4 flow of a vector field; global error O((t/steps)^4).

    Fixed stepping keeps results reproducible bit-for-bit for a fixed
    configuration. Raises NonFiniteError if the trajectory goes non-finite or
    leaves the supplied chart box.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    x = np.asarray(x0, dtype=float).copy()
    h = float(t) / steps
    for _ in range(steps):
        k1 = np.asarray(field(x), dtype=float)
        k2 = np.asarray(field(x + 0.5 * h * k1), dtype=float)
        k3 = np.asarray(field(x + 0.5 * h * k2), dtype=float)
        k4 = np.asarray(field(x + h * k3), dtype=float)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise NonFiniteError("trajectory went non-finite")
        if box is not None and not in_box(x, box):
            raise NonFiniteError(f"trajectory left the chart box at {x}")
    return x


def flow_with_tangent(field: Callable, field_jac: Callable, x0: np.ndarray,
                      v0: np.ndarray, t: float, steps: int) -> tuple[np.ndarray, np.ndarray]:
    """RK4 flow of (x, v) under the variational system dv/dt = Df(x) v.

    Used to push tangent vectors through a flow without differentiating the
    integrator from outside.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    x = np.asarray(x0, dtype=float).copy()
    v = np.asarray(v0, dtype=float).copy()
    h = float(t) / steps

    def rhs(state):
        y, w = state
        return (np.asarray(field(y), dtype=float),
                np.asarray(field_jac(y), dtype=float) @ w)

    for _ in range(steps):
        k1 = rhs((x, v))
        k2 = rhs((x + 0.5 * h * k1[0], v + 0.5 * h * k1[1]))
        k3 = rhs((x + 0.5 * h * k2[0], v + 0.5 * h * k2[1]))
        k4 = rhs((x + h * k3[0], v + h * k3[1]))
        x = x + (h / 6.0) * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        v = v + (h / 6.0) * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
            raise NonFiniteError("variational trajectory went non-finite")
    return x, v


def metric_partials(m: MetricChart, x: np.ndarray, h: float = FD_STEP) -> np.ndarray:
    """dg[i, j, l] = d g_ij / d x_l, analytic when the metric carries dg."""
    x = np.asarray(x, dtype=float)
    if m.dg is not None:
        return np.asarray(m.dg(x), dtype=float)
    cols = [(m(x + h * e) - m(x - h * e)) / (2.0 * h)
            for e in np.eye(m.dim)]
    return np.stack(cols, axis=-1)


def christoffel(m: MetricChart, x: np.ndarray, h: float = FD_STEP) -> np.ndarray:
    """Levi-Civita symbols Gamma[k, i, j] = 1/2 g^{kl}(d_i g_jl + d_j g_il - d_l g_ij).

    Symmetric in (i, j) by construction. Raises SingularMetricError when g(x)
    is not invertible.
    """
    G = m(np.asarray(x, dtype=float))
    det = np.linalg.det(G)
    if abs(det) < 1e-12:
        raise SingularMetricError(f"metric singular at {x} (det={det:.3e})")
    Ginv = np.linalg.inv(G)
    dG = metric_partials(m, x, h=h)
    return christoffel_from_partials(Ginv, dG)


def christoffel_from_partials(Ginv: np.ndarray, dG: np.ndarray) -> np.ndarray:
    """Levi-Civita symbols from an inverse metric and the partials
    dG[i, j, l] = d_l g_ij."""
    # bracket[l, i, j] = d_i g_jl + d_j g_il - d_l g_ij
    bracket = (np.einsum("jli->lij", dG) + np.einsum("ilj->lij", dG)
               - np.einsum("ijl->lij", dG))
    return 0.5 * np.einsum("kl,lij->kij", Ginv, bracket)
