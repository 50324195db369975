"""Action groupoids G0 x M for matrix-group chart actions.

An arrow is (a, m): the group element a applied at the base point m. The
canonical connection assigns to every arrow the jet of the constant bisection
m' -> (a, m'); its horizontal leaves are the constant-parameter foliation, the
prototype of an involutive connection.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..chartcalc import ChartMap
from ..connection import CartanConnection
from ..groupoid import GroupoidModel
from .rotations import (
    J2,
    compose_so3,
    compose_so3_jac,
    exp_so3,
    jl,
    hat,
    rot2,
)


@dataclass(frozen=True)
class GroupChart:
    """A matrix-group chart: composition/inverse in coordinates with jacobians."""

    dim: int
    compose: Callable[[np.ndarray, np.ndarray], np.ndarray]
    inverse: Callable[[np.ndarray], np.ndarray]
    compose_jac: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]
    inverse_jac: Callable[[np.ndarray], np.ndarray]
    box: np.ndarray
    name: str


@dataclass(frozen=True)
class ActionChart:
    """A smooth left action act(a, m) with jacobians in both slots."""

    act: Callable[[np.ndarray, np.ndarray], np.ndarray]
    act_jac: Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]


def make_action_groupoid(group: GroupChart, action: ActionChart,
                         base_box: np.ndarray,
                         name: str | None = None) -> tuple[GroupoidModel, CartanConnection]:
    base_box = np.asarray(base_box, dtype=float)
    n = base_box.shape[0]
    k = group.dim
    N = k + n
    Ik, In = np.eye(k), np.eye(n)
    Zkn, Znk = np.zeros((k, n)), np.zeros((n, k))

    src = ChartMap(N, n, lambda g: g[k:],
                   jacobian=lambda g: np.hstack([Znk, In]))

    def tgt_eval(g):
        return action.act(g[:k], g[k:])

    def tgt_jac(g):
        Da, Dm = action.act_jac(g[:k], g[k:])
        return np.hstack([Da, Dm])

    tgt = ChartMap(N, n, tgt_eval, jacobian=tgt_jac)
    unit = ChartMap(n, N, lambda m: np.concatenate([np.zeros(k), m]),
                    jacobian=lambda m: np.vstack([Zkn, In]))

    def mul(g, h):
        return np.concatenate([group.compose(g[:k], h[:k]), h[k:]])

    def mul_jac(g, h):
        D2, D1 = group.compose_jac(g[:k], h[:k])
        Dg = np.block([[D2, Zkn], [Znk, np.zeros((n, n))]])
        Dh = np.block([[D1, Zkn], [Znk, In]])
        return Dg, Dh

    def inv(g):
        return np.concatenate([group.inverse(g[:k]), action.act(g[:k], g[k:])])

    def inv_jac(g):
        Dinv = group.inverse_jac(g[:k])
        Da, Dm = action.act_jac(g[:k], g[k:])
        return np.block([[Dinv, Zkn], [Da, Dm]])

    def retract_src(g, m):
        return np.concatenate([g[:k], m])

    def retract_tgt(g, m):
        b = group.inverse(g[:k])
        return np.concatenate([g[:k], action.act(b, m)])

    def retract_tgt_jac(g, m):
        b = group.inverse(g[:k])
        Dinv = group.inverse_jac(g[:k])
        Da, Dm = action.act_jac(b, m)
        Dg = np.block([[Ik, Zkn], [Da @ Dinv, np.zeros((n, n))]])
        Dpoint = np.vstack([Zkn, Dm])
        return Dg, Dpoint

    model = GroupoidModel(
        name=name or f"{group.name}-action",
        n=n,
        N=N,
        src=src,
        tgt=tgt,
        unit=unit,
        mul=mul,
        inv=inv,
        retract_src=retract_src,
        retract_tgt=retract_tgt,
        domain_box=np.vstack([group.box, base_box]),
        base_box=base_box,
        arrow_with_source=lambda m, rng: np.concatenate(
            [rng.uniform(group.box[:, 0], group.box[:, 1]), m]),
        mul_jac=mul_jac,
        inv_jac=inv_jac,
        retract_src_jac=lambda g, m: (np.block([[Ik, Zkn], [Znk, np.zeros((n, n))]]),
                                      np.vstack([Zkn, In])),
        retract_tgt_jac=retract_tgt_jac,
        src_fiber_chart=lambda m0: _action_fiber(group, k, m0),
        extras={"group_dim": k},
    )

    mu_const = np.vstack([Zkn, In])
    S = CartanConnection(model, lambda g: mu_const, name="constant-bisection")
    return model, S


def _action_fiber(group, k, m0):
    m0 = np.asarray(m0, dtype=float)
    emb = ChartMap(k, k + m0.size, lambda a: np.concatenate([a, m0]),
                   jacobian=lambda a: np.vstack([np.eye(k), np.zeros((m0.size, k))]))

    def project(coords):
        return np.asarray(coords, dtype=float)[:k]

    return emb, project


# -- shipped groups/actions ---------------------------------------------------


def translation_group(n: int, half_width: float = 0.8) -> GroupChart:
    box = np.array([[-half_width, half_width]] * n)
    return GroupChart(
        dim=n,
        compose=lambda a2, a1: a1 + a2,
        inverse=lambda a: -a,
        compose_jac=lambda a2, a1: (np.eye(n), np.eye(n)),
        inverse_jac=lambda a: -np.eye(n),
        box=box,
        name=f"translations-R{n}",
    )


def make_translation_groupoid(n: int = 2) -> tuple[GroupoidModel, CartanConnection]:
    group = translation_group(n)
    action = ActionChart(
        act=lambda a, m: m + a,
        act_jac=lambda a, m: (np.eye(n), np.eye(n)),
    )
    base_box = np.array([[-1.0, 1.0]] * n)
    return make_action_groupoid(group, action, base_box, name=f"translation-R{n}")


def se2_group(theta_max: float = 0.6, b_max: float = 0.7) -> GroupChart:
    """SE(2) in the (theta, b) chart; theta lives on the universal cover."""
    box = np.array([[-theta_max, theta_max], [-b_max, b_max], [-b_max, b_max]])

    def compose(a2, a1):
        th2, b2 = a2[0], a2[1:]
        th1, b1 = a1[0], a1[1:]
        return np.concatenate([[th1 + th2], b2 + rot2(th2) @ b1])

    def compose_jac(a2, a1):
        th2 = a2[0]
        b1 = a1[1:]
        R2 = rot2(th2)
        D2 = np.zeros((3, 3))
        D2[0, 0] = 1.0
        D2[1:, 0] = J2 @ R2 @ b1
        D2[1:, 1:] = np.eye(2)
        D1 = np.zeros((3, 3))
        D1[0, 0] = 1.0
        D1[1:, 1:] = R2
        return D2, D1

    def inverse(a):
        th, b = a[0], a[1:]
        return np.concatenate([[-th], -rot2(-th) @ b])

    def inverse_jac(a):
        th, b = a[0], a[1:]
        D = np.zeros((3, 3))
        D[0, 0] = -1.0
        D[1:, 0] = J2 @ rot2(-th) @ b
        D[1:, 1:] = -rot2(-th)
        return D

    return GroupChart(3, compose, inverse, compose_jac, inverse_jac, box, "se2")


def make_se2_groupoid() -> tuple[GroupoidModel, CartanConnection]:
    group = se2_group()

    def act(a, m):
        return rot2(a[0]) @ m + a[1:]

    def act_jac(a, m):
        R = rot2(a[0])
        Da = np.zeros((2, 3))
        Da[:, 0] = J2 @ R @ m
        Da[:, 1:] = np.eye(2)
        return Da, R

    base_box = np.array([[-1.0, 1.0], [-1.0, 1.0]])
    return make_action_groupoid(group, ActionChart(act, act_jac), base_box,
                                name="se2-action")


def so3_group(w_max: float = 0.5) -> GroupChart:
    box = np.array([[-w_max, w_max]] * 3)
    return GroupChart(
        dim=3,
        compose=compose_so3,
        inverse=lambda w: -w,
        compose_jac=compose_so3_jac,
        inverse_jac=lambda w: -np.eye(3),
        box=box,
        name="so3",
    )


def unstereo(x: np.ndarray) -> np.ndarray:
    s = float(x @ x)
    return np.array([2.0 * x[0], 2.0 * x[1], s - 1.0]) / (1.0 + s)


def unstereo_jac(x: np.ndarray) -> np.ndarray:
    s = float(x @ x)
    d = 1.0 + s
    num = np.array([2.0 * x[0], 2.0 * x[1], s - 1.0])
    dnum = np.array([[2.0, 0.0], [0.0, 2.0], [2.0 * x[0], 2.0 * x[1]]])
    dd = 2.0 * np.asarray(x, dtype=float)
    return dnum / d - np.outer(num, dd) / d**2


def stereo(u: np.ndarray) -> np.ndarray:
    return np.array([u[0], u[1]]) / (1.0 - u[2])


def stereo_jac(u: np.ndarray) -> np.ndarray:
    w = 1.0 - u[2]
    return np.array([[1.0 / w, 0.0, u[0] / w**2],
                     [0.0, 1.0 / w, u[1] / w**2]])


def make_so3_sphere_groupoid() -> tuple[GroupoidModel, CartanConnection]:
    """Rotations of the sphere acting on a stereographic chart."""
    group = so3_group()

    def act(w, x):
        return stereo(exp_so3(w) @ unstereo(x))

    def act_jac(w, x):
        R = exp_so3(w)
        u = unstereo(x)
        Ru = R @ u
        Ds = stereo_jac(Ru)
        JL = jl(w)
        Dw = np.stack([Ds @ (hat(JL[:, kk]) @ Ru) for kk in range(3)], axis=1)
        Dx = Ds @ R @ unstereo_jac(x)
        return Dw, Dx

    base_box = np.array([[-0.7, 0.7], [-0.7, 0.7]])
    return make_action_groupoid(group, ActionChart(act, act_jac), base_box,
                                name="so3-sphere")
