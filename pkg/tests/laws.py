"""Random-witness checks of the transformation laws of the invariants.

Each function draws a curve and a witness from ``rng`` and returns the
relative residual of one law.
"""

import numpy as np

from fanning import invariants as inv
from fanning import mats
from fanning.curves import PolyMap, Reparameterized, Transformed
from fanning.samplers import random_invertible, random_polynomial


def rel(X, Y):
    return mats.norm(np.asarray(X) - np.asarray(Y)) / max(1.0, mats.norm(Y))


def _setup(rng, n=2):
    c = random_polynomial(n, rng)
    t = float(rng.uniform(-0.3, 0.3))
    return c, t


def _gauge(rng, n, t):
    """Polynomial X(t) = X0 + (t - t0) X1 + (t - t0)^2 X2 invertible near t."""
    X0 = random_invertible(n, rng)
    X1, X2 = 0.3 * rng.normal(size=(2, n, n))
    coeffs = [X0 - t * X1 + t * t * X2, X1 - 2 * t * X2, X2]
    return coeffs


def _reparam(rng):
    a, b = 0.2 * rng.normal(size=2)
    return PolyMap([0.05 * rng.normal(), 1.0, a, b])


def scalar_schwarzian(s):
    return s[3] / s[1] - 1.5 * (s[2] / s[1]) ** 2


def law_F_left(rng):
    c, t = _setup(rng)
    T = random_invertible(4, rng)
    return rel(inv.fundamental(Transformed(c, T=T), t), T @ inv.fundamental(c, t) @ np.linalg.inv(T))


def law_F_gauge(rng):
    c, t = _setup(rng)
    return rel(inv.fundamental(Transformed(c, X=_gauge(rng, 2, t)), t), inv.fundamental(c, t))


def law_F_reparam(rng):
    c, t = _setup(rng)
    s = _reparam(rng)
    sj = s.jets(t, 1)
    return rel(inv.fundamental(Reparameterized(c, s), t), inv.fundamental(c, sj[0]) / sj[1])


def law_H_left(rng):
    c, t = _setup(rng)
    T = random_invertible(4, rng)
    return rel(inv.horizontal_derivative(Transformed(c, T=T), t), T @ inv.horizontal_derivative(c, t))


def law_H_gauge(rng):
    c, t = _setup(rng)
    X = _gauge(rng, 2, t)
    Xt = sum(t ** k * x for k, x in enumerate(X))
    return rel(inv.horizontal_derivative(Transformed(c, X=X), t), inv.horizontal_derivative(c, t) @ Xt)


def law_H_reparam(rng):
    c, t = _setup(rng)
    s = _reparam(rng)
    s0, s1, s2 = s.jets(t, 2)
    # P becomes s'P - s''/s', hence the minus sign
    expect = inv.horizontal_derivative(c, s0) * s1 - 0.5 * c(s0) * s2 / s1
    return rel(inv.horizontal_derivative(Reparameterized(c, s), t), expect)


def law_S_left(rng):
    c, t = _setup(rng)
    T = random_invertible(4, rng)
    return rel(inv.schwarzian(Transformed(c, T=T), t), inv.schwarzian(c, t))


def law_S_gauge(rng):
    c, t = _setup(rng)
    X = _gauge(rng, 2, t)
    Xt = sum(t ** k * x for k, x in enumerate(X))
    return rel(inv.schwarzian(Transformed(c, X=X), t), np.linalg.solve(Xt, inv.schwarzian(c, t) @ Xt))


def law_S_reparam(rng):
    c, t = _setup(rng)
    s = _reparam(rng)
    sj = s.jets(t, 3)
    expect = inv.schwarzian(c, sj[0]) * sj[1] ** 2 + scalar_schwarzian(sj) * np.eye(2)
    return rel(inv.schwarzian(Reparameterized(c, s), t), expect)


def law_K_reparam(rng):
    c, t = _setup(rng)
    s = _reparam(rng)
    sj = s.jets(t, 3)
    expect = inv.jacobi(c, sj[0]) * sj[1] ** 2 + 0.5 * scalar_schwarzian(sj) * np.eye(4)
    return rel(inv.jacobi(Reparameterized(c, s), t), expect)


def law_fractional(rng, n=2):
    """S_t((C + D M)(A + B M)^-1) = (A + B M) S_t(M) (A + B M)^-1 for polynomial M."""
    Mc = [rng.normal(size=(n, n)), np.eye(n) + 0.3 * rng.normal(size=(n, n)),
          0.5 * rng.normal(size=(n, n)), 0.3 * rng.normal(size=(n, n))]
    A, D = (np.eye(n) + 0.3 * rng.normal(size=(n, n)) for _ in range(2))
    B, C = (0.3 * rng.normal(size=(n, n)) for _ in range(2))
    t = float(rng.uniform(-0.2, 0.2))
    from fanning.curves import poly_jets

    Mj = poly_jets(Mc, t, 3)
    T = np.block([[A, B], [C, D]])
    frame = [T @ g for g in inv.graph_frame_jets(Mj)]
    # the transformed curve spans the graph of N = (C + D M)(A + B M)^-1;
    # its jets follow from N (A + B M) = C + D M by the Leibniz rule
    top = [f[:n] for f in frame]
    bot = [f[n:] for f in frame]
    topinv = mats.jet_inv(top)
    N = mats.jet_mul(bot, topinv)
    X = top[0]
    return rel(inv.matrix_schwarzian(N), X @ inv.matrix_schwarzian(Mj) @ np.linalg.inv(X))


ALL_LAWS = {
    "F_left": law_F_left, "F_gauge": law_F_gauge, "F_reparam": law_F_reparam,
    "H_left": law_H_left, "H_gauge": law_H_gauge, "H_reparam": law_H_reparam,
    "S_left": law_S_left, "S_gauge": law_S_gauge, "S_reparam": law_S_reparam,
    "K_reparam": law_K_reparam, "fractional": law_fractional,
}
