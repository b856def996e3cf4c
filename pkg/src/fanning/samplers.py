"""Random well-conditioned test objects (curves, transformations, maps)."""

from __future__ import annotations

import numpy as np

from . import mats
from .curves import Exponential, Mobius, Polynomial, Sampled, is_fanning
from .mats import symplectic_J

MIN_REL_SIGMA = 0.05


def random_invertible(m, rng, cond_max=20.0):
    while True:
        M = np.eye(m) + 0.5 * rng.normal(size=(m, m))
        if np.linalg.cond(M) < cond_max:
            return M


def random_symplectic(n, rng, scale=0.4):
    H = rng.normal(size=(2 * n, 2 * n))
    return mats.expm(symplectic_J(n) @ (scale * (H + H.T) / 2))


def _well_fanning(curve, window):
    rep = is_fanning(curve, window, 41)
    return rep.worst_rel_sigma >= MIN_REL_SIGMA


def random_polynomial(n, rng, window=(-0.5, 0.5), degree=3):
    """A0 + t A1 + ... near the line [I; tI], rejected until comfortably fanning."""
    base0 = np.vstack([np.eye(n), np.zeros((n, n))])
    base1 = np.vstack([np.zeros((n, n)), np.eye(n)])
    while True:
        coeffs = [base0 + 0.4 * rng.normal(size=(2 * n, n)), base1 + 0.4 * rng.normal(size=(2 * n, n))]
        for k in range(2, degree + 1):
            coeffs.append(0.6 / k * rng.normal(size=(2 * n, n)))
        c = Polynomial(coeffs, window)
        if _well_fanning(c, window):
            return c


def random_exponential(n, rng, window=(-0.5, 0.5)):
    """exp(tX) A0 with X a perturbation of the generator sending [I; 0] to [0; I]."""
    shift = np.zeros((2 * n, 2 * n))
    shift[n:, :n] = np.eye(n)
    while True:
        X = shift + 0.6 * rng.normal(size=(2 * n, 2 * n))
        A0 = np.vstack([np.eye(n), np.zeros((n, n))]) + 0.3 * rng.normal(size=(2 * n, n))
        c = Exponential(X, A0, window)
        if _well_fanning(c, window):
            return c


def random_lagrange_system(n, rng, window=(-0.5, 0.5), symplectic_start=True):
    """Polynomial symmetric K (near I) and V with a symplectic initial frame."""
    from .lagrangian import lagrange_system_frame

    def sym(s):
        M = rng.normal(size=(n, n))
        return s * (M + M.T) / 2

    while True:
        K = [np.eye(n) + sym(0.2), sym(0.3)]
        V = [sym(1.0), sym(0.5)]
        S = random_symplectic(n, rng, 0.3) if symplectic_start else np.eye(2 * n)
        frame0 = S[:, :n]
        K0inv = np.linalg.inv(K[0])
        dframe0 = S[:, n:] @ K0inv
        c = lagrange_system_frame(K, V, frame0, dframe0, window)
        if _well_fanning(c, window):
            return c


def random_sampled(n, rng, window=(-0.5, 0.5), points=81):
    """A Sampled curve tabulated from a random polynomial on a padded grid."""
    src = random_polynomial(n, rng, (window[0] - 0.2, window[1] + 0.2))
    ts = np.linspace(window[0] - 0.15, window[1] + 0.15, points)
    return Sampled.from_curve(src, ts, window)


def random_mobius_near_identity(rng, scale=0.3):
    """Mobius map close to t -> t, with no pole near the unit interval."""
    a, d = 1 + scale * rng.normal(size=2)
    b, c = scale * rng.normal(size=2)
    c = float(np.clip(c, -0.4, 0.4))
    return Mobius(a, b, c, d) if a * d - b * c > 0.2 else Mobius(1.0, b, c, 1.0)
