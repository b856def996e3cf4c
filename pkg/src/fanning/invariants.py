"""Differential invariants of fanning curves.

Everything is computed pointwise from the jet of a frame at ``t``.  The
central objects are the fundamental endomorphism ``F = G N G^-1`` with
``G = [A | A']`` and ``N = [[0, I], [0, 0]]``, the coefficients ``P, Q`` of
the second order equation ``A'' + A'P + AQ = 0``, and the Schwarzian
``S = 2Q - P^2/2 - P'``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import comb

import numpy as np

from . import mats
from .curves import FrameCurve
from .errors import IllConditioned, InconsistentPaths, JetOrderUnsupported, NotFanning
from .mats import DEFAULT, Tolerances, commutator


def _N(n):
    N = np.zeros((2 * n, 2 * n))
    N[:n, n:] = np.eye(n)
    return N


def checked_jets(curve: FrameCurve, t: float, order: int, tol: Tolerances = DEFAULT):
    """Jets of the frame plus the fanning test on ``[A | A']``."""
    jets = curve.jets(t, max(order, 1))
    G = np.hstack([jets[0], jets[1]])
    s = np.linalg.svd(G, compute_uv=False)
    if s[0] == 0 or s[-1] <= tol.rank_rtol * s[0]:
        raise NotFanning(float(t), float(s[-1]))
    if s[0] / s[-1] > tol.cond_warn:
        warnings.warn(f"[A|A'] has condition {s[0] / s[-1]:.3e} at t={t}", IllConditioned, stacklevel=3)
    return jets[: order + 1] if order >= 1 else jets[:1]


def g_jets(A_jets):
    """Jets of G = [A | A'] (one order shorter than the frame jets)."""
    return [np.hstack([A_jets[j], A_jets[j + 1]]) for j in range(len(A_jets) - 1)]


# -- fundamental endomorphism ------------------------------------------------


def fundamental_from_jets(A_jets):
    G = np.hstack([A_jets[0], A_jets[1]])
    n = A_jets[0].shape[1]
    return G @ _N(n) @ np.linalg.inv(G)


def fundamental(curve: FrameCurve, t: float, tol: Tolerances = DEFAULT) -> np.ndarray:
    return fundamental_from_jets(checked_jets(curve, t, 1, tol))


def fundamental_jets_from_jets(A_jets):
    """(F, F', F'') from frame jets of order 3 via F' = [V,F], F'' = [V',F] + [V,F']."""
    G, Gd, Gdd = g_jets(A_jets[:4])
    Ginv = np.linalg.inv(G)
    F = G @ _N(A_jets[0].shape[1]) @ Ginv
    V = Gd @ Ginv
    Vd = Gdd @ Ginv - V @ V
    Fd = commutator(V, F)
    Fdd = commutator(Vd, F) + commutator(V, Fd)
    return F, Fd, Fdd


def fundamental_jets(curve: FrameCurve, t: float, tol: Tolerances = DEFAULT):
    return fundamental_jets_from_jets(checked_jets(curve, t, 3, tol))


def fundamental_series_from_jets(A_jets):
    """[F, F', ..., F^(m)] where m = len(A_jets) - 2, by Leibniz on G N G^-1."""
    G = g_jets(A_jets)
    N = _N(A_jets[0].shape[1])
    GN = [g @ N for g in G]
    return mats.jet_mul(GN, mats.jet_inv(G))


def fundamental_series(curve: FrameCurve, t: float, order: int, tol: Tolerances = DEFAULT):
    return fundamental_series_from_jets(checked_jets(curve, t, order + 1, tol))


# -- second-order equation ---------------------------------------------------


def pq_series_from_jets(A_jets):
    """Jets of Z = [Q; P] solving G Z = -A''; returns m+1 entries for m+3 frame jets."""
    G = g_jets(A_jets)
    m = len(A_jets) - 3
    lu = np.linalg.inv(G[0])
    Z = []
    for k in range(m + 1):
        rhs = -A_jets[k + 2]
        for j in range(1, k + 1):
            rhs = rhs - comb(k, j) * (G[j] @ Z[k - j])
        Z.append(lu @ rhs)
    return Z


@dataclass(frozen=True)
class PQPair:
    P: np.ndarray
    Q: np.ndarray
    Pdot: np.ndarray
    t: float


def pq_extract(curve: FrameCurve, t: float, tol: Tolerances = DEFAULT) -> PQPair:
    jets = checked_jets(curve, t, 3, tol)
    n = curve.n
    Z0, Z1 = pq_series_from_jets(jets)
    return PQPair(Z0[n:], Z0[:n], Z1[n:], float(t))


def schwarzian_series_from_jets(A_jets):
    """Jets of {A, t}; ``m + 1`` entries from ``m + 4`` frame jets."""
    n = A_jets[0].shape[1]
    Z = pq_series_from_jets(A_jets)
    P = [z[n:] for z in Z]
    Q = [z[:n] for z in Z]
    m = len(Z) - 2
    PP = mats.jet_mul(P, P, m)
    return [2 * Q[k] - 0.5 * PP[k] - P[k + 1] for k in range(m + 1)]


def schwarzian_from_jets(A_jets):
    return schwarzian_series_from_jets(A_jets[:4])[0]


def schwarzian(curve: FrameCurve, t: float, tol: Tolerances = DEFAULT) -> np.ndarray:
    return schwarzian_from_jets(checked_jets(curve, t, 3, tol))


def schwarzian_series(curve: FrameCurve, t: float, order: int, tol: Tolerances = DEFAULT):
    return schwarzian_series_from_jets(checked_jets(curve, t, order + 3, tol))


def matrix_schwarzian(M_jets) -> np.ndarray:
    """S_t(M) = d/dt(M'^-1 M'') - (M'^-1 M'')^2 / 2 for an n x n curve M."""
    M1inv = np.linalg.inv(np.atleast_2d(M_jets[1]))
    U = M1inv @ np.atleast_2d(M_jets[2])
    return M1inv @ np.atleast_2d(M_jets[3]) - 1.5 * U @ U


def graph_frame_jets(M_jets):
    """Jets of the frame [I; M(t)] spanning the graph of M."""
    n = np.atleast_2d(M_jets[0]).shape[0]
    out = [np.vstack([np.eye(n), np.atleast_2d(M_jets[0])])]
    out += [np.vstack([np.zeros((n, n)), np.atleast_2d(m)]) for m in M_jets[1:]]
    return out


# -- projection, horizontal curve ---------------------------------------------


def horizontal_derivative_from_jets(A_jets):
    """H = A' + A P / 2 with P from the second-order equation."""
    n = A_jets[0].shape[1]
    G = np.hstack([A_jets[0], A_jets[1]])
    P = np.linalg.solve(G, -A_jets[2])[n:]
    return A_jets[1] + 0.5 * A_jets[0] @ P


def horizontal_derivative(curve: FrameCurve, t: float, tol: Tolerances = DEFAULT) -> np.ndarray:
    return horizontal_derivative_from_jets(checked_jets(curve, t, 2, tol))


def projection(curve: FrameCurve, t: float, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Projection onto span A(t) along the horizontal subspace; equals (I - F')/2."""
    jets = checked_jets(curve, t, 2, tol)
    G = np.hstack([jets[0], jets[1]])
    V = np.hstack([jets[1], jets[2]]) @ np.linalg.inv(G)
    F = G @ _N(curve.n) @ np.linalg.inv(G)
    Fd = commutator(V, F)
    return 0.5 * (np.eye(2 * curve.n) - Fd)


def horizontal_subspace(curve: FrameCurve, t: float, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Orthonormal basis of h(t)."""
    return mats.orth(horizontal_derivative(curve, t, tol))


# -- Jacobi endomorphism -----------------------------------------------------


def jacobi_paths_from_jets(A_jets):
    """K computed two ways: F''^2/4, and the square of the derivative of the
    projection with range span A and kernel span H."""
    n = A_jets[0].shape[1]
    _, _, Fdd = fundamental_jets_from_jets(A_jets)
    K1 = 0.25 * Fdd @ Fdd
    Z0, Z1 = pq_series_from_jets(A_jets[:4])
    P, Pd = Z0[n:], Z1[n:]
    A, Ad, Add = A_jets[:3]
    H = Ad + 0.5 * A @ P
    Hd = Add + 0.5 * Ad @ P + 0.5 * A @ Pd
    GH = np.hstack([A, H])
    GHinv = np.linalg.inv(GH)
    E = np.zeros((2 * n, 2 * n))
    E[:n, :n] = np.eye(n)
    Pr = GH @ E @ GHinv
    VH = np.hstack([Ad, Hd]) @ GHinv
    Prd = commutator(VH, Pr)
    return K1, Prd @ Prd


def jacobi_from_jets(A_jets, tol: Tolerances = DEFAULT):
    K1, K2 = jacobi_paths_from_jets(A_jets)
    G = np.hstack([A_jets[0], A_jets[1]])
    cond = np.linalg.cond(G)
    scale = max(1.0, mats.norm(K1)) * cond**2
    if mats.norm(K1 - K2) > 1e3 * tol.residual_rtol * scale:
        raise InconsistentPaths(f"Jacobi endomorphism paths disagree by {mats.norm(K1 - K2):.3e}")
    return K1


def jacobi(curve: FrameCurve, t: float, tol: Tolerances = DEFAULT) -> np.ndarray:
    return jacobi_from_jets(checked_jets(curve, t, 3, tol), tol)


def jacobi_dot_from_jets(A_jets):
    """K' = (F''' F'' + F'' F''')/4; needs frame jets to order 4."""
    Fs = fundamental_series_from_jets(A_jets[:5])
    return 0.25 * (Fs[3] @ Fs[2] + Fs[2] @ Fs[3])


def quartic_from_K(K, n):
    """tr k^2 - (tr k)^2/n for the restriction k = K|l; K = diag(k, k) in [A|H]."""
    return 0.5 * np.trace(K @ K) - np.trace(K) ** 2 / (4 * n)


def reparam_invariants(curve: FrameCurve, t: float, tol: Tolerances = DEFAULT, h: float | None = None):
    """(quartic scalar, quintic [K', K])."""
    n = curve.n
    try:
        jets = checked_jets(curve, t, 4, tol)
        K = jacobi_from_jets(jets, tol)
        Kd = jacobi_dot_from_jets(jets)
    except JetOrderUnsupported:
        K = jacobi(curve, t, tol)
        if h is None:
            w = curve.window
            h = 1e-3 * ((w[1] - w[0]) if w else 1.0)
        Kd = (jacobi(curve, t + h, tol) - jacobi(curve, t - h, tol)) / (2 * h)
    return float(quartic_from_K(K, n)), commutator(Kd, K)


# -- everything at once --------------------------------------------------------


@dataclass(frozen=True)
class InvariantSample:
    t: float
    F: np.ndarray
    Fdot: np.ndarray
    Fddot: np.ndarray
    P: np.ndarray        # projection endomorphism (I - F')/2
    K: np.ndarray
    H: np.ndarray
    S: np.ndarray
    Pn: np.ndarray       # n x n coefficient P of the second-order equation
    Qn: np.ndarray
    Pndot: np.ndarray

    @property
    def trK(self) -> float:
        return float(np.trace(self.K))

    @property
    def quartic(self) -> float:
        return float(quartic_from_K(self.K, self.S.shape[0]))


def sample_from_jets(A_jets, t=0.0, tol: Tolerances = DEFAULT) -> InvariantSample:
    n = A_jets[0].shape[1]
    F, Fd, Fdd = fundamental_jets_from_jets(A_jets)
    Z0, Z1 = pq_series_from_jets(A_jets[:4])
    P, Q, Pd = Z0[n:], Z0[:n], Z1[n:]
    S = 2 * Q - 0.5 * P @ P - Pd
    H = A_jets[1] + 0.5 * A_jets[0] @ P
    K = jacobi_from_jets(A_jets, tol)
    return InvariantSample(float(t), F, Fd, Fdd, 0.5 * (np.eye(2 * n) - Fd), K, H, S, P, Q, Pd)


def sample(curve: FrameCurve, t: float, tol: Tolerances = DEFAULT) -> InvariantSample:
    return sample_from_jets(checked_jets(curve, t, 3, tol), t, tol)
