"""Dense linear-algebra substrate and the tolerance policy.

Everything here works on plain ``numpy`` float arrays.  The tolerance values
travel explicitly as a :class:`Tolerances` instance; there are no module
level switches.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from math import comb, factorial

import numpy as np
import scipy.linalg

from .errors import AmbiguousSignature, IllConditioned, NotSymmetric, SingularMatrix


@dataclass(frozen=True)
class Tolerances:
    rank_rtol: float = 1e-10
    residual_rtol: float = 1e-8
    cond_warn: float = 1e8
    eig_zero: float = 1e-8

    def __post_init__(self):
        for name in ("rank_rtol", "residual_rtol", "cond_warn", "eig_zero"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.residual_rtol < self.rank_rtol:
            raise ValueError("residual_rtol must be >= rank_rtol")

    def with_(self, **changes) -> "Tolerances":
        return replace(self, **changes)


DEFAULT = Tolerances()
# residual tolerance used for jets obtained by finite differences
FD_TOLERANCES = Tolerances(residual_rtol=1e-4)


def as_matrix(M, name="matrix") -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    if M.ndim != 2:
        raise ValueError(f"{name} must be two dimensional, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} contains non-finite entries")
    return M


def norm(M) -> float:
    """Spectral norm (largest singular value)."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0.0
    if M.ndim < 2:
        return float(np.linalg.norm(M))
    return float(np.linalg.norm(M, 2))


def rel_err(X, Y, floor=1.0) -> float:
    """Spectral-norm distance of X from Y relative to max(floor, |Y|)."""
    return norm(np.asarray(X) - np.asarray(Y)) / max(floor, norm(Y))


def solve(M, B, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Solve ``M Y = B`` for square ``M``.

    Raises :class:`SingularMatrix` when ``M`` is rank deficient at
    ``tol.rank_rtol``; warns :class:`IllConditioned` above ``tol.cond_warn``.
    """
    M = as_matrix(M, "M")
    B = np.asarray(B, dtype=float)
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"M must be square, got {M.shape}")
    if B.shape[0] != M.shape[0]:
        raise ValueError("row count of B does not match M")
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0.0 or s[-1] <= tol.rank_rtol * s[0]:
        raise SingularMatrix(f"matrix is singular to relative tolerance {tol.rank_rtol:g}")
    cond = s[0] / s[-1]
    if cond > tol.cond_warn:
        warnings.warn(f"condition number {cond:.3e} exceeds {tol.cond_warn:g}", IllConditioned, stacklevel=2)
    return np.linalg.solve(M, B)


def inv(M, tol: Tolerances = DEFAULT) -> np.ndarray:
    M = as_matrix(M, "M")
    return solve(M, np.eye(M.shape[0]), tol)


def sym_eigen(S, tol: Tolerances = DEFAULT):
    """Eigen-decomposition of a symmetric matrix, eigenvalues ascending."""
    S = as_matrix(S, "S")
    scale = max(norm(S), np.finfo(float).tiny)
    if norm(S - S.T) > tol.residual_rtol * scale:
        raise NotSymmetric(f"asymmetry {norm(S - S.T):.3e} exceeds tolerance")
    w, V = np.linalg.eigh(0.5 * (S + S.T))
    return w, V


def index(S, tol: Tolerances = DEFAULT) -> int:
    """Number of negative eigenvalues of a symmetric invertible matrix.

    Eigenvalues inside the band ``eig_zero * max|lambda|`` make the count
    undecidable and raise :class:`AmbiguousSignature`.
    """
    w, _ = sym_eigen(S, tol)
    band = tol.eig_zero * max(np.max(np.abs(w)), np.finfo(float).tiny)
    if np.any(np.abs(w) <= band):
        raise AmbiguousSignature(f"eigenvalue within {band:.3e} of zero: {w}")
    return int(np.sum(w < 0))


def expm(X) -> np.ndarray:
    X = as_matrix(X, "X")
    if X.shape[0] != X.shape[1]:
        raise ValueError("expm needs a square matrix")
    return scipy.linalg.expm(X)


def nullspace(M, rtol: float | None = None, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Orthonormal basis (as columns) of the numerical nullspace of ``M``."""
    M = np.asarray(M, dtype=float)
    if rtol is None:
        rtol = tol.rank_rtol
    ncols = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(ncols)
    _, s, Vt = np.linalg.svd(M, full_matrices=True)
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        return np.eye(ncols)
    rank = int(np.sum(s > rtol * smax))
    return Vt[rank:].T.copy()


def orth(A) -> np.ndarray:
    """Orthonormal basis of the column span of a full-column-rank ``A``."""
    Q, _ = np.linalg.qr(np.asarray(A, dtype=float))
    return Q


def principal_angles(A, B) -> np.ndarray:
    return scipy.linalg.subspace_angles(np.asarray(A, float), np.asarray(B, float))


def subspace_distance(A, B) -> float:
    """Sine of the largest principal angle between the column spans."""
    return float(np.sin(np.max(principal_angles(A, B))))


def join(A, B) -> np.ndarray:
    return np.hstack([A, B])


def commutator(A, B) -> np.ndarray:
    return A @ B - B @ A


def anticommutator(A, B) -> np.ndarray:
    return A @ B + B @ A


def symplectic_J(n: int) -> np.ndarray:
    Z, I = np.zeros((n, n)), np.eye(n)
    return np.block([[Z, -I], [I, Z]])


def chebyshev_points(a: float, b: float, m: int) -> np.ndarray:
    k = np.arange(m)
    x = np.cos((2 * k + 1) * np.pi / (2 * m))[::-1]
    return 0.5 * (a + b) + 0.5 * (b - a) * x


# -- truncated Taylor jets ----------------------------------------------------
#
# A jet is a list [f, f', f'', ...] of derivatives at one point.  Entries may
# be scalars or arrays; products follow the Leibniz rule.


def jet_mul(a, b, order=None):
    k_max = min(len(a), len(b)) - 1 if order is None else order
    return [sum(comb(k, j) * (a[j] @ b[k - j] if np.ndim(a[j]) and np.ndim(b[k - j]) else a[j] * b[k - j])
                for j in range(k + 1)) for k in range(k_max + 1)]


def jet_inv(g):
    """Jet of the matrix inverse from the jet of an invertible matrix."""
    h0 = np.linalg.inv(g[0])
    h = [h0]
    for k in range(1, len(g)):
        acc = sum(comb(k, j) * (g[j] @ h[k - j]) for j in range(1, k + 1))
        h.append(-h0 @ acc)
    return h


def jet_compose(f, s):
    """Derivatives of ``f(s(t))`` given derivatives of ``f`` at ``s(t)``
    and of the scalar map ``s`` at ``t`` (general Faa di Bruno)."""
    m = min(len(f), len(s)) - 1
    # normalized Taylor coefficients of delta = s(t + x) - s(t)
    d = np.zeros(m + 1)
    for j in range(1, m + 1):
        d[j] = s[j] / factorial(j)
    power = np.zeros(m + 1)
    power[0] = 1.0
    coeffs = [0.0 * np.asarray(f[0]) for _ in range(m + 1)]
    for k in range(m + 1):
        fk = np.asarray(f[k]) / factorial(k)
        for j in range(m + 1):
            if power[j] != 0.0:
                coeffs[j] = coeffs[j] + power[j] * fk
        power = np.convolve(power, d)[: m + 1]
    return [coeffs[j] * factorial(j) for j in range(m + 1)]


def inverse_function_jets(s):
    """Derivatives of the inverse map at ``s(t)`` from derivatives of ``s`` at ``t``."""
    m = len(s) - 1
    if s[1] == 0:
        raise ZeroDivisionError("map is not locally invertible")
    phi = [0.0] * (m + 1)
    phi[1] = 1.0 / s[1]
    for k in range(2, m + 1):
        # k-th derivative of s(phi(x)) must vanish; it is linear in phi[k]
        trial = jet_compose(list(s[: k + 1]), phi[: k + 1])
        phi[k] = -trial[k] / s[1]
    return phi  # phi[0] is left for the caller to fill in
