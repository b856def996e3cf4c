"""Detection of zero-Jacobi, parallel and weakly parallel curves, and
reconstruction of the one-parameter subgroup behind a weakly parallel curve."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import invariants as inv
from . import mats
from .curves import FrameCurve
from .errors import NotWeaklyParallel, SpecError
from .mats import DEFAULT, Tolerances
from .normalize import normal_frame

DEFAULT_SAMPLES = 17


@dataclass
class Flag:
    value: bool
    residual: float


@dataclass
class ClassificationReport:
    zero_jacobi: Flag
    parallel: Flag
    weakly_parallel: Flag
    X_generator: np.ndarray | None = None
    lax_Y: np.ndarray | None = None
    generator_residual: float | None = None
    notes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        def fl(f):
            return {"value": f.value, "residual": f.residual}

        return {"zero_jacobi": fl(self.zero_jacobi), "parallel": fl(self.parallel),
                "weakly_parallel": fl(self.weakly_parallel),
                "X_generator": None if self.X_generator is None else self.X_generator.tolist(),
                "lax_Y": None if self.lax_Y is None else self.lax_Y.tolist(),
                "generator_residual": self.generator_residual, "notes": list(self.notes)}


def lax_fit(S_list, Sdot_list):
    """Minimum-norm constant Y with S' = S Y - Y S; returns (Y, residual)."""
    n = S_list[0].shape[0]
    I = np.eye(n)
    M = np.vstack([np.kron(I, S) - np.kron(S.T, I) for S in S_list])
    rhs = np.concatenate([Sd.ravel(order="F") for Sd in Sdot_list])
    y, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    Y = y.reshape(n, n, order="F")
    res = 0.0
    for S, Sd in zip(S_list, Sdot_list):
        scale = max(1.0, mats.norm(S) * mats.norm(Y))
        res = max(res, mats.norm(Sd - mats.commutator(S, Y)) / scale)
    return Y, res


def _generator(curve, nf, tau0, Y, tol):
    n = curve.n
    jets = inv.checked_jets(curve, tau0, 3, tol)
    A, Ad = jets[0], jets[1]
    Z = inv.pq_series_from_jets(jets)
    P_A = Z[0][n:]
    S0 = inv.schwarzian_from_jets(jets)
    B0 = A
    B1 = Ad + 0.5 * A @ P_A - A @ Y
    P = 2 * Y
    Q = Y @ Y + 0.5 * S0
    G = np.hstack([B0, B1])
    Om = np.block([[np.zeros((n, n)), -Q], [np.eye(n), -P]])
    return G @ Om @ np.linalg.inv(G)


def generator_residual(curve, X, tau0, window, samples=DEFAULT_SAMPLES):
    """max over samples of the sine of the largest principal angle between
    exp((t - tau0) X) l(tau0) and l(t)."""
    A0 = curve(tau0)
    worst = 0.0
    for t in np.linspace(window[0], window[1], samples):
        worst = max(worst, mats.subspace_distance(mats.expm((t - tau0) * X) @ A0, curve(t)))
    return worst


def reconstruct_generator(curve: FrameCurve, tau0: float, window=None, Y=None, tol: Tolerances = DEFAULT,
                          samples: int = DEFAULT_SAMPLES) -> np.ndarray:
    """X with l(t) = exp((t - tau0) X) l(tau0), for weakly parallel curves."""
    if window is None:
        window = curve.window
    if window is None:
        raise SpecError("reconstruct_generator needs a window")
    nf = normal_frame(curve, tau0, window, tol)
    if Y is None:
        ts = np.linspace(window[0], window[1], samples)
        Y, _ = lax_fit([nf.schwarzian(t) for t in ts], [nf.schwarzian_dot(t) for t in ts])
    X = _generator(curve, nf, tau0, Y, tol)
    res = generator_residual(curve, X, tau0, window, samples)
    if res > 10 * tol.residual_rtol:
        raise NotWeaklyParallel(f"reconstructed one-parameter subgroup misses the curve by {res:.3e}")
    return X


def classify(curve: FrameCurve, window, samples: int = DEFAULT_SAMPLES, tol: Tolerances = DEFAULT) -> ClassificationReport:
    window = (float(window[0]), float(window[1]))
    ts = np.linspace(window[0], window[1], samples)
    tau0 = 0.5 * (window[0] + window[1])
    thr = 10 * tol.residual_rtol

    K_max = Fdd_max = 0.0
    for t in ts:
        sm = inv.sample(curve, t, tol)
        K_max = max(K_max, mats.norm(sm.K))
        Fdd_max = max(Fdd_max, mats.norm(sm.Fddot))
    zj = K_max / max(1.0, 0.25 * Fdd_max ** 2)

    nf = normal_frame(curve, tau0, window, tol)
    S = [nf.schwarzian(t) for t in ts]
    Sd = [nf.schwarzian_dot(t) for t in ts]
    par = max(mats.norm(x) for x in Sd) / max(1.0, max(mats.norm(x) for x in S))
    Y, wp = lax_fit(S, Sd)

    report = ClassificationReport(Flag(zj <= thr, zj), Flag(par <= thr, par), Flag(False, wp), lax_Y=Y)
    if wp <= thr or par <= thr:
        Yuse = Y if wp <= thr else np.zeros_like(Y)
        X = _generator(curve, nf, tau0, Yuse, tol)
        gres = generator_residual(curve, X, tau0, window, samples)
        report.X_generator, report.generator_residual = X, gres
        if gres <= thr:
            report.weakly_parallel.value = True
        else:
            report.notes.append("Lax fit succeeded but the reconstructed generator failed verification")
            report.parallel.value = report.zero_jacobi.value = False
    if report.parallel.value:
        A0 = mats.orth(curve(tau0))
        X = report.X_generator
        leak = mats.norm(X @ X @ A0 - A0 @ (A0.T @ X @ X @ A0)) / max(1.0, mats.norm(X) ** 2)
        report.notes.append(f"X^2 l(tau0) leaves l(tau0) by {leak:.3e}")
    if report.zero_jacobi.value and not report.parallel.value:
        report.notes.append("zero Jacobi endomorphism without constant normal-frame Schwarzian")
    return report


# -- fractional-linear matrix curves ----------------------------------------------


class GraphFrame(FrameCurve):
    """The frame [I; M(t)] spanning the graph of an n x n curve M."""

    kind = "Graph"

    def __init__(self, M, n=None, window=None):
        if callable(M):
            self._M = M
            if n is None:
                n = np.atleast_2d(M(0.0 if window is None else 0.5 * sum(window), 0)[0]).shape[0]
        else:
            coeffs = [np.atleast_2d(np.asarray(c, float)) for c in M]
            from .curves import poly_jets

            self._M = lambda t, order: poly_jets(coeffs, t, order)
            n = coeffs[0].shape[0]
        super().__init__(n, window)

    def M_jets(self, t, order):
        return [np.atleast_2d(np.asarray(m, float)) for m in self._M(t, order)]

    def _jets(self, t, order):
        return inv.graph_frame_jets(self.M_jets(t, order))


@dataclass
class FractionalLinear:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    residual: float

    def __call__(self, t):
        return (self.C + t * self.D) @ np.linalg.inv(self.A + t * self.B)

    def as_tuple(self):
        return self.A, self.B, self.C, self.D


def matrix_fractional_detect(M, window, samples: int = DEFAULT_SAMPLES, tol: Tolerances = DEFAULT):
    """(C + tD)(A + tB)^-1 representation of M when its matrix Schwarzian vanishes, else None.

    ``M`` is a list of polynomial coefficient matrices or a callable
    ``M(t, order) -> [M, M', ...]``.  The returned A is normalized to I when invertible.
    """
    g = GraphFrame(M, window=window)
    ts = np.linspace(window[0], window[1], samples)
    worst = 0.0
    for t in ts:
        Mj = g.M_jets(t, 3)
        s = np.linalg.svd(Mj[1], compute_uv=False)
        if s[-1] <= tol.rank_rtol * max(s[0], 1.0):
            raise SpecError(f"M'(t) is singular at t={t}")
        U = np.linalg.solve(Mj[1], Mj[2])
        worst = max(worst, mats.norm(inv.matrix_schwarzian(Mj)) / max(1.0, mats.norm(U) ** 2))
    if worst > 10 * tol.residual_rtol:
        return None
    t0 = 0.5 * (window[0] + window[1])
    jets = inv.checked_jets(g, t0, 2, tol)
    n = g.n
    B0 = jets[0]
    H = inv.horizontal_derivative_from_jets(jets)
    A_, B_ = B0[:n] - t0 * H[:n], H[:n]
    C_, D_ = B0[n:] - t0 * H[n:], H[n:]
    if np.linalg.cond(A_) < 1 / tol.rank_rtol:
        Ainv = np.linalg.inv(A_)
        A_, B_, C_, D_ = np.eye(n), B_ @ Ainv, C_ @ Ainv, D_ @ Ainv
    fl = FractionalLinear(A_, B_, C_, D_, 0.0)
    res = 0.0
    for t in ts:
        Mt = g.M_jets(t, 0)[0]
        res = max(res, mats.norm(fl(t) - Mt) / max(1.0, mats.norm(Mt)))
    fl.residual = res
    return fl if res <= 10 * tol.residual_rtol else None
