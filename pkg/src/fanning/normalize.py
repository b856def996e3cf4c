"""Normal frames and special parameterizations.

A normal frame is a spanning frame ``B = A X`` whose second derivative stays
inside its own span.  The gauge solves ``X' = P X / 2``.  A special
parameterization makes the trace of the Jacobi endomorphism vanish; it is
``s = u1/u2`` for two solutions of ``u'' + q u = 0`` with
``q = tr K / (2n)``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.optimize import brentq

from . import invariants as inv
from . import mats
from .curves import FrameCurve, ParamMap, Reparameterized, rk4_table
from .errors import JetOrderUnsupported, WindowTooWide
from .mats import DEFAULT, Tolerances


class HermiteTable:
    """Piecewise quintic Hermite interpolation of (y, y', y'') on a grid."""

    def __init__(self, ts, y, dy, ddy):
        order = np.argsort(ts)
        self.ts = np.asarray(ts, float)[order]
        self.y = np.asarray(y)[order]
        self.dy = np.asarray(dy)[order]
        self.ddy = np.asarray(ddy)[order]

    def __call__(self, t):
        ts = self.ts
        if t < ts[0] - 1e-12 or t > ts[-1] + 1e-12:
            raise ValueError(f"t={t} outside table range [{ts[0]}, {ts[-1]}]")
        if len(ts) == 1:
            return self.y[0]
        i = int(np.clip(np.searchsorted(ts, t) - 1, 0, len(ts) - 2))
        h = ts[i + 1] - ts[i]
        x = (t - ts[i]) / h
        x2, x3 = x * x, x ** 3
        x4, x5 = x3 * x, x3 * x2
        h00 = 1 - 10 * x3 + 15 * x4 - 6 * x5
        h10 = x - 6 * x3 + 8 * x4 - 3 * x5
        h20 = 0.5 * (x2 - 3 * x3 + 3 * x4 - x5)
        h01 = 10 * x3 - 15 * x4 + 6 * x5
        h11 = -4 * x3 + 7 * x4 - 3 * x5
        h21 = 0.5 * (x3 - 2 * x4 + x5)
        return (h00 * self.y[i] + h10 * h * self.dy[i] + h20 * h * h * self.ddy[i]
                + h01 * self.y[i + 1] + h11 * h * self.dy[i + 1] + h21 * h * h * self.ddy[i + 1])


def _integrate_both_ways(rhs, t0, y0, window, tol):
    ts, ys = [np.array([t0])], [np.asarray(y0, float)[None]]
    for end in (window[1], window[0]):
        if end != t0:
            a, b = rk4_table(rhs, t0, y0, end, tol)
            ts.append(a[1:])
            ys.append(b[1:])
    return np.concatenate(ts), np.concatenate(ys)


def _check_window(t0, window):
    window = (float(window[0]), float(window[1]))
    if not window[0] <= t0 <= window[1]:
        raise ValueError(f"anchor {t0} lies outside window {window}")
    return window


# -- normal frames -----------------------------------------------------------


class NormalFrame(FrameCurve):
    """B(t) = A(t) X(t) C with X' = P X / 2, X(tau0) = I, and a constant C."""

    kind = "NormalFrame"

    def __init__(self, base: FrameCurve, tau0: float, window, table: HermiteTable, right=None,
                 tol: Tolerances = DEFAULT):
        super().__init__(base.n, window)
        self.base, self.tau0, self.table, self.tol = base, float(tau0), table, tol
        self.right = np.eye(base.n) if right is None else np.asarray(right, float)
        self.max_jet_order = base.max_jet_order - 1

    def with_right_factor(self, C) -> "NormalFrame":
        return NormalFrame(self.base, self.tau0, self.window, self.table, self.right @ C, self.tol)

    def gauge(self, t: float) -> np.ndarray:
        return self.table(t)

    def gauge_jets(self, t: float, order: int, A_jets=None):
        n = self.n
        if A_jets is None:
            A_jets = self.base.jets(t, order + 1)
        X = [self.table(t)]
        if order >= 1:
            P = [z[n:] for z in inv.pq_series_from_jets(A_jets[: order + 2])]
            for m in range(order):
                X.append(0.5 * sum(comb(m, j) * P[j] @ X[m - j] for j in range(m + 1)))
        return X

    def _jets(self, t, order):
        A_jets = inv.checked_jets(self.base, t, max(order + 1, 2), self.tol)
        X = self.gauge_jets(t, order, A_jets)
        B = mats.jet_mul(A_jets[: order + 1], X, order)
        return [b @ self.right for b in B]

    def schwarzian(self, t: float) -> np.ndarray:
        """Schwarzian of B by conjugation of the base Schwarzian."""
        S = inv.schwarzian(self.base, t, self.tol)
        Y = self.gauge(t) @ self.right
        return np.linalg.solve(Y, S @ Y)

    def schwarzian_dot(self, t: float) -> np.ndarray:
        """d/dt of the normal-frame Schwarzian: Y^-1 (S_A' + [S_A, P]/2) Y."""
        n = self.n
        jets = inv.checked_jets(self.base, t, 4, self.tol)
        S, Sd = inv.schwarzian_series_from_jets(jets)
        P = inv.pq_series_from_jets(jets[:3])[0][n:]
        Y = self.gauge(t) @ self.right
        return np.linalg.solve(Y, (Sd + 0.5 * mats.commutator(S, P)) @ Y)


def normal_frame(curve: FrameCurve, tau0: float, window, tol: Tolerances = DEFAULT) -> NormalFrame:
    window = _check_window(tau0, window)
    n = curve.n

    @functools.lru_cache(maxsize=None)
    def half_P(t):
        return 0.5 * inv.pq_series_from_jets(inv.checked_jets(curve, t, 2, tol))[0][n:]

    def rhs(t, Xflat):
        return (half_P(t) @ Xflat.reshape(n, n)).ravel()

    ts, ys = _integrate_both_ways(rhs, tau0, np.eye(n).ravel(), window, 1e-2 * tol.residual_rtol)
    X = ys.reshape(-1, n, n)
    dX, ddX = [], []
    for t, x in zip(ts, X):
        jets = inv.checked_jets(curve, t, 3, tol)
        Z = inv.pq_series_from_jets(jets)
        P, Pd = Z[0][n:], Z[1][n:]
        xd = 0.5 * P @ x
        dX.append(xd)
        ddX.append(0.5 * Pd @ x + 0.5 * P @ xd)
    table = HermiteTable(ts, X, np.array(dX), np.array(ddX))
    return NormalFrame(curve, tau0, window, table, tol=tol)


def moving_frame_check(nf: FrameCurve, t: float, S=None) -> float:
    """|| [B|B']^-1 [B'|B''] - [[0, -S/2], [I, 0]] || for a normal frame B."""
    B = nf.jets(t, 2)
    n = nf.n
    if S is None:
        S = nf.schwarzian(t) if isinstance(nf, NormalFrame) else inv.schwarzian(nf, t)
    G = np.hstack([B[0], B[1]])
    omega = np.linalg.solve(G, np.hstack([B[1], B[2]]))
    target = np.block([[np.zeros((n, n)), -0.5 * S], [np.eye(n), np.zeros((n, n))]])
    return mats.norm(omega - target)


def normality_residual(B_jets) -> float:
    """Distance of B'' from span B, relative to |B''| (or 1)."""
    B, Bdd = B_jets[0], B_jets[2]
    coef, *_ = np.linalg.lstsq(B, Bdd, rcond=None)
    return mats.norm(Bdd - B @ coef) / max(1.0, mats.norm(Bdd))


# -- special parameterizations ----------------------------------------------


class SpecialParameterization(ParamMap):
    """s(t) = u1/u2 with u'' + q u = 0, s(tau0) = 0, s'(tau0) = 1, s''(tau0) = 0."""

    def __init__(self, curve, tau0, window, table: HermiteTable, tol: Tolerances):
        self.curve, self.tau0, self.window, self.table, self.tol = curve, float(tau0), window, table, tol
        self.image = (self(window[0]), self(window[1]))

    def _q_jets(self, t, order):
        n = self.curve.n
        jets = inv.checked_jets(self.curve, t, order + 3, self.tol)
        return [np.trace(S) / (2 * n) for S in inv.schwarzian_series_from_jets(jets)]

    def jets(self, t, order):
        u1, u2, du1, du2 = self.table(t)
        out = [u1 / u2]
        if order == 0:
            return out
        q = self._q_jets(t, max(order - 2, 0)) if order >= 3 else []
        u = [u2, du2]
        for m in range(order - 2):
            u.append(-sum(comb(m, j) * q[j] * u[m - j] for j in range(m + 1)))
        # s' = u2^-2 (the Wronskian of the pair is 1)
        w = [np.array([[v]]) for v in u[:order]]
        winv = mats.jet_inv(w)
        sd = mats.jet_mul(winv, winv)
        return out + [float(v[0, 0]) for v in sd]

    def inverse(self) -> "InverseParam":
        return InverseParam(self)


class InverseParam(ParamMap):
    """t(sigma), the inverse of a special parameterization."""

    def __init__(self, sp: SpecialParameterization):
        self.sp = sp

    def jets(self, sigma, order):
        sp = self.sp
        lo, hi = sp.image
        if sigma < lo - 1e-12 or sigma > hi + 1e-12:
            raise ValueError(f"sigma={sigma} outside image [{lo}, {hi}]")
        if sigma <= lo:
            t = sp.window[0]
        elif sigma >= hi:
            t = sp.window[1]
        else:
            t = brentq(lambda x: sp(x) - sigma, sp.window[0], sp.window[1], xtol=1e-15, rtol=4 * np.finfo(float).eps)
        phi = [t] + mats.inverse_function_jets(sp.jets(t, order))[1:] if order else [t]
        return phi


def special_parameterization(curve: FrameCurve, tau0: float, window, tol: Tolerances = DEFAULT) -> SpecialParameterization:
    window = _check_window(tau0, window)
    n = curve.n

    @functools.lru_cache(maxsize=None)
    def q(t):
        return np.trace(inv.schwarzian(curve, t, tol)) / (2 * n)

    def rhs(t, y):
        u1, u2, d1, d2 = y
        qt = q(t)
        return np.array([d1, d2, -qt * u1, -qt * u2])

    ts, ys = _integrate_both_ways(rhs, tau0, np.array([0.0, 1.0, 1.0, 0.0]), window, 1e-2 * tol.residual_rtol)
    bad = ys[:, 1] <= 1e-6
    if np.any(bad):
        tb = ts[bad]
        raise WindowTooWide(float(tb[np.argmin(np.abs(tb - tau0))]))
    dys = np.array([rhs(t, y) for t, y in zip(ts, ys)])
    qv = np.array([q(t) for t in ts])
    qd = np.array([_q_dot(curve, t, tol) for t in ts])
    ddys = np.column_stack([dys[:, 2], dys[:, 3],
                            -qd * ys[:, 0] - qv * dys[:, 0], -qd * ys[:, 1] - qv * dys[:, 1]])
    table = HermiteTable(ts, ys, dys, ddys)
    return SpecialParameterization(curve, tau0, window, table, tol)


def _q_dot(curve, t, tol):
    try:
        jets = inv.checked_jets(curve, t, 4, tol)
        return np.trace(inv.schwarzian_series_from_jets(jets)[1]) / (2 * curve.n)
    except JetOrderUnsupported:
        h = 1e-4
        return (np.trace(inv.schwarzian(curve, t + h, tol)) - np.trace(inv.schwarzian(curve, t - h, tol))) / (4 * h * curve.n)


def specially_parameterized(curve: FrameCurve, tau0: float, window, tol: Tolerances = DEFAULT):
    """(curve in the special parameter sigma, the parameterization s)."""
    sp = special_parameterization(curve, tau0, window, tol)
    return Reparameterized(curve, sp.inverse(), sp.image), sp


@dataclass(frozen=True)
class SpecialNormalFrame:
    frame: NormalFrame
    param: SpecialParameterization

    @property
    def window(self):
        return self.frame.window


def special_normal_frame(curve: FrameCurve, tau0: float, window, tol: Tolerances = DEFAULT) -> SpecialNormalFrame:
    c2, sp = specially_parameterized(curve, tau0, window, tol)
    return SpecialNormalFrame(normal_frame(c2, 0.0, sp.image, tol), sp)
