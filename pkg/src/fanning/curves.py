"""Frame curves A(t) in R^{2n x n} exposed through their jets.

Every provider answers ``jets(t, order)`` with the list
``[A(t), A'(t), ..., A^(order)(t)]``.  Downstream code never looks at a
provider's payload.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial

import numpy as np
from scipy.interpolate import make_interp_spline

from . import mats
from .errors import (
    IntegrationFailure,
    JetOrderUnsupported,
    NonInvertibleGauge,
    NonMonotoneReparameterization,
    NotFanning,
    SingularK,
    SpecError,
)
from .mats import DEFAULT, Tolerances

# providers with exact derivatives of every order still cap requests here
UNBOUNDED_ORDER = 8
SAMPLED_MAX_ORDER = 4


@dataclass(frozen=True)
class Jet:
    t: float
    values: tuple

    @property
    def order(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, k):
        return self.values[k]

    def __len__(self):
        return len(self.values)


def poly_jets(coeffs, t: float, order: int):
    """Derivatives of ``sum_j coeffs[j] t**j`` at ``t`` (coefficients may be arrays)."""
    coeffs = [np.asarray(c, dtype=float) for c in coeffs]
    out = []
    for k in range(order + 1):
        acc = np.zeros_like(coeffs[0])
        for j in range(k, len(coeffs)):
            acc = acc + (factorial(j) // factorial(j - k)) * t ** (j - k) * coeffs[j]
        out.append(acc)
    return out


class FrameCurve:
    """Base class of all frame providers."""

    kind = "abstract"
    max_jet_order = UNBOUNDED_ORDER

    def __init__(self, n: int, window=None):
        self.n = int(n)
        self.window = None if window is None else (float(window[0]), float(window[1]))

    def _jets(self, t: float, order: int):
        raise NotImplementedError

    def jets(self, t: float, order: int):
        if order < 0:
            raise ValueError("order must be non-negative")
        if order > self.max_jet_order:
            raise JetOrderUnsupported(
                f"{self.kind} curve provides jets up to order {self.max_jet_order}, {order} requested")
        return self._jets(float(t), order)

    def eval_jet(self, t: float, order: int) -> Jet:
        return Jet(float(t), tuple(self.jets(t, order)))

    def __call__(self, t: float) -> np.ndarray:
        return self.jets(t, 0)[0]

    def __repr__(self):
        return f"<{type(self).__name__} n={self.n} window={self.window}>"


def eval_jet(curve: FrameCurve, t: float, order: int, check_fanning=False, tol: Tolerances = DEFAULT) -> Jet:
    jet = curve.eval_jet(t, order)
    if check_fanning:
        if order < 1:
            jet = curve.eval_jet(t, 1)
        s = np.linalg.svd(np.hstack([jet[0], jet[1]]), compute_uv=False)
        if s[-1] <= tol.rank_rtol * s[0]:
            raise NotFanning(t, s[-1])
    return jet


@dataclass(frozen=True)
class FanningReport:
    fanning: bool
    min_sigma: float
    worst_t: float
    worst_rel_sigma: float


def is_fanning(curve: FrameCurve, window, samples: int, tol: Tolerances = DEFAULT) -> FanningReport:
    """Sample det[A|A'] on a uniform grid; verdict plus the worst sample."""
    if samples < 2:
        raise ValueError("samples must be >= 2")
    worst = (np.inf, np.inf, None)
    for t in np.linspace(window[0], window[1], samples):
        A, Ad = curve.jets(t, 1)
        s = np.linalg.svd(np.hstack([A, Ad]), compute_uv=False)
        rel = s[-1] / s[0] if s[0] > 0 else 0.0
        if rel < worst[0]:
            worst = (rel, s[-1], float(t))
    return FanningReport(bool(worst[0] > tol.rank_rtol), float(worst[1]), worst[2], float(worst[0]))


# -- providers ---------------------------------------------------------------


class Polynomial(FrameCurve):
    kind = "Polynomial"

    def __init__(self, coeffs, window=None):
        coeffs = [mats.as_matrix(c, "coefficient") for c in coeffs]
        if not coeffs:
            raise SpecError("polynomial needs at least one coefficient")
        shape = coeffs[0].shape
        if any(c.shape != shape for c in coeffs) or shape[0] != 2 * shape[1]:
            raise SpecError(f"polynomial coefficients must all be 2n x n, got {[c.shape for c in coeffs]}")
        super().__init__(shape[1], window)
        self.coeffs = coeffs

    def _jets(self, t, order):
        return poly_jets(self.coeffs, t, order)


class Exponential(FrameCurve):
    """A(t) = exp(tX) A0."""

    kind = "Exponential"

    def __init__(self, X, A0, window=None):
        X = mats.as_matrix(X, "X")
        A0 = mats.as_matrix(A0, "A0")
        if X.shape != (A0.shape[0], A0.shape[0]) or A0.shape[0] != 2 * A0.shape[1]:
            raise SpecError("Exponential needs X 2n x 2n and A0 2n x n")
        super().__init__(A0.shape[1], window)
        self.X, self.A0 = X, A0

    def _jets(self, t, order):
        out = [mats.expm(t * self.X) @ self.A0]
        for _ in range(order):
            out.append(self.X @ out[-1])
        return out


class Sampled(FrameCurve):
    """Tabulated frames; derivatives by central differences of an interpolant.

    A quintic interpolating spline gives values between grid points; the
    derivatives use 5-point central stencils at steps h and h/2 combined by
    one Richardson level, with h half the smallest grid spacing.
    """

    kind = "Sampled"
    max_jet_order = SAMPLED_MAX_ORDER

    def __init__(self, ts, frames, window=None):
        ts = np.asarray(ts, dtype=float)
        frames = np.asarray(frames, dtype=float)
        if ts.ndim != 1 or len(ts) < 7:
            raise SpecError("sampled curve needs at least 7 parameter values")
        if np.any(np.diff(ts) <= 0):
            raise SpecError("sampled parameter grid must be strictly increasing")
        if frames.ndim != 3 or frames.shape[0] != len(ts) or frames.shape[1] != 2 * frames.shape[2]:
            raise SpecError(f"sampled frames must have shape (N, 2n, n), got {frames.shape}")
        if not np.all(np.isfinite(frames)):
            raise SpecError("sampled frames contain non-finite entries")
        super().__init__(frames.shape[2], window)
        self.ts, self.frames = ts, frames
        self.h = 0.5 * float(np.min(np.diff(ts)))
        self._spline = make_interp_spline(ts, frames, k=5, axis=0)

    @classmethod
    def from_curve(cls, curve: FrameCurve, ts, window=None):
        return cls(ts, np.array([curve(t) for t in ts]), window)

    def _stencil(self, t, h, order):
        f = self._spline(t + h * np.arange(-2, 3))
        fm2, fm1, f0, f1, f2 = f
        if order == 1:
            return (fm2 - 8 * fm1 + 8 * f1 - f2) / (12 * h), 4
        if order == 2:
            return (-fm2 + 16 * fm1 - 30 * f0 + 16 * f1 - f2) / (12 * h**2), 4
        if order == 3:
            return (-fm2 + 2 * fm1 - 2 * f1 + f2) / (2 * h**3), 2
        return (fm2 - 4 * fm1 + 6 * f0 - 4 * f1 + f2) / h**4, 2

    def _jets(self, t, order):
        if t - 2 * self.h < self.ts[0] - 1e-12 or t + 2 * self.h > self.ts[-1] + 1e-12:
            raise ValueError(f"t={t} is within 2h of the sampled grid boundary")
        out = [self._spline(t)]
        for k in range(1, order + 1):
            coarse, p = self._stencil(t, self.h, k)
            fine, _ = self._stencil(t, 0.5 * self.h, k)
            out.append((2**p * fine - coarse) / (2**p - 1))
        return out


def _rk4(f, t0, y0, h, steps):
    # times are t0 + m*(h/2) for integer m, so they repeat bit-for-bit after halving h
    half = h / 2
    ts, ys = [t0], [y0]
    t, y = t0, y0
    for i in range(steps):
        tm, t1 = t0 + (2 * i + 1) * half, t0 + (2 * i + 2) * half
        k1 = f(t, y)
        k2 = f(tm, y + half * k1)
        k3 = f(tm, y + half * k2)
        k4 = f(t1, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t1
        ts.append(t)
        ys.append(y)
    return np.array(ts), np.array(ys)


def rk4_table(f, t0, y0, t_end, tol: float, min_steps=8, max_halvings=10):
    """Fixed-step classical RK4 from t0 to t_end, halving the step until
    the estimated error of the end state drops below ``tol`` (relative)."""
    y0 = np.asarray(y0, dtype=float)
    length = t_end - t0
    if length == 0:
        return np.array([t0]), y0[None]
    steps = min_steps
    ts, ys = _rk4(f, t0, y0, length / steps, steps)
    for _ in range(max_halvings):
        ts2, ys2 = _rk4(f, t0, y0, length / (2 * steps), 2 * steps)
        scale = max(1.0, float(np.max(np.abs(ys2))))
        change = float(np.max(np.abs(ys2[::2] - ys))) / scale
        steps *= 2
        ts, ys = ts2, ys2
        if not np.all(np.isfinite(ys)):
            break
        # classical RK4 is fourth order: the finer table's error is about change / 15
        if change < 15 * tol:
            return ts, ys
    raise IntegrationFailure(f"RK4 step control could not reach tolerance {tol:g}")


def rk4_step(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + h / 2, y + h / 2 * k1)
    k3 = f(t + h / 2, y + h / 2 * k2)
    k4 = f(t + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


class LagrangeSystem(FrameCurve):
    """Frames whose rows solve d/dt(x' K(t)) + x V(t) = 0.

    The integrator only supplies the base point (A, A'); every higher
    derivative comes from differentiating the equation itself.
    """

    kind = "LagrangeSystem"

    def __init__(self, K, V, frame0, dframe0, window, tol: Tolerances = DEFAULT):
        self.K = [mats.as_matrix(c, "K coefficient") for c in K]
        self.V = [mats.as_matrix(c, "V coefficient") for c in V]
        frame0 = mats.as_matrix(frame0, "frame0")
        dframe0 = mats.as_matrix(dframe0, "dframe0")
        n = frame0.shape[1]
        if frame0.shape != (2 * n, n) or dframe0.shape != frame0.shape:
            raise SpecError("frame0 and dframe0 must be 2n x n")
        for name, cs in (("K", self.K), ("V", self.V)):
            for c in cs:
                if c.shape != (n, n):
                    raise SpecError(f"{name} coefficients must be {n} x {n}")
                if not np.allclose(c, c.T, rtol=0, atol=tol.residual_rtol * max(1.0, mats.norm(c))):
                    raise SpecError(f"{name} coefficients must be symmetric")
        if window is None:
            raise SpecError("LagrangeSystem needs a window")
        super().__init__(n, window)
        self.frame0, self.dframe0 = frame0, dframe0
        self.tol = tol
        lo, hi = min(0.0, self.window[0]), max(0.0, self.window[1])
        for t in np.linspace(lo, hi, 33):
            Kt = poly_jets(self.K, t, 0)[0]
            s = np.linalg.svd(Kt, compute_uv=False)
            if s[-1] <= tol.rank_rtol * max(s[0], 1.0):
                raise SingularK(f"K(t) is singular near t={t}")
        y0 = np.hstack([frame0, dframe0 @ poly_jets(self.K, 0.0, 0)[0]])
        self._lo, self._hi = lo, hi
        self._tables = []
        for end in (hi, lo):
            if end != 0.0:
                ts, ys = rk4_table(self._rhs, 0.0, y0, end, tol.residual_rtol * 1e-2)
                self._tables.append((ts, ys))
        self._y0 = y0

    def _rhs(self, t, Y):
        n = self.n
        Kt = poly_jets(self.K, t, 0)[0]
        Vt = poly_jets(self.V, t, 0)[0]
        A, Pi = Y[:, :n], Y[:, n:]
        return np.hstack([np.linalg.solve(Kt.T, Pi.T).T, -A @ Vt])

    def _state(self, t):
        if t < self._lo - 1e-12 or t > self._hi + 1e-12:
            raise ValueError(f"t={t} outside integration window [{self._lo}, {self._hi}]")
        if t == 0.0:
            return self._y0
        for ts, ys in self._tables:
            if (ts[-1] - 0.0) * t > 0:
                i = int(np.argmin(np.abs(ts - t)))
                return rk4_step(self._rhs, ts[i], ys[i], t - ts[i])
        raise ValueError("no table covers t")

    def _jets(self, t, order):
        n = self.n
        Y = self._state(t)
        Kj = poly_jets(self.K, t, order + 1)
        Vj = poly_jets(self.V, t, max(order - 2, 0))
        Kinv = np.linalg.inv(Kj[0])
        out = [Y[:, :n], Y[:, n:] @ Kinv]
        for m in range(order - 1):
            acc = sum(comb(m + 1, j) * out[j + 1] @ Kj[m + 1 - j] for j in range(m + 1))
            acc = acc + sum(comb(m, j) * out[j] @ Vj[m - j] for j in range(m + 1))
            out.append(-acc @ Kinv)
        return out[: order + 1]


class Transformed(FrameCurve):
    """T A(t) X(t) with constant T and polynomial X(t)."""

    kind = "Transformed"

    def __init__(self, base: FrameCurve, T=None, X=None, window=None, tol: Tolerances = DEFAULT):
        super().__init__(base.n, window if window is not None else base.window)
        self.base = base
        self.max_jet_order = base.max_jet_order
        self.T = None if T is None else mats.as_matrix(T, "T")
        self.X = None if X is None else [mats.as_matrix(c, "X coefficient") for c in X]
        if self.T is not None:
            if self.T.shape != (2 * base.n, 2 * base.n):
                raise SpecError("T must be 2n x 2n")
            s = np.linalg.svd(self.T, compute_uv=False)
            if s[-1] <= tol.rank_rtol * s[0]:
                raise NonInvertibleGauge("left transformation T is singular")
        if self.X is not None and any(c.shape != (base.n, base.n) for c in self.X):
            raise SpecError("X(t) coefficients must be n x n")
        self.tol = tol

    def _jets(self, t, order):
        out = self.base.jets(t, order)
        if self.T is not None:
            out = [self.T @ a for a in out]
        if self.X is not None:
            Xj = poly_jets(self.X, t, order)
            s = np.linalg.svd(Xj[0], compute_uv=False)
            if s[-1] <= self.tol.rank_rtol * max(s[0], np.finfo(float).tiny):
                raise NonInvertibleGauge(f"right gauge X(t) is singular at t={t}")
            out = mats.jet_mul(out, Xj)
        return out


def transform_left(curve: FrameCurve, T, tol: Tolerances = DEFAULT) -> Transformed:
    return Transformed(curve, T=T, tol=tol)


def transform_right(curve: FrameCurve, X, tol: Tolerances = DEFAULT) -> Transformed:
    """Right gauge by a polynomial X(t) given as coefficient list (or one constant matrix)."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 2:
        X = X[None]
    return Transformed(curve, X=list(X), tol=tol)


# -- parameter maps ------------------------------------------------------------


class ParamMap:
    """Scalar change of parameter t -> s(t) with derivatives."""

    def jets(self, t: float, order: int):
        raise NotImplementedError

    def __call__(self, t):
        return self.jets(t, 0)[0]


class Mobius(ParamMap):
    """s(t) = (a t + b) / (c t + d), stored with ad - bc = +-1."""

    def __init__(self, a, b, c, d):
        det = a * d - b * c
        if det == 0:
            raise NonMonotoneReparameterization("degenerate Mobius map")
        r = np.sqrt(abs(det))
        self.a, self.b, self.c, self.d = (float(v / r) for v in (a, b, c, d))
        self.det = float(np.sign(det))

    @classmethod
    def from_jet(cls, t0, s0, s1, s2):
        """The unique Mobius map with prescribed value, slope and curvature at t0."""
        beta = s2 / (2 * s1)
        # s = s0 + s1 x / (1 - beta x), x = t - t0
        return cls(s1 - beta * s0, s0 - t0 * (s1 - beta * s0), -beta, 1 + beta * t0)

    @property
    def coeffs(self):
        return (self.a, self.b, self.c, self.d)

    def inverse(self) -> "Mobius":
        return Mobius(self.d, -self.b, -self.c, self.a)

    def jets(self, t, order):
        den = self.c * t + self.d
        if den == 0:
            raise NonMonotoneReparameterization(f"Mobius map has a pole at t={t}")
        out = [(self.a * t + self.b) / den]
        for k in range(1, order + 1):
            out.append((-1) ** (k + 1) * factorial(k) * self.det * self.c ** (k - 1) / den ** (k + 1))
        return out

    def __repr__(self):
        return f"Mobius({self.a:.6g}, {self.b:.6g}, {self.c:.6g}, {self.d:.6g})"


class PolyMap(ParamMap):
    def __init__(self, coeffs):
        self.coeffs = [float(c) for c in coeffs]
        if len(self.coeffs) < 2:
            raise NonMonotoneReparameterization("constant reparameterization")

    def jets(self, t, order):
        return [float(v) for v in poly_jets(self.coeffs, t, order)]


class Reparameterized(FrameCurve):
    """A(s(t)) for a parameter map s."""

    kind = "Reparameterized"

    def __init__(self, base: FrameCurve, param: ParamMap, window=None):
        super().__init__(base.n, window)
        self.base, self.param = base, param
        self.max_jet_order = base.max_jet_order
        if self.window is not None:
            for t in np.linspace(self.window[0], self.window[1], 17):
                if param.jets(t, 1)[1] == 0:
                    raise NonMonotoneReparameterization(f"s'(t) vanishes at t={t}")
            signs = {np.sign(param.jets(t, 1)[1]) for t in np.linspace(*self.window, 17)}
            if len(signs) > 1:
                raise NonMonotoneReparameterization("s is not monotone on the window")

    def _jets(self, t, order):
        s = self.param.jets(t, order)
        if s[1] == 0 if order >= 1 else False:
            raise NonMonotoneReparameterization(f"s'(t) vanishes at t={t}")
        f = self.base.jets(s[0], order)
        return mats.jet_compose(f, s)


def reparameterize(curve: FrameCurve, s, window=None) -> Reparameterized:
    if isinstance(s, ParamMap):
        return Reparameterized(curve, s, window)
    s = tuple(s)
    if len(s) == 4:
        return Reparameterized(curve, Mobius(*s), window)
    raise TypeError("s must be a ParamMap or Mobius coefficients (a, b, c, d)")
