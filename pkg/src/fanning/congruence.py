"""Congruence of fanning curves under GL(2n) and Sp(2n).

Parameterized congruence reduces to a simultaneous Sylvester problem on
normal-frame Schwarzians.  The unparameterized problem first puts both
curves in special parameters, aligns them by a Moebius map fitted to the
scalar invariants tr S^2 and tr S^3, and then runs the parameterized test.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from numpy.polynomial import Chebyshev
from scipy.optimize import least_squares

from . import invariants as inv
from . import mats
from .curves import FrameCurve, Mobius, ParamMap, Reparameterized
from .errors import FanningError, WindowTooWide
from .lagrangian import I_nk, is_symplectic, lagrangian_normal_frame, require_lagrangian, signature
from .mats import DEFAULT, Tolerances, symplectic_J
from .normalize import normal_frame, specially_parameterized

SYLVESTER_POINTS = 12
VERIFY_POINTS = 25
MAX_CANDIDATES = 8
# relative rms mismatch of tr S^2, tr S^3 (in units of residual_rtol) beyond which an alignment is rejected
PROFILE_MISMATCH = 1e3


@dataclass
class CongruenceResult:
    verdict: str  # congruent | not_congruent | inconclusive
    X: np.ndarray | None = None
    T: np.ndarray | None = None
    residual: float = float("nan")
    mobius: tuple | None = None
    reason: str = ""
    nullity: int | None = None
    param: ParamMap | None = field(default=None, repr=False)

    @property
    def congruent(self) -> bool:
        return self.verdict == "congruent"

    def as_dict(self) -> dict:
        out = {"verdict": self.verdict, "residual": self.residual, "reason": self.reason,
               "nullity": self.nullity,
               "X": None if self.X is None else self.X.tolist(),
               "T": None if self.T is None else self.T.tolist(),
               "mobius": None if self.mobius is None else list(self.mobius)}
        return out


def _sylvester_nullspace(SA, SB, tol: Tolerances):
    """Basis of {X : SA_i X = X SB_i for all i}, as n x n matrices."""
    n = SA[0].shape[0]
    I = np.eye(n)
    rows = []
    for a, b in zip(SA, SB):
        scale = max(1.0, mats.norm(a), mats.norm(b))
        rows.append((np.kron(I, a) - np.kron(b.T, I)) / scale)
    M = np.vstack(rows)
    _, s, Vt = np.linalg.svd(M)
    thr = 10 * tol.residual_rtol
    s_full = np.zeros(n * n)
    s_full[: len(s)] = s
    basis = [Vt[i].reshape(n, n, order="F") for i in range(n * n) if s_full[i] <= thr]
    return basis, s_full


def _candidates(basis, rng):
    d = len(basis)
    cands = list(basis[:MAX_CANDIDATES])
    extra = max(MAX_CANDIDATES - d, 2) if d > 1 else 0
    for _ in range(extra):
        c = rng.normal(size=d)
        c /= np.linalg.norm(c)
        cands.append(sum(ci * b for ci, b in zip(c, basis)))
    return cands


def _invertible(X, tol):
    s = np.linalg.svd(X, compute_uv=False)
    return s[0] > 0 and s[-1] > tol.rank_rtol * s[0]


def _verify(nfA, nfB, X, T, window, tol):
    worst = 0.0
    for t in np.linspace(window[0], window[1], VERIFY_POINTS):
        B = nfB(t)
        worst = max(worst, mats.norm(T @ nfA(t) @ X - B) / mats.norm(B))
    return worst


def _search(nfA, nfB, window, tol, seed, project=None, symplectic_k=None):
    """Shared Sylvester search over normal frames nfA, nfB."""
    tau0 = 0.5 * (window[0] + window[1])
    pts = mats.chebyshev_points(window[0], window[1], SYLVESTER_POINTS)
    SA = [nfA.schwarzian(t) for t in pts]
    SB = [nfB.schwarzian(t) for t in pts]
    basis, _ = _sylvester_nullspace(SA, SB, tol)
    if not basis:
        return CongruenceResult("not_congruent", reason="Schwarzians are not simultaneously conjugate", nullity=0)
    rng = np.random.default_rng(seed)
    A0, A1 = nfA.jets(tau0, 1)
    B0, B1 = nfB.jets(tau0, 1)
    best = None
    any_invertible = False
    for X in _candidates(basis, rng):
        if project is not None:
            X = project(X)
            if X is None:
                continue
        if not _invertible(X, tol):
            continue
        any_invertible = True
        if symplectic_k is None:
            MB = np.hstack([B0, B1])
            MA = np.hstack([A0 @ X, A1 @ X])
        else:
            Ik = I_nk(nfA.n, symplectic_k)
            MB = np.hstack([B0, B1 @ Ik])
            MA = np.hstack([A0 @ X, A1 @ X @ Ik])
        T = np.linalg.solve(MA.T, MB.T).T
        res = _verify(nfA, nfB, X, T, window, tol)
        if best is None or res < best[0]:
            best = (res, X, T)
        if res <= 10 * tol.residual_rtol:
            if symplectic_k is not None and not is_symplectic(T, 10 * tol.residual_rtol):
                continue
            return CongruenceResult("congruent", X, T, res, nullity=len(basis))
    if not any_invertible:
        return CongruenceResult("inconclusive", reason="no invertible conjugator among candidates",
                                nullity=len(basis))
    return CongruenceResult("inconclusive", best[1], best[2], best[0],
                            reason="conjugators found but witness verification failed", nullity=len(basis))


def congruent_parameterized(curveA: FrameCurve, curveB: FrameCurve, window, tol: Tolerances = DEFAULT,
                            seed: int = 0) -> CongruenceResult:
    """Is there a constant T with T span A(t) = span B(t) on the window?

    On success ``T A_n(t) X = B_n(t)`` for the normal frames A_n, B_n anchored at
    the window midpoint; ``X`` conjugates their Schwarzians.
    """
    if curveA.n != curveB.n:
        return CongruenceResult("not_congruent", reason="dimensions differ")
    window = (float(window[0]), float(window[1]))
    tau0 = 0.5 * (window[0] + window[1])
    nfA = normal_frame(curveA, tau0, window, tol)
    nfB = normal_frame(curveB, tau0, window, tol)
    return _search(nfA, nfB, window, tol, seed)


def project_indefinite_orthogonal(X0, Ik):
    """Nearest-in-spirit element of O(n-k, k): X0 (Ik X0^T Ik X0)^(-1/2)."""
    R = Ik @ X0.T @ Ik @ X0
    try:
        root = scipy.linalg.sqrtm(R)
    except (ValueError, np.linalg.LinAlgError):
        return None
    if np.iscomplexobj(root):
        if np.max(np.abs(root.imag)) > 1e-8 * max(1.0, np.max(np.abs(root.real))):
            return None
        root = root.real
    try:
        return X0 @ np.linalg.inv(root)
    except np.linalg.LinAlgError:
        return None


def congruent_symplectic(curveA: FrameCurve, curveB: FrameCurve, window, tol: Tolerances = DEFAULT,
                         seed: int = 0) -> CongruenceResult:
    """Congruence by a symplectic T; signatures must match first."""
    if curveA.n != curveB.n:
        return CongruenceResult("not_congruent", reason="dimensions differ")
    window = (float(window[0]), float(window[1]))
    tau0 = 0.5 * (window[0] + window[1])
    for c in (curveA, curveB):
        for t in (window[0], tau0, window[1]):
            require_lagrangian(c, t, tol)
    kA = signature(curveA, window, tol).k
    kB = signature(curveB, window, tol).k
    if kA != kB:
        return CongruenceResult("not_congruent", reason=f"signatures differ ({kA} vs {kB})")
    nfA = lagrangian_normal_frame(curveA, tau0, window, tol)
    nfB = lagrangian_normal_frame(curveB, tau0, window, tol)
    Ik = I_nk(curveA.n, kA)
    res = _search(nfA, nfB, window, tol, seed, project=lambda X: project_indefinite_orthogonal(X, Ik),
                  symplectic_k=kA)
    if res.congruent:
        J = symplectic_J(curveA.n)
        res.reason = f"symplectic defect {mats.norm(res.T.T @ J @ res.T - J):.3e}"
    return res


# -- unparameterized ------------------------------------------------------------


class ComposedMap(ParamMap):
    """t -> f_k(...f_1(t)) for scalar parameter maps applied left to right."""

    def __init__(self, *maps):
        self.maps = maps

    def jets(self, t, order):
        out = None
        x = t
        for m in self.maps:
            j = m.jets(x, order)
            out = j if out is None else [float(v) for v in mats.jet_compose(j, out)]
            x = j[0]
        return out


def _invariant_profile(curve, window, m=129, tol=DEFAULT):
    sig = mats.chebyshev_points(window[0], window[1], m)
    c2, c3 = [], []
    for s in sig:
        S = inv.schwarzian(curve, s, tol)
        S2 = S @ S
        c2.append(np.trace(S2))
        c3.append(np.trace(S2 @ S))
    deg = min(64, m - 1)
    return (Chebyshev.fit(sig, c2, deg, domain=window), Chebyshev.fit(sig, c3, deg, domain=window),
            np.array(c2), np.array(c3))


def _mobius_from_jet(sig0, p, lam, kappa):
    return Mobius.from_jet(sig0, p, lam, kappa)


def congruent_unparameterized(curveA: FrameCurve, curveB: FrameCurve, windowA, windowB=None,
                              tol: Tolerances = DEFAULT, seed: int = 0) -> CongruenceResult:
    """Congruence up to a change of parameter.

    ``mobius`` reports the projective map between the special parameters
    of the two curves; ``param`` maps B's parameter to A's.
    """
    if windowB is None:
        windowB = windowA
    if curveA.n != curveB.n:
        return CongruenceResult("not_congruent", reason="dimensions differ")
    wA = (float(windowA[0]), float(windowA[1]))
    wB = (float(windowB[0]), float(windowB[1]))
    cA, spA = specially_parameterized(curveA, 0.5 * sum(wA), wA, tol)
    cB, spB = specially_parameterized(curveB, 0.5 * sum(wB), wB, tol)
    IA, IB = spA.image, spB.image
    f2A, f3A, rawA2, rawA3 = _invariant_profile(cA, IA, tol=tol)
    f2B, f3B, rawB2, rawB3 = _invariant_profile(cB, IB, tol=tol)
    scaleA = max(1.0, np.max(np.abs(rawA2)))
    scaleB = max(1.0, np.max(np.abs(rawB2)))
    flatA = np.max(np.abs(rawA2)) <= 1e-6 * scaleA and np.max(np.abs(rawA3)) <= 1e-6 * scaleA ** 1.5
    flatB = np.max(np.abs(rawB2)) <= 1e-6 * scaleB and np.max(np.abs(rawB3)) <= 1e-6 * scaleB ** 1.5

    if flatA != flatB:
        return CongruenceResult("not_congruent", reason="one curve has vanishing quadratic invariant, the other not")
    candidates = []
    if flatA:
        cenA, cenB = 0.5 * sum(IA), 0.5 * sum(IB)
        ratio = min(1.0, 0.9 * (IA[1] - IA[0]) / (IB[1] - IB[0]))
        candidates.append(Mobius(ratio, cenA - ratio * cenB, 0.0, 1.0))
    else:
        candidates = _align(f2A, f3A, f2B, f3B, IA, IB, rawB2)
        if not candidates:
            return CongruenceResult("not_congruent", reason="quadratic invariants have incompatible ranges")
    last = None
    best_mismatch = np.inf
    for rho in candidates:
        if not flatA:
            rho, mismatch = _polish(rho, cA, cB, IA, IB, tol)
            best_mismatch = min(best_mismatch, mismatch)
            if mismatch > PROFILE_MISMATCH * tol.residual_rtol:
                continue
        lo, hi = _covered_subwindow(rho, spB, IA, wB)
        if lo is None:
            continue
        phi = ComposedMap(spB, rho, spA.inverse())
        try:
            Acomp = Reparameterized(curveA, phi, (lo, hi))
            res = congruent_parameterized(Acomp, curveB, (lo, hi), tol, seed)
        except (FanningError, ValueError) as exc:
            last = CongruenceResult("inconclusive", reason=f"verification failed: {exc}")
            continue
        if res.congruent:
            res.mobius = rho.coeffs
            res.param = phi
            res.reason = f"verified on [{lo!r}, {hi!r}]"
            return res
        last = res
    if last is None:
        if best_mismatch > PROFILE_MISMATCH * tol.residual_rtol and np.isfinite(best_mismatch):
            return CongruenceResult("not_congruent", residual=best_mismatch,
                                    reason="no projective change of parameter matches the invariant profiles "
                                           f"(best rms mismatch {best_mismatch:.3e})")
        return CongruenceResult("inconclusive", reason="no alignment covers the window")
    last.verdict = "inconclusive"
    last.reason = "alignment found no verified witness: " + last.reason
    return last


def _polish(rho, cA, cB, IA, IB, tol, m=24):
    """Refine rho against directly evaluated invariants; the Chebyshev profiles
    only need to be good enough to land in the right basin."""
    a, b, c, d = rho.coeffs
    sig = mats.chebyshev_points(IB[0], IB[1], 4 * m)
    with np.errstate(divide="ignore", invalid="ignore"):
        y = (a * sig + b) / (c * sig + d)
    inside = np.isfinite(y) & (y > IA[0]) & (y < IA[1])
    if inside.sum() < m:
        return rho, np.inf
    sig = np.linspace(sig[inside].min(), sig[inside].max(), m + 2)[1:-1]

    def invariants(curve, s):
        S = inv.schwarzian(curve, s, tol)
        S2 = S @ S
        return np.trace(S2), np.trace(S2 @ S)

    try:
        vB = np.array([invariants(cB, s) for s in sig])
    except FanningError:
        return rho, np.inf
    s2 = max(np.max(np.abs(vB[:, 0])), 1e-300)
    s3 = np.max(np.abs(vB[:, 1]))
    use3 = s3 > 1e-6 * s2 ** 1.5
    star = float(np.median(sig))
    y0, y1, y2 = rho.jets(star, 2)
    eps = np.sign(y1)

    def rho_of(x):
        return Mobius.from_jet(star, x[0], eps * np.exp(np.clip(x[1], -20.0, 20.0)), x[2])

    def resid(x):
        try:
            r = rho_of(x)
            out = []
            for s, (b2, b3) in zip(sig, vB):
                yv, dv = r.jets(s, 1)
                a2, a3 = invariants(cA, float(np.clip(yv, IA[0], IA[1])))
                out.append((a2 * dv ** 4 - b2) / s2)
                if use3:
                    out.append((a3 * dv ** 6 - b3) / s3)
            return np.array(out)
        except (FanningError, ValueError, FloatingPointError):
            return np.full(len(sig) * (2 if use3 else 1), 10.0)

    x0 = np.array([y0, np.log(abs(y1)), y2])
    r0 = resid(x0)
    base = float(np.sqrt(np.mean(r0 ** 2)))
    fit = least_squares(resid, x0, method="lm", xtol=1e-15, ftol=1e-15)
    err = float(np.sqrt(np.mean(fit.fun ** 2)))
    if not err < base:
        return rho, base
    try:
        return rho_of(fit.x), err
    except FanningError:
        return rho, base


def _covered_subwindow(rho, spB, IA, wB, m=201):
    """Largest interval of B's parameter whose image under rho o s_B lies in A's image."""
    ts = np.linspace(wB[0], wB[1], m)
    try:
        vals = np.array([rho(spB(t)) for t in ts])
    except FanningError:
        return None, None
    pad = 1e-9 * (IA[1] - IA[0])
    ok = (vals >= IA[0] + pad) & (vals <= IA[1] - pad) & np.isfinite(vals)
    best, cur = (0, None), None
    for i, flag in enumerate(ok):
        if flag and cur is None:
            cur = i
        if (not flag or i == m - 1) and cur is not None:
            end = i if flag else i - 1
            if end - cur > best[0]:
                best = (end - cur, (cur, end))
            cur = None
    if best[1] is None or best[0] < 0.25 * (m - 1):
        return None, None
    a, b = best[1]
    return float(ts[a]), float(ts[b])


def _align(f2A, f3A, f2B, f3B, IA, IB, rawB2, seeds_p=64, keep=4):
    """Candidate Moebius maps rho with c2_B(x) = c2_A(rho(x)) rho'(x)^4."""
    sigB = mats.chebyshev_points(IB[0], IB[1], 48)
    c2B, c3B = f2B(sigB), f3B(sigB)
    s2 = max(np.max(np.abs(c2B)), 1e-300)
    s3 = np.max(np.abs(c3B))
    use3 = s3 > 1e-6 * s2 ** 1.5
    grid = np.linspace(IB[0], IB[1], 201)
    star = grid[int(np.argmax(np.abs(f2B(grid))))]
    vB, dB = f2B(star), f2B.deriv()(star)
    d2A = f2A.deriv()
    lenA = IA[1] - IA[0]

    def rho_of(x):
        p, loglam, kappa, eps = x
        return _mobius_from_jet(star, p, eps * np.exp(np.clip(loglam, -20.0, 20.0)), kappa)

    width = 2 if use3 else 1

    def resid(x):
        try:
            with np.errstate(over="raise", invalid="raise"):
                rho = rho_of(x)
        except (FanningError, FloatingPointError):
            return np.full(width * len(sigB), 10.0)
        a, b, c, d = rho.coeffs
        den = c * sigB + d
        if np.any(np.abs(den) < 1e-12) or np.any(den * den[0] <= 0):
            return np.full(width * len(sigB), 10.0)
        y = (a * sigB + b) / den
        dy = (a * d - b * c) / den ** 2
        inside = (y >= IA[0] - 0.05 * lenA) & (y <= IA[1] + 0.05 * lenA)
        yc = np.clip(y, IA[0], IA[1])
        r2 = np.where(inside, (f2A(yc) * dy ** 4 - c2B) / s2, 1.0)
        if not use3:
            return r2
        r3 = np.where(inside, (f3A(yc) * dy ** 6 - c3B) / s3, 1.0)
        return np.column_stack([r2, r3]).ravel()

    seeds = []
    for eps in (1.0, -1.0):
        for p in np.linspace(IA[0], IA[1], seeds_p):
            vA = f2A(p)
            if vA == 0 or np.sign(vA) != np.sign(vB):
                continue
            lam = (vB / vA) ** 0.25
            kappa = (dB - d2A(p) * (eps * lam) ** 5) / (4 * vA * (eps * lam) ** 3)
            x = np.array([p, np.log(lam), kappa, eps])
            try:
                cost = float(np.sum(resid(x) ** 2))
            except (FloatingPointError, ZeroDivisionError):
                continue
            seeds.append((cost, x))
    if not seeds:
        return []
    seeds.sort(key=lambda z: z[0])
    out = []
    for cost, x in seeds[: 3 * keep]:
        eps = x[3]
        fit = least_squares(lambda y: resid(np.array([y[0], y[1], y[2], eps])), x[:3], method="lm",
                            xtol=1e-14, ftol=1e-14)
        xf = np.array([*fit.x, eps])
        try:
            rho = rho_of(xf)
        except FanningError:
            continue
        if any(np.allclose(rho.coeffs, r.coeffs, atol=1e-6) for _, r in out):
            continue
        out.append((float(np.sum(fit.fun ** 2)), rho))
    out.sort(key=lambda z: z[0])
    return [r for _, r in out[:keep]]
