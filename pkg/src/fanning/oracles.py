"""Independent cross-checks for the invariant engine.

* the nilpotent operator N(l0; linf, l) and the Laurent expansion of
  (t - tau) N(l(tau); linf, l(t)), whose residue is F and whose constant
  term carries linf onto the horizontal subspace;
* the second-derivative characterization of the horizontal subspace;
* finite-difference convergence of the analytic jets of F;
* randomized equivariance and axiom fuzzing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import invariants as inv
from . import mats
from .curves import FrameCurve, Polynomial, Transformed
from .errors import NotTransversal
from .mats import DEFAULT, Tolerances
from .samplers import random_invertible, random_polynomial

TRANSVERSAL_RTOL = 1e-8


def _require_transversal(U, V, what):
    s = np.linalg.svd(np.hstack([mats.orth(U), mats.orth(V)]), compute_uv=False)
    if s[-1] <= TRANSVERSAL_RTOL * s[0]:
        raise NotTransversal(f"{what} are not transversal (sigma_min = {s[-1]:.3e})")


@dataclass(frozen=True)
class NilpotentTriple:
    N: np.ndarray
    l0: np.ndarray
    linf: np.ndarray
    l: np.ndarray

    def residuals(self) -> dict:
        N, l0 = self.N, self.l0
        scale = max(1.0, mats.norm(N))
        Q = mats.orth(l0)
        image = N @ np.eye(N.shape[0])
        range_leak = mats.norm(image - Q @ (Q.T @ image)) / scale
        return {"kernel": mats.norm(N @ l0) / (scale * mats.norm(l0)),
                "range": range_leak,
                "square": mats.norm(N @ N) / scale ** 2,
                "graph": mats.subspace_distance((np.eye(N.shape[0]) + N) @ self.linf, self.l)}


def nilpotent_op(l0, linf, l) -> NilpotentTriple:
    """The operator killing l0, with range in l0, carrying linf onto l."""
    l0, linf, l = (mats.as_matrix(x) for x in (l0, linf, l))
    _require_transversal(l0, linf, "l0 and linf")
    _require_transversal(l0, l, "l0 and l")
    M = np.hstack([linf, l0])
    n = l0.shape[1]
    C = np.linalg.solve(M, l)
    C1, C2 = C[:n], C[n:]
    N = np.hstack([l0 @ C2 @ np.linalg.inv(C1), np.zeros_like(l0)]) @ np.linalg.inv(M)
    return NilpotentTriple(N, l0, linf, l)


@dataclass(frozen=True)
class LaurentResult:
    residue: np.ndarray
    constant: np.ndarray
    h: float
    richardson_change: float


def laurent_extract(curve: FrameCurve, tau: float, linf, h_base: float | None = None,
                    tol: Tolerances = DEFAULT) -> LaurentResult:
    """Residue N_{-1} and constant term N_0 of the Laurent expansion at tau."""
    inv.checked_jets(curve, tau, 1, tol)
    if h_base is None:
        w = curve.window
        h_base = 1e-3 * ((w[1] - w[0]) if w else 1.0)
    l0 = curve(tau)
    _require_transversal(l0, linf, "l(tau) and linf")

    def g(t):
        return (t - tau) * nilpotent_op(l0, linf, curve(t)).N

    def estimates(h):
        gp, gm = g(tau + h), g(tau - h)
        return 0.5 * (gp + gm), (gp - gm) / (2 * h)

    r1, c1 = estimates(h_base)
    r2, c2 = estimates(0.5 * h_base)
    residue = (4 * r2 - r1) / 3
    constant = (4 * c2 - c1) / 3
    return LaurentResult(residue, constant, h_base, mats.norm(r2 - r1) / max(1.0, mats.norm(r2)))


def ahdout_check(curve: FrameCurve, tau: float, candidate_h, h: float | None = None) -> float:
    """Relative size of the second derivative at tau of the graph map phi(t):
    l(tau) -> candidate_h whose graph is l(t).  Vanishes exactly for the
    horizontal subspace."""
    L0 = curve(tau)
    Hc = mats.as_matrix(candidate_h)
    _require_transversal(L0, Hc, "l(tau) and the candidate")
    n = L0.shape[1]
    M = np.hstack([L0, Hc])
    if h is None:
        w = curve.window
        h = 1e-3 * ((w[1] - w[0]) if w else 1.0)

    def phi(t):
        D = np.linalg.solve(M, curve(t))
        return D[n:] @ np.linalg.inv(D[:n])

    f = [phi(tau + k * h) for k in (-2, -1, 0, 1, 2)]
    d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
    d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
    return mats.norm(d2) / max(mats.norm(d1), np.finfo(float).tiny)


def fd_fundamental_errors(curve: FrameCurve, t: float, hs, tol: Tolerances = DEFAULT):
    """Errors of central differences of F against the analytic F', F''."""
    _, Fd, Fdd = inv.fundamental_jets(curve, t, tol)
    F0 = inv.fundamental(curve, t, tol)
    e1, e2 = [], []
    for h in hs:
        Fp, Fm = inv.fundamental(curve, t + h, tol), inv.fundamental(curve, t - h, tol)
        e1.append(mats.norm((Fp - Fm) / (2 * h) - Fd))
        e2.append(mats.norm((Fp - 2 * F0 + Fm) / h ** 2 - Fdd))
    return np.array(e1), np.array(e2)


def observed_order(hs, errs) -> float:
    """Slope of log(err) against log(h) by least squares."""
    return float(np.polyfit(np.log(hs), np.log(errs), 1)[0])


# -- fuzzing -------------------------------------------------------------------


def _rel(X, Y):
    return mats.norm(X - Y) / max(1.0, mats.norm(Y))


def equivariance_fuzz(seed: int, trials: int, n: int = 2, tol: Tolerances = DEFAULT) -> dict:
    """Randomized checks that F and h behave as the geometry demands.

    Each trial draws its own generator from SeedSequence([seed, trial]), so
    the report does not depend on evaluation order.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    keys = ("F_equivariance", "affine_map_equivariance", "Fdot_equivariance", "Fddot_equivariance",
            "gauge_invariance", "h_two_jet", "h_equivariance", "h_line_constant")
    worst = {k: 0.0 for k in keys}
    transversality = np.inf
    window = (-0.5, 0.5)
    for i in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence([seed, i]))
        c = random_polynomial(n, rng, window)
        T = random_invertible(2 * n, rng)
        Tinv = np.linalg.inv(T)
        a, b = rng.normal(size=2)
        tau = float(rng.uniform(-0.4, 0.4))
        Tc = Transformed(c, T=T)
        F, Fd, Fdd = inv.fundamental_jets(c, tau, tol)
        G, Gd, Gdd = inv.fundamental_jets(Tc, tau, tol)
        worst["F_equivariance"] = max(worst["F_equivariance"], _rel(G, T @ F @ Tinv))
        I = np.eye(2 * n)
        worst["affine_map_equivariance"] = max(worst["affine_map_equivariance"],
                                               _rel(a * I + b * G, T @ (a * I + b * F) @ Tinv))
        worst["Fdot_equivariance"] = max(worst["Fdot_equivariance"], _rel(Gd, T @ Fd @ Tinv))
        worst["Fddot_equivariance"] = max(worst["Fddot_equivariance"], _rel(Gdd, T @ Fdd @ Tinv))
        # polynomial right gauge, invertible near tau
        X = [random_invertible(n, rng), 0.2 * rng.normal(size=(n, n))]
        X[0] = X[0] - tau * X[1]
        gc = Transformed(c, X=X)
        gF, gFd, gFdd = inv.fundamental_jets(gc, tau, tol)
        worst["gauge_invariance"] = max(worst["gauge_invariance"], _rel(gF, F), _rel(gFd, Fd), _rel(gFdd, Fdd))

        h = inv.horizontal_derivative(c, tau, tol)
        s = np.linalg.svd(np.hstack([mats.orth(c(tau)), mats.orth(h)]), compute_uv=False)
        transversality = min(transversality, float(s[-1]))
        # same two-jet at tau: add (t - tau)^3 E
        E = rng.normal(size=(2 * n, n))
        coeffs = list(c.coeffs) + [np.zeros((2 * n, n))] * max(0, 4 - len(c.coeffs))
        for k, w in enumerate((-tau ** 3, 3 * tau ** 2, -3 * tau, 1.0)):
            coeffs[k] = coeffs[k] + w * E
        pert = Polynomial(coeffs)
        worst["h_two_jet"] = max(worst["h_two_jet"],
                                 mats.subspace_distance(inv.horizontal_derivative(pert, tau, tol), h))
        worst["h_equivariance"] = max(worst["h_equivariance"],
                                      mats.subspace_distance(inv.horizontal_derivative(Tc, tau, tol), T @ h))
        line = Polynomial(c.coeffs[:2])
        t1, t2 = rng.uniform(-0.4, 0.4, size=2)
        worst["h_line_constant"] = max(worst["h_line_constant"],
                                       mats.subspace_distance(inv.horizontal_derivative(line, t1, tol),
                                                              inv.horizontal_derivative(line, t2, tol)))
    return {"seed": seed, "trials": trials, "n": n,
            "residuals": worst, "max_residual": max(worst.values()),
            "transversality_min_sigma": transversality}


def fuzz_report_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2)
