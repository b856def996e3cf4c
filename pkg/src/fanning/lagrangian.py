"""Curves in the Lagrangian Grassmannian.

The symplectic form is omega(v, w) = v^T J w with J = [[0, -I], [I, 0]].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import invariants as inv
from . import mats
from .curves import FrameCurve, LagrangeSystem, poly_jets
from .errors import AmbiguousSignature, NotLagrangian, NotSymplecticInitialFrame
from .mats import DEFAULT, Tolerances, symplectic_J
from .normalize import NormalFrame, normal_frame


def I_nk(n: int, k: int) -> np.ndarray:
    return np.diag([-1.0] * k + [1.0] * (n - k))


def is_lagrangian_frame(curve: FrameCurve, t: float, tol: Tolerances = DEFAULT) -> bool:
    A = curve(t)
    n = A.shape[1]
    s = np.linalg.svd(A, compute_uv=False)
    if s[0] == 0 or s[-1] <= tol.rank_rtol * s[0]:
        return False
    return mats.norm(A.T @ symplectic_J(n) @ A) <= tol.residual_rtol * s[0] ** 2


def require_lagrangian(curve: FrameCurve, t: float, tol: Tolerances = DEFAULT):
    if not is_lagrangian_frame(curve, t, tol):
        raise NotLagrangian(f"frame is not Lagrangian at t={t}")


def wronskian_from_jets(A_jets) -> np.ndarray:
    n = A_jets[0].shape[1]
    return -A_jets[0].T @ symplectic_J(n) @ A_jets[1]


def wronskian(curve: FrameCurve, t: float, tol: Tolerances = DEFAULT) -> np.ndarray:
    require_lagrangian(curve, t, tol)
    return wronskian_from_jets(curve.jets(t, 1))


@dataclass(frozen=True)
class SignatureResult:
    k: int
    probes: tuple
    eigenvalues: tuple


def signature(curve: FrameCurve, window, tol: Tolerances = DEFAULT) -> SignatureResult:
    """Index of the Wronskian, certified at the start, middle and end of the window."""
    probes = (float(window[0]), 0.5 * (window[0] + window[1]), float(window[1]))
    ks, eigs = [], []
    for t in probes:
        inv.checked_jets(curve, t, 1, tol)
        W = wronskian(curve, t, tol)
        ks.append(mats.index(W, tol))
        eigs.append(tuple(float(v) for v in mats.sym_eigen(W, tol)[0]))
    if len(set(ks)) != 1:
        raise AmbiguousSignature(f"index of the Wronskian changes across probes: {ks}")
    return SignatureResult(ks[0], probes, tuple(eigs))


def is_symplectic(M, tol: float) -> bool:
    n = M.shape[0] // 2
    J = symplectic_J(n)
    return mats.norm(M.T @ J @ M - J) <= tol * max(1.0, mats.norm(M) ** 2)


def lagrange_system_frame(K, V, frame0, dframe0, window, tol: Tolerances = DEFAULT) -> LagrangeSystem:
    """Frame whose rows solve d/dt(x' K) + x V = 0 from a symplectic start."""
    K = [np.atleast_2d(np.asarray(c, float)) for c in K]
    frame0 = np.asarray(frame0, float)
    dframe0 = np.asarray(dframe0, float)
    if frame0.ndim == 1:
        frame0, dframe0 = frame0[:, None], dframe0[:, None]
    M = np.hstack([frame0, dframe0 @ poly_jets(K, 0.0, 0)[0]])
    if M.shape[0] != M.shape[1] or not is_symplectic(M, tol.residual_rtol):
        raise NotSymplecticInitialFrame("[A(0) | A'(0) K(0)] is not symplectic")
    return LagrangeSystem(K, V, frame0, dframe0, window, tol)


def lagrange_schwarzian(K, V, t: float) -> np.ndarray:
    """Closed form 2 V K^-1 - (K' K^-1)^2 / 2 - d/dt(K' K^-1)."""
    Kj = poly_jets(K, t, 2)
    Vt = poly_jets(V, t, 0)[0]
    Kinv = np.linalg.inv(Kj[0])
    U = Kj[1] @ Kinv
    Ud = Kj[2] @ Kinv - Kj[1] @ Kinv @ Kj[1] @ Kinv
    return 2 * Vt @ Kinv - 0.5 * U @ U - Ud


def lagrangian_normal_frame(curve: FrameCurve, tau0: float, window, tol: Tolerances = DEFAULT) -> NormalFrame:
    """Normal frame with constant Wronskian I_{n,k}."""
    require_lagrangian(curve, tau0, tol)
    nf = normal_frame(curve, tau0, window, tol)
    W = wronskian_from_jets(nf.jets(tau0, 1))
    mats.index(W, tol)  # raises inside the ambiguity band
    w, U = mats.sym_eigen(W, tol)  # ascending, so negative eigenvalues come first
    Y = U / np.sqrt(np.abs(w))
    return nf.with_right_factor(Y)


@dataclass
class LagrangianReport:
    samples: int
    horizontal_isotropy: float
    schwarzian_symmetry: float
    normal_velocity_isotropy: float
    wronskian_symmetry: float
    normal_wronskian_drift: float
    signature: int

    def as_dict(self):
        return {"samples": self.samples, "signature": self.signature,
                "horizontal_isotropy": self.horizontal_isotropy,
                "schwarzian_symmetry": self.schwarzian_symmetry,
                "normal_velocity_isotropy": self.normal_velocity_isotropy,
                "wronskian_symmetry": self.wronskian_symmetry,
                "normal_wronskian_drift": self.normal_wronskian_drift}


def lagrangian_property_suite(curve: FrameCurve, window, samples: int = 9, tol: Tolerances = DEFAULT) -> LagrangianReport:
    """Max residuals of the symmetry properties special to Lagrangian curves."""
    ts = np.linspace(window[0], window[1], samples)
    for t in ts:
        require_lagrangian(curve, t, tol)
    J = symplectic_J(curve.n)
    tau0 = 0.5 * (window[0] + window[1])
    nf = normal_frame(curve, tau0, window, tol)
    W0 = wronskian_from_jets(nf.jets(tau0, 1))
    h_iso = s_sym = v_iso = w_sym = drift = 0.0
    for t in ts:
        jets = inv.checked_jets(curve, t, 3, tol)
        H = inv.horizontal_derivative_from_jets(jets)
        h_iso = max(h_iso, mats.norm(H.T @ J @ H) / mats.norm(H) ** 2)
        W = wronskian_from_jets(jets)
        w_sym = max(w_sym, mats.norm(W - W.T) / mats.norm(W))
        SW = inv.schwarzian_from_jets(jets) @ np.linalg.inv(W)
        s_sym = max(s_sym, mats.norm(SW - SW.T) / max(1.0, mats.norm(SW)))
        B = nf.jets(t, 1)
        v_iso = max(v_iso, mats.norm(B[1].T @ J @ B[1]) / mats.norm(B[1]) ** 2)
        drift = max(drift, mats.rel_err(wronskian_from_jets(B), W0))
    k = signature(curve, window, tol).k
    return LagrangianReport(samples, h_iso, s_sym, v_iso, w_sym, drift, k)
