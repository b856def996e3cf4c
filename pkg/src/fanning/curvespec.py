"""JSON (de)serialization of frame curves.

A spec is ``{"n": int, "kind": str, "payload": {...}, "window": [t0, t1]}``.
Transformed and Reparameterized payloads nest a full spec under ``"base"``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import curves
from .errors import SpecError

KINDS = ("Polynomial", "Exponential", "LagrangeSystem", "Sampled", "Transformed", "Reparameterized")


def _mat(x, name):
    a = np.asarray(x, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise SpecError(f"{name}: expected a matrix")
    if not np.all(np.isfinite(a)):
        raise SpecError(f"{name}: non-finite entries")
    return a


def _mats(xs, name):
    if not isinstance(xs, list) or not xs:
        raise SpecError(f"{name}: expected a non-empty list of matrices")
    return [_mat(x, f"{name}[{i}]") for i, x in enumerate(xs)]


def from_dict(spec: dict) -> curves.FrameCurve:
    try:
        return _from_dict(spec)
    except SpecError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"malformed curve spec: {exc}") from exc


def _from_dict(spec):
    if not isinstance(spec, dict):
        raise SpecError("curve spec must be a JSON object")
    kind = spec["kind"]
    if kind not in KINDS:
        raise SpecError(f"unknown curve kind {kind!r}")
    n = int(spec["n"])
    window = spec.get("window")
    if window is not None:
        if len(window) != 2 or not float(window[0]) < float(window[1]):
            raise SpecError("window must be [t0, t1] with t0 < t1")
        window = (float(window[0]), float(window[1]))
    pl = spec["payload"]
    if kind == "Polynomial":
        c = curves.Polynomial(_mats(pl["coeffs"], "coeffs"), window)
    elif kind == "Exponential":
        c = curves.Exponential(_mat(pl["X"], "X"), _mat(pl["A0"], "A0"), window)
    elif kind == "LagrangeSystem":
        from .lagrangian import lagrange_system_frame

        c = lagrange_system_frame(_mats(pl["K"], "K"), _mats(pl["V"], "V"),
                                  _mat(pl["frame0"], "frame0"), _mat(pl["dframe0"], "dframe0"), window)
    elif kind == "Sampled":
        c = curves.Sampled(pl["t"], pl["A"], window)
    elif kind == "Transformed":
        base = _from_dict(pl["base"])
        T = _mat(pl["T"], "T") if pl.get("T") is not None else None
        X = _mats(pl["X"], "X") if pl.get("X") is not None else None
        if T is None and X is None:
            raise SpecError("Transformed needs T and/or X")
        c = curves.Transformed(base, T=T, X=X, window=window)
    else:
        base = _from_dict(pl["base"])
        if "mobius" in pl:
            param = curves.Mobius(*[float(v) for v in pl["mobius"]])
        elif "poly" in pl:
            param = curves.PolyMap(pl["poly"])
        else:
            raise SpecError("Reparameterized needs 'mobius' or 'poly'")
        c = curves.Reparameterized(base, param, window)
    if c.n != n:
        raise SpecError(f"declared n={n} but payload has n={c.n}")
    return c


def load(path) -> curves.FrameCurve:
    try:
        spec = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read curve spec {path}: {exc}") from exc
    return from_dict(spec)


def to_dict(curve: curves.FrameCurve) -> dict:
    """Inverse of :func:`from_dict` for curves built from the public providers."""
    w = None if curve.window is None else list(curve.window)
    if isinstance(curve, curves.Polynomial):
        pl = {"coeffs": [c.tolist() for c in curve.coeffs]}
    elif isinstance(curve, curves.Exponential):
        pl = {"X": curve.X.tolist(), "A0": curve.A0.tolist()}
    elif isinstance(curve, curves.LagrangeSystem):
        pl = {"K": [c.tolist() for c in curve.K], "V": [c.tolist() for c in curve.V],
              "frame0": curve.frame0.tolist(), "dframe0": curve.dframe0.tolist()}
    elif isinstance(curve, curves.Sampled):
        pl = {"t": curve.ts.tolist(), "A": curve.frames.tolist()}
    elif isinstance(curve, curves.Transformed):
        pl = {"base": to_dict(curve.base)}
        if curve.T is not None:
            pl["T"] = curve.T.tolist()
        if curve.X is not None:
            pl["X"] = [c.tolist() for c in curve.X]
    elif isinstance(curve, curves.Reparameterized):
        pl = {"base": to_dict(curve.base)}
        if isinstance(curve.param, curves.Mobius):
            pl["mobius"] = list(curve.param.coeffs)
        elif isinstance(curve.param, curves.PolyMap):
            pl["poly"] = list(curve.param.coeffs)
        else:
            raise SpecError("parameter map has no serialized form")
    else:
        raise SpecError(f"{type(curve).__name__} has no serialized form")
    return {"n": curve.n, "kind": curve.kind, "payload": pl, "window": w}


def dump(curve: curves.FrameCurve, path) -> None:
    Path(path).write_text(json.dumps(to_dict(curve), indent=2) + "\n")
