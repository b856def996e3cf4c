"""Command-line front end.

Exit codes: 0 success / congruent, 1 not congruent, 2 bad input,
3 curve not fanning, 4 inconclusive, 5 not Lagrangian, 6 other library error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import curvespec, mats
from . import invariants as inv
from .classify import classify
from .congruence import congruent_parameterized, congruent_symplectic, congruent_unparameterized
from .curves import is_fanning
from .errors import FanningError, NotFanning, NotLagrangian, SpecError, WindowTooWide
from .lagrangian import lagrangian_property_suite, signature, wronskian
from .mats import DEFAULT, Tolerances
from .normalize import moving_frame_check, normal_frame, special_parameterization
from .oracles import ahdout_check, equivariance_fuzz, laurent_extract

EXIT_OK, EXIT_NOT_CONGRUENT, EXIT_PARSE, EXIT_NOT_FANNING, EXIT_INCONCLUSIVE, EXIT_NOT_LAGRANGIAN, EXIT_OTHER = range(7)
MAX_SPLIT_DEPTH = 4


@dataclass(frozen=True)
class RunConfig:
    command: str
    inputs: tuple
    window: tuple | None
    samples: int
    tol: Tolerances
    fmt: str
    out: str | None
    mode: str
    seed: int
    trials: int


class UsageError(Exception):
    pass


# -- serialization -----------------------------------------------------------


def _clean(x):
    """Plain Python values; matrices as nested lists, non-finite floats as null."""
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def _flatten(prefix, x, out):
    if isinstance(x, dict):
        for k, v in x.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    elif isinstance(x, list):
        for i, v in enumerate(x):
            _flatten(f"{prefix}_{i}" if prefix else str(i), v, out)
    else:
        out[prefix] = x


def _fmt_value(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render(doc: dict, fmt: str, table_key: str | None = None) -> str:
    doc = _clean(doc)
    if fmt == "json":
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if table_key is not None:
        rows = []
        for row in doc[table_key]:
            flat = {}
            _flatten("", row, flat)
            rows.append(flat)
        header = list(rows[0].keys()) if rows else []
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt_value(r.get(h)) for h in header])
    else:
        flat = {}
        _flatten("", doc, flat)
        w.writerow(["key", "value"])
        for k, v in flat.items():
            w.writerow([k, _fmt_value(v)])
    return buf.getvalue()


# -- helpers -------------------------------------------------------------------


def _parse_window(text):
    try:
        a, b = (float(x) for x in text.split(":"))
    except ValueError as exc:
        raise UsageError(f"window must look like t0:t1, got {text!r}") from exc
    if not a < b:
        raise UsageError("window must satisfy t0 < t1")
    return a, b


def _window_for(curve, cfg):
    w = cfg.window or curve.window
    if w is None:
        raise UsageError("no window given on the command line or in the curve file")
    if cfg.window is not None and curve.window is not None:
        if w[0] < curve.window[0] - 1e-12 or w[1] > curve.window[1] + 1e-12:
            raise UsageError(f"window {w} lies outside the curve file window {curve.window}")
    return w


def _precheck(curve, window, tol):
    rep = is_fanning(curve, window, 201, tol)
    if not rep.fanning:
        raise NotFanning(rep.worst_t, rep.min_sigma)


def _ts(window, samples):
    return [float(t) for t in np.linspace(window[0], window[1], samples)]


# -- commands ---------------------------------------------------------------------


def cmd_invariants(cfg):
    curve = curvespec.load(cfg.inputs[0])
    window = _window_for(curve, cfg)
    _precheck(curve, window, cfg.tol)
    rows = []
    for t in _ts(window, cfg.samples):
        sm = inv.sample(curve, t, cfg.tol)
        rows.append({"t": t, "F": sm.F, "Fdot": sm.Fdot, "Fddot": sm.Fddot, "P": sm.P, "K": sm.K,
                     "S": sm.S, "trK": sm.trK, "quartic": sm.quartic})
    doc = {"command": "invariants", "n": curve.n, "window": list(window), "rows": rows}
    return doc, "rows", EXIT_OK


_VERDICT_EXIT = {"congruent": EXIT_OK, "not_congruent": EXIT_NOT_CONGRUENT, "inconclusive": EXIT_INCONCLUSIVE}


def cmd_congruent(cfg):
    if len(cfg.inputs) != 2:
        raise UsageError("congruent needs two curve specs")
    a, b = (curvespec.load(p) for p in cfg.inputs)
    if cfg.mode == "unparameterized":
        wa, wb = _window_for(a, cfg), _window_for(b, cfg)
        _precheck(a, wa, cfg.tol)
        _precheck(b, wb, cfg.tol)
        res = congruent_unparameterized(a, b, wa, wb, cfg.tol, cfg.seed)
        windows = [list(wa), list(wb)]
    else:
        w = _window_for(a, cfg)
        _precheck(a, w, cfg.tol)
        _precheck(b, w, cfg.tol)
        fn = congruent_symplectic if cfg.mode == "symplectic" else congruent_parameterized
        res = fn(a, b, w, cfg.tol, cfg.seed)
        windows = [list(w), list(w)]
    doc = {"command": "congruent", "mode": cfg.mode, "windows": windows, **res.as_dict()}
    return doc, None, _VERDICT_EXIT[res.verdict]


def cmd_classify(cfg):
    curve = curvespec.load(cfg.inputs[0])
    window = _window_for(curve, cfg)
    _precheck(curve, window, cfg.tol)
    rep = classify(curve, window, max(cfg.samples, 9), cfg.tol)
    return {"command": "classify", "window": list(window), **rep.as_dict()}, None, EXIT_OK


def cmd_lagrangian(cfg):
    curve = curvespec.load(cfg.inputs[0])
    window = _window_for(curve, cfg)
    _precheck(curve, window, cfg.tol)
    sig = signature(curve, window, cfg.tol)
    suite = lagrangian_property_suite(curve, window, max(cfg.samples, 3), cfg.tol)
    rows = [{"t": t, "W": wronskian(curve, t, cfg.tol)} for t in _ts(window, cfg.samples)]
    doc = {"command": "lagrangian", "window": list(window), "signature": sig.k,
           "probe_eigenvalues": [list(e) for e in sig.eigenvalues], "properties": suite.as_dict(),
           "wronskian": rows}
    return doc, None, EXIT_OK


def _special_pieces(curve, window, tol, depth=0):
    """Special parameterizations on the window, splitting it where needed."""
    tau = 0.5 * (window[0] + window[1])
    try:
        return [(window, special_parameterization(curve, tau, window, tol))]
    except WindowTooWide:
        if depth >= MAX_SPLIT_DEPTH:
            raise
        left, right = (window[0], tau), (tau, window[1])
        return _special_pieces(curve, left, tol, depth + 1) + _special_pieces(curve, right, tol, depth + 1)


def cmd_normalize(cfg):
    curve = curvespec.load(cfg.inputs[0])
    window = _window_for(curve, cfg)
    _precheck(curve, window, cfg.tol)
    tau = 0.5 * (window[0] + window[1])
    nf = normal_frame(curve, tau, window, cfg.tol)
    pieces = _special_pieces(curve, window, cfg.tol)
    rows = []
    for t in _ts(window, cfg.samples):
        S = nf.schwarzian(t)
        piece = next(i for i, (w, _) in enumerate(pieces) if w[0] - 1e-12 <= t <= w[1] + 1e-12)
        sp = pieces[piece][1]
        s_val, s_dot = sp.jets(t, 1)
        rows.append({"t": t, "X": nf.gauge(t), "B": nf(t), "S": S, "trS": float(np.trace(S)),
                     "moving_frame_residual": moving_frame_check(nf, t, S),
                     "piece": piece, "s": s_val, "sdot": s_dot})
    doc = {"command": "normalize", "window": list(window), "anchor": tau,
           "pieces": [{"window": list(w), "anchor": sp.tau0} for w, sp in pieces], "rows": rows}
    return doc, "rows", EXIT_OK


def cmd_oracle(cfg):
    doc = {"command": "oracle", "seed": cfg.seed, "trials": cfg.trials}
    if cfg.inputs:
        curve = curvespec.load(cfg.inputs[0])
        window = _window_for(curve, cfg)
        _precheck(curve, window, cfg.tol)
        rng = np.random.default_rng(cfg.seed)
        rows = []
        inner = (window[0] + 0.1 * (window[1] - window[0]), window[1] - 0.1 * (window[1] - window[0]))
        for t in _ts(inner, cfg.samples):
            linf = rng.normal(size=(2 * curve.n, curve.n))
            lr = laurent_extract(curve, t, linf, 1e-3 * (window[1] - window[0]), cfg.tol)
            F = inv.fundamental(curve, t, cfg.tol)
            H = inv.horizontal_derivative(curve, t, cfg.tol)
            rows.append({"t": t,
                         "residue_rel_err": mats.rel_err(lr.residue, F),
                         "horizontal_angle": mats.subspace_distance((np.eye(2 * curve.n) + lr.constant) @ linf, H),
                         "ahdout_residual": ahdout_check(curve, t, H, 1e-3 * (window[1] - window[0]))})
        doc["curve"] = {"window": list(window), "rows": rows}
    doc["fuzz"] = equivariance_fuzz(cfg.seed, cfg.trials, tol=cfg.tol)
    return doc, None, EXIT_OK


COMMANDS = {"invariants": cmd_invariants, "congruent": cmd_congruent, "classify": cmd_classify,
            "lagrangian": cmd_lagrangian, "normalize": cmd_normalize, "oracle": cmd_oracle}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fanning", description="Invariants of fanning curves of n-planes in R^2n.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        if name == "congruent":
            sp.add_argument("specs", nargs=2, help="two curve spec JSON files")
        elif name == "oracle":
            sp.add_argument("specs", nargs="?", help="optional curve spec JSON file")
        else:
            sp.add_argument("specs", nargs=1, help="curve spec JSON file")
        sp.add_argument("--window", help="t0:t1 (write --window=-1:1 for negative starts)")
        sp.add_argument("--samples", type=int, default=5)
        sp.add_argument("--mode", choices=("parameterized", "unparameterized", "symplectic"), default="parameterized")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--trials", type=int, default=100)
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--rtol", type=float, help="override the residual tolerance")
        sp.add_argument("--out", help="output path (default: standard output)")
    return p


def make_config(args) -> RunConfig:
    if args.samples < 2:
        raise UsageError("--samples must be >= 2")
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    tol = DEFAULT
    if args.rtol is not None:
        if not args.rtol > 0:
            raise UsageError("--rtol must be positive")
        tol = tol.with_(residual_rtol=args.rtol, rank_rtol=min(tol.rank_rtol, args.rtol))
    specs = args.specs
    inputs = tuple(specs) if isinstance(specs, list) else ((specs,) if specs else ())
    return RunConfig(args.command, inputs, _parse_window(args.window) if args.window else None,
                     args.samples, tol, args.format, args.out, args.mode, args.seed, args.trials)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = make_config(args)
        doc, table, code = COMMANDS[cfg.command](cfg)
    except (UsageError, SpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NotFanning as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_FANNING
    except NotLagrangian as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_LAGRANGIAN
    except FanningError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_OTHER
    text = render(doc, cfg.fmt, table)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
