"""Regenerate the CLI spec corpus and golden outputs under tests/data.

    python scripts/make_golden.py          # rewrite specs and goldens
    python scripts/make_golden.py --check  # compare only, exit 1 on drift
"""

import argparse
import contextlib
import io
import json
import sys
from pathlib import Path

import numpy as np

from fanning import curvespec
from fanning.cli import main
from fanning.curves import Exponential, Mobius, Polynomial, Reparameterized, Transformed
from fanning.lagrangian import lagrange_system_frame
from fanning.samplers import random_polynomial

ROOT = Path(__file__).resolve().parents[1] / "tests" / "data"
SPECS, GOLDEN = ROOT / "specs", ROOT / "golden"


def corpus():
    rng = np.random.default_rng(2024)
    e1 = np.vstack([np.eye(2), np.zeros((2, 2))])
    e2 = np.vstack([np.zeros((2, 2)), np.eye(2)])
    poly = random_polynomial(2, rng, (-0.5, 0.5))
    T = np.eye(4) + 0.3 * rng.normal(size=(4, 4))
    X = rng.normal(size=(4, 4))
    yield "line", Polynomial([[[1], [0]], [[0], [1]]], (0, 1))
    yield "oscillator", Exponential([[0, -1], [1, 0]], [[1], [0]], (-0.5, 0.5))
    yield "oscillator_neg", Exponential([[0, 1], [-1, 0]], [[1], [0]], (-0.5, 0.5))
    yield "free_particle", lagrange_system_frame([[[1]]], [[[0]]], [[1], [0]], [[0], [1]], (-0.5, 0.5))
    yield "parabola", Polynomial([[[1], [0]], [[0], [0]], [[0], [1]]], (-1, 1))
    yield "lagrange2", lagrange_system_frame([np.eye(2), 0.2 * np.eye(2)], [np.diag([1.0, 4.0]), np.zeros((2, 2))],
                                             e1, e2, (-0.5, 0.5))
    yield "poly2", Polynomial(poly.coeffs, (-0.5, 0.5))
    yield "poly2_T", Transformed(poly, T=T, window=(-0.5, 0.5))
    m = Mobius(1.0, 0.1, 0.2, 1.0)
    yield "poly2_mobius", Reparameterized(Transformed(poly, T=T), m, (-0.3, 0.3))
    yield "expX", Exponential(0.7 * X, e1 + 0.2 * rng.normal(size=(4, 2)), (-0.5, 0.5))


CASES = [
    ("invariants_oscillator", ["invariants", "oscillator", "--samples", "5"], 0),
    ("invariants_line_csv", ["invariants", "line", "--samples", "4", "--format", "csv"], 0),
    ("invariants_parabola", ["invariants", "parabola", "--samples", "5"], 3),
    ("congruent_gl", ["congruent", "poly2", "poly2_T"], 0),
    ("congruent_negative", ["congruent", "oscillator", "free_particle"], 1),
    ("congruent_unparam", ["congruent", "poly2", "poly2_mobius", "--mode", "unparameterized"], 0),
    ("congruent_symplectic_nonlag", ["congruent", "poly2", "poly2_T", "--mode", "symplectic"], 5),
    ("congruent_symplectic_sig", ["congruent", "oscillator", "oscillator_neg", "--mode", "symplectic"], 1),
    ("classify_expX", ["classify", "expX"], 0),
    ("classify_line", ["classify", "line", "--format", "csv"], 0),
    ("lagrangian_oscillator", ["lagrangian", "oscillator"], 0),
    ("lagrangian_lagrange2", ["lagrangian", "lagrange2", "--samples", "3"], 0),
    ("normalize_poly2", ["normalize", "poly2", "--samples", "5"], 0),
    ("normalize_oscillator_csv", ["normalize", "oscillator", "--samples", "3", "--format", "csv"], 0),
    ("oracle_fuzz", ["oracle", "--seed", "42", "--trials", "100"], 0),
    ("oracle_poly2", ["oracle", "poly2", "--seed", "7", "--trials", "5", "--samples", "3"], 0),
]


def resolve(argv):
    return [str(SPECS / f"{a}.json") if (SPECS / f"{a}.json").exists() else a for a in argv]


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(resolve(argv))
    # stderr mentions absolute paths only through spec names, which we keep out of goldens
    return code, out.getvalue()


def golden_name(name, argv):
    return f"{name}.{'csv' if 'csv' in argv else 'json'}"


def main_(check=False):
    SPECS.mkdir(parents=True, exist_ok=True)
    GOLDEN.mkdir(parents=True, exist_ok=True)
    if not check:
        for name, curve in corpus():
            curvespec.dump(curve, SPECS / f"{name}.json")
    manifest, drift = [], []
    for name, argv, expected in CASES:
        code, text = run(argv)
        if code != expected:
            drift.append(f"{name}: exit {code}, expected {expected}")
        path = GOLDEN / golden_name(name, argv)
        if check:
            if path.read_text() != text:
                drift.append(f"{name}: output differs")
        else:
            path.write_text(text)
        manifest.append({"name": name, "argv": argv, "exit": expected, "golden": path.name})
    if not check:
        (GOLDEN / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    for d in drift:
        print(d, file=sys.stderr)
    return 1 if drift else 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--check", action="store_true")
    sys.exit(main_(ap.parse_args().check))
