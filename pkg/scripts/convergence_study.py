"""Finite-difference convergence of F', F'' against the analytic jets.

    python3 scripts/convergence_study.py --seed 0 --curves 5 --out convergence.csv
"""

import argparse
import csv
import sys

import numpy as np

from fanning.oracles import fd_fundamental_errors, observed_order
from fanning.samplers import random_exponential, random_lagrange_system, random_polynomial

MAKERS = {"polynomial": random_polynomial, "exponential": random_exponential, "lagrange": random_lagrange_system}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--curves", type=int, default=5)
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--out", default=None, help="CSV path (default: stdout)")
    args = ap.parse_args(argv)
    hs = np.logspace(-1.5, -3.5, 9)
    rows = []
    for kind, make in MAKERS.items():
        for i in range(args.curves):
            rng = np.random.default_rng(np.random.SeedSequence([args.seed, i]))
            c = make(args.n, rng)
            t = float(rng.uniform(-0.3, 0.3))
            e1, e2 = fd_fundamental_errors(c, t, hs)
            for h, a, b in zip(hs, e1, e2):
                rows.append({"kind": kind, "curve": i, "t": t, "h": h, "err_Fdot": a, "err_Fddot": b})
            print(f"{kind:12s} #{i}: order F' {observed_order(hs[:6], e1[:6]):.3f}, "
                  f"F'' {observed_order(hs[:5], e2[:5]):.3f}", file=sys.stderr)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.DictWriter(fh, fieldnames=list(rows[0]))
    w.writeheader()
    w.writerows(rows)
    if args.out:
        fh.close()


if __name__ == "__main__":
    main()
