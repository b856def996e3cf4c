"""Special parameterization: the oscillator against tan(t), and the residual
trace of K after reparameterizing random curves.

    python3 scripts/special_param_demo.py --curves 5
"""

import argparse

import numpy as np

from fanning import invariants as inv
from fanning.curves import Exponential
from fanning.normalize import special_parameterization, specially_parameterized
from fanning.samplers import random_polynomial

W = (-0.5, 0.5)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--curves", type=int, default=5)
    ap.add_argument("--seed", type=int, default=3)
    args = ap.parse_args(argv)
    osc = Exponential([[0, -1], [1, 0]], [[1], [0]], (-1.2, 1.2))
    sp = special_parameterization(osc, 0.0, (-1.2, 1.2))
    print("t        s(t)                tan(t)              error")
    for t in np.linspace(-1.2, 1.2, 9):
        print(f"{t:+.3f}  {sp(t):+.15f}  {np.tan(t):+.15f}  {abs(sp(t) - np.tan(t)):.1e}")
    print("\ncurve  n  max|tr K| before  max|tr K| after")
    for i in range(args.curves):
        rng = np.random.default_rng(np.random.SeedSequence([args.seed, i]))
        c = random_polynomial(1 + i % 3, rng)
        before = max(abs(np.trace(inv.jacobi(c, t))) for t in np.linspace(*W, 25))
        c2, spc = specially_parameterized(c, 0.0, W)
        after = max(abs(np.trace(inv.jacobi(c2, s))) for s in np.linspace(*spc.image, 25))
        print(f"{i:5d}  {c.n}  {before:16.3e}  {after:15.3e}")


if __name__ == "__main__":
    main()
