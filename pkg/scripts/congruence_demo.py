"""Round trips through the three congruence tests with timing.

    python3 scripts/congruence_demo.py --pairs 5 --seed 1
"""

import argparse
import time

import numpy as np

from fanning.congruence import congruent_parameterized, congruent_symplectic, congruent_unparameterized
from fanning.curves import Reparameterized, Transformed
from fanning.samplers import (random_invertible, random_lagrange_system, random_mobius_near_identity,
                              random_polynomial, random_symplectic)

W = (-0.5, 0.5)


def trial(mode, rng, negative):
    if mode == "symplectic":
        A = random_lagrange_system(2, rng)
        B = random_lagrange_system(2, rng) if negative else Transformed(A, T=random_symplectic(2, rng))
        return congruent_symplectic(A, B, W)
    A = random_polynomial(2, rng)
    if mode == "parameterized":
        B = random_polynomial(2, rng) if negative else Transformed(A, T=random_invertible(4, rng))
        return congruent_parameterized(A, B, W)
    m = random_mobius_near_identity(rng, 0.2)
    wB = tuple(sorted(m.inverse()(x) for x in (-0.35, 0.35)))
    src = random_polynomial(2, rng, (-0.6, 0.6)) if negative else Transformed(A, T=random_invertible(4, rng))
    return congruent_unparameterized(A, Reparameterized(src, m, wB), W, wB)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", type=int, default=5)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)
    print(f"{'mode':16s} {'pair':>4s} {'kind':>8s} {'verdict':>14s} {'residual':>10s} {'sec':>6s}")
    for k, mode in enumerate(("parameterized", "symplectic", "unparameterized")):
        for i in range(args.pairs):
            for negative in (False, True):
                rng = np.random.default_rng(np.random.SeedSequence([args.seed, k, i, int(negative)]))
                t0 = time.perf_counter()
                r = trial(mode, rng, negative)
                print(f"{mode:16s} {i:4d} {'negative' if negative else 'positive':>8s} {r.verdict:>14s} "
                      f"{r.residual:10.2e} {time.perf_counter() - t0:6.2f}")


if __name__ == "__main__":
    main()
