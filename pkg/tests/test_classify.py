import numpy as np
import pytest
import scipy.linalg

from fanning import invariants as inv
from fanning import mats
from fanning.classify import (GraphFrame, classify, generator_residual, lax_fit, matrix_fractional_detect,
                              reconstruct_generator)
from fanning.curves import Exponential, Polynomial
from fanning.errors import NotWeaklyParallel
from fanning.samplers import random_exponential, random_polynomial

from helpers import line_frame, oscillator

W = (-0.5, 0.5)


def test_line_is_zero_jacobi():
    rep = classify(line_frame(), (0, 1))
    assert rep.zero_jacobi.value and rep.parallel.value and rep.weakly_parallel.value


def test_oscillator_is_parallel_not_flat():
    rep = classify(oscillator(), W)
    assert rep.parallel.value and not rep.zero_jacobi.value and rep.weakly_parallel.value


def test_exponential_is_weakly_parallel(rng):
    c = random_exponential(2, rng)
    rep = classify(c, W)
    assert rep.weakly_parallel.value
    assert not rep.parallel.value
    assert rep.generator_residual <= 1e-6


def test_generic_polynomial_is_not_weakly_parallel(rng):
    rep = classify(random_polynomial(2, rng), W)
    assert not rep.weakly_parallel.value and not rep.zero_jacobi.value


def test_lax_fit_recovers_commutator(rng):
    Y = rng.normal(size=(2, 2))
    S0 = rng.normal(size=(2, 2))
    ts = np.linspace(-0.5, 0.5, 7)
    S = [scipy.linalg.expm(-t * Y) @ S0 @ scipy.linalg.expm(t * Y) for t in ts]
    Sd = [s @ Y - Y @ s for s in S]
    Yfit, res = lax_fit(S, Sd)
    assert res < 1e-10
    assert all(mats.norm(s @ Yfit - Yfit @ s - d) < 1e-10 for s, d in zip(S, Sd))


def test_schwarzian_isospectral_for_exponential(rng):
    c = random_exponential(2, rng)
    ev0 = np.sort_complex(np.linalg.eigvals(inv.schwarzian(c, 0.0)))
    for t in (-0.4, 0.3):
        assert np.allclose(np.sort_complex(np.linalg.eigvals(inv.schwarzian(c, t))), ev0, atol=1e-7)


def test_zero_jacobi_has_constant_horizontal():
    c = line_frame((0, 1))
    h0 = inv.horizontal_derivative(c, 0.1)
    for t in (0.4, 0.9):
        assert mats.subspace_distance(inv.horizontal_derivative(c, t), h0) < 1e-12


def test_line_generator_is_nilpotent():
    X = reconstruct_generator(line_frame((0, 1)), 0.5, (0, 1))
    assert mats.norm(X @ X) <= 1e-8
    assert generator_residual(line_frame((0, 1)), X, 0.5, (0, 1)) < 1e-8


def test_generator_reproduces_exponential(rng):
    c = random_exponential(2, rng)
    X = reconstruct_generator(c, 0.0, W)
    for t in np.linspace(-0.5, 0.5, 5):
        assert mats.subspace_distance(scipy.linalg.expm(t * X) @ c(0.0), c(t)) < 1e-6


def test_reconstruct_rejects_generic(rng):
    with pytest.raises(NotWeaklyParallel):
        reconstruct_generator(random_polynomial(2, rng), 0.0, W)


def test_matrix_fractional_example():
    # t/(1+t) = (0 + 1 t)(1 + 1 t)^-1
    fl = matrix_fractional_detect([[[0.0]], [[1.0]], [[-1.0]], [[1.0]], [[-1.0]], [[1.0]], [[-1.0]], [[1.0]]],
                                  (-0.1, 0.1))
    assert fl is None  # a truncated series is not fractional linear
    g = lambda t, o: [t / (1 + t), 1 / (1 + t) ** 2, -2 / (1 + t) ** 3, 6 / (1 + t) ** 4, -24 / (1 + t) ** 5][:o + 1]
    fl = matrix_fractional_detect(g, (-0.5, 0.5))
    assert fl is not None
    assert np.allclose([x.item() for x in fl.as_tuple()], [1, 1, 0, 1], atol=1e-8)
    assert abs(fl(0.3).item() - 0.3 / 1.3) < 1e-10


def test_matrix_fractional_matrix_case(rng):
    A, B, C, D = (rng.normal(size=(2, 2)) for _ in range(4))
    A = np.eye(2) * 3 + A
    def g(t, o):
        # derivatives of M = (C + tD)(A + tB)^-1 via the Schwarzian-free recursion
        Rinv = np.linalg.inv(A + t * B)
        M = (C + t * D) @ Rinv
        out = [M]
        base = (D - M @ B) @ Rinv
        out.append(base)
        fact = 1.0
        for k in range(2, o + 1):
            fact *= -k
            out.append(-k * out[-1] @ B @ Rinv)
        return out[:o + 1]
    fl = matrix_fractional_detect(g, (-0.3, 0.3))
    assert fl is not None
    for t in (-0.2, 0.1):
        assert mats.norm(fl(t) - g(t, 0)[0]) < 1e-8
