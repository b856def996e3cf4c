import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fanning import invariants as inv
from fanning import mats
from fanning.curves import Polynomial, PolyMap, Reparameterized, Transformed
from fanning.errors import NotLagrangian, NotSymplecticInitialFrame
from fanning.lagrangian import (I_nk, is_lagrangian_frame, is_symplectic, lagrange_schwarzian, lagrange_system_frame,
                                lagrangian_normal_frame, lagrangian_property_suite, signature, wronskian)
from fanning.mats import symplectic_J
from fanning.samplers import random_lagrange_system, random_polynomial, random_symplectic

from helpers import oscillator
from laws import rel

W = (-0.5, 0.5)
E1 = np.vstack([np.eye(2), np.zeros((2, 2))])
E2 = np.vstack([np.zeros((2, 2)), np.eye(2)])


def test_is_lagrangian_examples():
    assert is_lagrangian_frame(oscillator(), 0.3)
    assert is_lagrangian_frame(Polynomial([E1]), 0.0)
    assert not is_lagrangian_frame(Polynomial([np.eye(4)[:, [0, 2]]]), 0.0)


def test_wronskian_examples(rng):
    for t in (0.0, 0.4):
        assert np.allclose(wronskian(oscillator(), t), 1)
    c = random_lagrange_system(2, rng)
    X = [np.eye(2) + 0.3 * rng.normal(size=(2, 2)), 0.2 * rng.normal(size=(2, 2))]
    g = Transformed(c, X=X)
    Xt = X[0] + 0.1 * X[1]
    assert rel(wronskian(g, 0.1), Xt.T @ wronskian(c, 0.1) @ Xt) < 1e-10
    s = PolyMap([0.0, 1.0, 0.3])
    sj = s.jets(0.2, 1)
    assert rel(wronskian(Reparameterized(c, s), 0.2), wronskian(c, sj[0]) * sj[1]) < 1e-10


def test_signature_examples():
    assert signature(oscillator(), W).k == 0
    assert signature(oscillator(-1.0), W).k == 1
    c = lagrange_system_frame([np.eye(2)], [np.diag([1.0, 4.0])], E1, E2, W)
    assert signature(c, W).k == 0


def test_lagrange_system_examples():
    c = lagrange_system_frame([[[1]]], [[[1]]], [[1], [0]], [[0], [1]], W)
    assert rel(c(0.4), [[np.cos(0.4)], [np.sin(0.4)]]) < 1e-10
    assert np.allclose(wronskian(c, 0.2), 1)
    assert np.allclose(inv.schwarzian(c, 0.2), 2)
    free = lagrange_system_frame([[[1]]], [[[0]]], [[1], [0]], [[0], [1]], W)
    assert np.allclose(inv.schwarzian(free, 0.3), 0)
    two = lagrange_system_frame([np.eye(2)], [np.diag([1.0, 4.0])], E1, E2, W)
    assert np.allclose(inv.schwarzian(two, 0.3), np.diag([2.0, 8.0]))


def test_lagrange_system_rejects_non_symplectic_start():
    with pytest.raises(NotSymplecticInitialFrame):
        lagrange_system_frame([np.eye(2)], [np.eye(2)], E1, 2 * E2, W)


@given(st.integers(0, 2**31 - 1))
def test_lagrange_system_closed_forms(seed):
    rng = np.random.default_rng(seed)
    c = random_lagrange_system(2, rng)
    for t in (-0.4, 0.0, 0.3):
        assert rel(wronskian(c, t), np.linalg.inv(np.polynomial.polynomial.polyval(t, np.array(c.K)))) < 1e-8
        assert rel(inv.schwarzian(c, t), lagrange_schwarzian(c.K, c.V, t)) < 1e-7


def test_lagrangian_normal_frame(rng):
    lnf = lagrangian_normal_frame(oscillator(), 0.0, W)
    assert np.allclose(wronskian(lnf, 0.2), 1)
    lnf = lagrangian_normal_frame(oscillator(-1.0), 0.0, W)
    assert np.allclose(wronskian(lnf, 0.2), -1)
    two = lagrange_system_frame([np.eye(2)], [np.diag([1.0, 4.0])], E1, E2, W)
    assert rel(wronskian(lagrangian_normal_frame(two, 0.0, W), 0.3), np.eye(2)) < 1e-8
    c = random_lagrange_system(3, rng)
    k = signature(c, W).k
    lnf = lagrangian_normal_frame(c, 0.0, W)
    Ik = I_nk(3, k)
    for t in np.linspace(-0.5, 0.5, 5):
        assert rel(wronskian(lnf, t), Ik) < 1e-8
        B = lnf.jets(t, 1)
        assert is_symplectic(np.hstack([B[0], B[1] @ Ik]), 1e-8)


def test_indefinite_signature_case(rng):
    K = [np.diag([-1.0, 1.0])]
    c = lagrange_system_frame(K, [np.eye(2)], E1, E2 @ np.linalg.inv(K[0]), W)
    assert signature(c, W).k == 1
    lnf = lagrangian_normal_frame(c, 0.0, W)
    assert rel(wronskian(lnf, 0.1), I_nk(2, 1)) < 1e-8


def test_property_suite(rng):
    rep = lagrangian_property_suite(oscillator(), W)
    assert max(rep.horizontal_isotropy, rep.schwarzian_symmetry, rep.normal_velocity_isotropy) < 1e-14
    rep = lagrangian_property_suite(random_lagrange_system(2, rng), W)
    assert max(rep.horizontal_isotropy, rep.schwarzian_symmetry, rep.normal_velocity_isotropy,
               rep.wronskian_symmetry, rep.normal_wronskian_drift) < 1e-8
    with pytest.raises(NotLagrangian):
        lagrangian_property_suite(random_polynomial(2, rng), W)


@given(st.integers(0, 2**31 - 1))
def test_symplectic_equivariance_of_wronskian(seed):
    rng = np.random.default_rng(seed)
    c = random_lagrange_system(2, rng)
    S = random_symplectic(2, rng)
    J = symplectic_J(2)
    assert mats.norm(S.T @ J @ S - J) < 1e-10
    assert rel(wronskian(Transformed(c, T=S), 0.1), wronskian(c, 0.1)) < 1e-8
