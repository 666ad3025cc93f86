import math
from fractions import Fraction

import numpy as np
import pytest

from analytic_ore.function_model import PolynomialModel, ZeroDatum
from analytic_ore.operators import (
    bound_propagator,
    closed_form_bound,
    commutator_residual_TV,
    envelope,
    evaluate_orepoly,
    factorial_domination,
    fit_envelope,
    jordan_pair,
    volterra_kernel,
    volterra_matrices,
    volterra_norms,
)
from analytic_ore.ore import OreAlgebra


def commutes(A, B, tol=1e-10):
    return np.linalg.norm(A @ B - B @ A) <= tol


def test_jordan_h_is_y_closed_form():
    rep = jordan_pair(PolynomialModel([0, 1]), ZeroDatum(0, 1), 4)
    assert rep.residual <= 1e-13 and rep.feasible
    np.testing.assert_array_equal(rep.Y, np.eye(4, k=1))
    Xc = np.diag([0.0, -1, -2, -3])
    assert np.linalg.norm(Xc @ rep.Y - rep.Y @ Xc - rep.Y) <= 1e-13
    # any two solutions differ by an element commuting with Y
    assert commutes(rep.X - Xc, rep.Y)


def test_jordan_h_is_y_squared():
    rep = jordan_pair(PolynomialModel([0, 0, 1]), ZeroDatum(0, 2), 4)
    np.testing.assert_array_equal(rep.H, np.eye(4, k=2))
    assert rep.residual <= 1e-10 and rep.feasible


@pytest.mark.parametrize("n", [2, 4, 6, 8])
def test_constant_h_obstructed(n):
    rep = jordan_pair(PolynomialModel([1]), 0, n)
    assert rep.trace_obstruction and not rep.feasible
    # distance from H = I to the traceless matrices is sqrt(n)
    assert rep.residual >= math.sqrt(n) * (1 - 1e-9)


def test_commutators_are_traceless():
    rng = np.random.default_rng(0)
    for n in (3, 5):
        rep = jordan_pair(PolynomialModel(rng.normal(size=4)), 0.3, n)
        C = rep.X @ rep.Y - rep.Y @ rep.X
        assert abs(np.trace(C)) <= 1e-12 * max(1.0, np.linalg.norm(C))


def test_jordan_rejects_tiny_dimension():
    with pytest.raises(ValueError):
        jordan_pair(PolynomialModel([0, 1]), 0, 1)


def test_evaluate_generators():
    h = PolynomialModel([0, 1, -2, 1])
    zeros = [ZeroDatum(0, 1), ZeroDatum(1, 2)]
    alg = OreAlgebra(h, zeros, 8)
    rep = jordan_pair(h, zeros[1], 5)
    np.testing.assert_allclose(evaluate_orepoly(alg.eta(alg.element_y()), rep, 1), rep.Y, atol=1e-15)
    np.testing.assert_allclose(evaluate_orepoly(alg.x(), rep, 1), rep.X, atol=1e-15)
    with pytest.raises(ValueError):
        evaluate_orepoly(alg.x(), rep, 0)


def test_evaluate_needs_enough_order():
    h = PolynomialModel([0, 0, 1])
    alg = OreAlgebra(h, [ZeroDatum(0, 2)], 3)
    rep = jordan_pair(h, ZeroDatum(0, 2), 6)
    P = alg.eta(alg.random_element(np.random.default_rng(0)))
    with pytest.raises(ValueError):
        evaluate_orepoly(P, rep, 0)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_evaluation_multiplicative(m):
    h = PolynomialModel([0] * m + [1])
    z = ZeroDatum(0, m)
    rng = np.random.default_rng(m)
    for n in (4, 6):
        rep = jordan_pair(h, z, n)
        alg = OreAlgebra(h, [z], n)
        for _ in range(10):
            P, Q = alg.random_poly(rng, 3), alg.random_poly(rng, 3)
            lhs = evaluate_orepoly(P * Q, rep, 0)
            rhs = evaluate_orepoly(P, rep, 0) @ evaluate_orepoly(Q, rep, 0)
            assert np.linalg.norm(lhs - rhs) <= 1e-8 * max(1.0, np.linalg.norm(rhs))


def test_volterra_first_norm():
    # 2/pi is the classical value; used only as a cross-check of the quadrature
    v = volterra_norms(2000, 1)[0]
    assert v.norm == pytest.approx(2 / math.pi, abs=1e-4)
    assert v.norm == pytest.approx(0.6366, abs=1e-4)


def test_volterra_arpack_matches_full_svd():
    a = volterra_norms(300, 6, method="arpack")
    b = volterra_norms(300, 6, method="full")
    for u, v in zip(a, b):
        assert u.norm == pytest.approx(v.norm, rel=1e-10)


def test_volterra_kernel_scaling():
    K = volterra_kernel(200, 5, scaled=False)
    Ks = volterra_kernel(200, 5, scaled=True)
    np.testing.assert_allclose(Ks, K * math.factorial(5), rtol=1e-12)
    x = (np.arange(200) + 0.5) / 200
    assert K[150, 20] == pytest.approx((x[150] - x[20]) ** 4 / 24, rel=1e-12)
    assert np.all(np.triu(K) == 0)


def test_volterra_submultiplicative():
    vals = {v.n: v.norm for v in volterra_norms(600, 16)}
    for m in range(1, 9):
        for n in range(1, 9):
            assert vals[m + n] <= vals[m] * vals[n] * 1.01
    for n in range(1, 16):
        assert vals[n + 1] <= vals[1] * vals[n] * 1.01


def test_volterra_grid_validation():
    with pytest.raises(ValueError):
        volterra_norms(50, 3)
    with pytest.raises(ValueError):
        commutator_residual_TV(50)


def test_tv_structure():
    T, V = volterra_matrices(300)
    C = T @ V - V @ T
    assert np.all(np.triu(C) == 0)


def test_tv_residual_sweep():
    r = [commutator_residual_TV(g) for g in (200, 400, 800)]
    assert r[0] > r[1] > r[2]
    assert r[2] <= 0.02


def test_propagator_k1_example():
    seq = bound_propagator(1, 3.5, 1.0, [2.0], 20)
    assert all(b > 0 for b in seq.bounds[:4])
    assert all(b == 0 for b in seq.bounds[4:])
    assert seq.first_vanishing() == 4


def test_propagator_denominator_example():
    # m (m + 1) (m + 2) with m = 1
    assert closed_form_bound(2, 1, 1, 1, 1, 3) == pytest.approx(1 / 6)
    assert closed_form_bound(2, Fraction(1), Fraction(1), Fraction(1), 1, 3) == Fraction(1, 6)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_propagator_matches_closed_form_exactly(k):
    C, w = Fraction(7, 3), Fraction(5, 4)
    base = [Fraction(m + 2, 3) for m in range(k)]
    seq = bound_propagator(k, C, w, base, 40)
    for n in range(1, 40):
        m = (n - 1) % (k - 1) + 1
        j = (n - m) // (k - 1)
        assert seq.bounds[n] == closed_form_bound(k, C, w, base[m], m, j)


def test_propagator_rejects_bad_input():
    with pytest.raises(ValueError):
        bound_propagator(0, 1, 1, [1])
    with pytest.raises(ValueError):
        bound_propagator(2, -1, 1, [1, 1])
    with pytest.raises(ValueError):
        bound_propagator(3, 1, 1, [1])


@pytest.mark.parametrize("k", [2, 3, 4])
def test_factorial_domination(k):
    for m in range(1, k):
        for j in range(1, 51):
            assert factorial_domination(k, m, j)


@pytest.mark.parametrize("k", [2, 3])
def test_envelope_dominates(k):
    seq = bound_propagator(k, 2.5, 1.7, [1.0] * k, 50)
    K, r = fit_envelope(seq)
    assert K > 0 and r > 0
    for n, b in enumerate(seq.bounds):
        assert b <= envelope(k, K, r, n)
