"""Acceptance suite: eight end-to-end criteria at their stated tolerances.

Each test records one PASS/FAIL line; ``conftest.py`` prints them after the
run.  ``python3 tests/test_acceptance.py`` runs the suite without pytest.
"""

import math
import time

import numpy as np
import pytest

from analytic_ore.derivation import certify_stability, delta0_apply
from analytic_ore.function_model import PolynomialModel, ZeroDatum, find_zeros
from analytic_ore.operators import (
    bound_propagator,
    commutator_residual_TV,
    envelope,
    evaluate_orepoly,
    fit_envelope,
    jordan_pair,
    volterra_norms,
)
from analytic_ore.ore import OreAlgebra, intertwining_residual, kothe_diagonal_embed, verify_main_relation
from analytic_ore.series import Formal, Power, deviation, mul, random_series, seminorm

RESULTS: list[str] = []

H_CASES = {
    "y": [0, 1],
    "y^2": [0, 0, 1],
    "y^3": [0, 0, 0, 1],
    "y^4": [0, 0, 0, 0, 1],
    "z(z-1)^2": [0, 1, -2, 1],
    "z(z-1)(z+1)^2": [0, -1, -1, 1, 1],
}


def record(number: int, title: str, ok: bool, detail: str):
    line = f"[{'PASS' if ok else 'FAIL'}] {number} {title}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def h_models():
    for name, coeffs in H_CASES.items():
        h = PolynomialModel(coeffs)
        yield name, h, find_zeros(h)


def test_1_main_relation():
    t0 = time.perf_counter()
    worst, ok = 0.0, True
    for name, h, zeros in h_models():
        rep = verify_main_relation(h, zeros, N=32, x_degree=4, tol=1e-12)
        worst = max(worst, rep["deviation"])
        ok = ok and rep["ok"] and rep["order_compared"] >= 32
    elapsed = time.perf_counter() - t0
    record(1, "main relation [x,y]=h(y)", ok and worst <= 1e-12 and elapsed < 10,
           f"max deviation {worst:.2e} (tol 1e-12), {elapsed:.2f}s (limit 10s)")


def test_2_intertwining():
    rng = np.random.default_rng(20)
    worst, count = 0.0, 0
    for name, h, zeros in h_models():
        for _ in range(100):
            deg = int(rng.integers(0, 11))
            f = PolynomialModel(random_series(rng, deg).coeffs)
            worst = max(worst, intertwining_residual(h, zeros, f, 32))
            count += 1
    record(2, "intertwining mu delta0 = delta mu", worst <= 1e-10,
           f"{count} polynomials, max residual {worst:.2e} (tol 1e-10)")


def test_3_stability_domination():
    t0 = time.perf_counter()
    violations, worst_ratio, n = 0, 0.0, 0
    for k in (1, 2, 3):
        h = PolynomialModel([0] * (k + 1) + [1])
        z = ZeroDatum(0, k + 1)
        for r in (0.5, 1.0, 2.0, 4.0):
            for s in dict.fromkeys((1 / k, 1 / k + 0.5, 1.0)):
                cert = certify_stability(h, z, r, s, trials=200, rng=[k, n])
                n += 1
                violations += not cert.dominated
                worst_ratio = max(worst_ratio, cert.C_empirical / cert.C_analytic)
    elapsed = time.perf_counter() - t0
    record(3, "stability domination", violations == 0 and elapsed < 30,
           f"{n} certificates, {violations} violations, worst empirical/analytic {worst_ratio:.3f}, "
           f"{elapsed:.2f}s (limit 30s)")


def test_4_volterra_limit():
    t0 = time.perf_counter()
    rows = {v.n: v.n_factorial_scaled for v in volterra_norms(2000, 40)}
    band = [rows[n] for n in range(20, 41)]
    flat = [rows[n] for n in range(25, 41)]
    in_band = all(0.40 <= v <= 0.60 for v in band)
    variation = (max(flat) - min(flat)) / min(flat)
    res = [commutator_residual_TV(g) for g in (200, 400, 800)]
    monotone = res[0] > res[1] > res[2]
    elapsed = time.perf_counter() - t0
    record(4, "Volterra n!||V^n|| -> 1/2",
           in_band and variation <= 0.05 and monotone and elapsed < 300,
           f"n=20..40 in [{min(band):.4f}, {max(band):.4f}], variation(25..40) {variation:.2%}, "
           f"[T,V]-V^2 residuals {', '.join(f'{r:.2e}' for r in res)}, {elapsed:.1f}s (limit 300s)")


def test_5_matrix_universality():
    rng = np.random.default_rng(5)
    worst_res, worst_hom, ok = 0.0, 0.0, True
    for m in (1, 2, 3):
        h = PolynomialModel([0] * m + [1])
        z = ZeroDatum(0, m)
        for n in (4, 6, 8):
            rep = jordan_pair(h, z, n)
            worst_res = max(worst_res, rep.residual)
            ok = ok and rep.feasible and rep.residual <= 1e-10
            alg = OreAlgebra(h, [z], n)
            for _ in range(50):
                P, Q = alg.random_poly(rng, 3), alg.random_poly(rng, 3)
                lhs = evaluate_orepoly(P * Q, rep, 0)
                rhs = evaluate_orepoly(P, rep, 0) @ evaluate_orepoly(Q, rep, 0)
                worst_hom = max(worst_hom, float(np.linalg.norm(lhs - rhs) / max(1.0, np.linalg.norm(rhs))))
    obstructed = all(jordan_pair(PolynomialModel([1]), 0, n).trace_obstruction for n in (2, 3, 4, 6, 8))
    record(5, "matrix universality", ok and worst_hom <= 1e-8 and obstructed,
           f"max residual {worst_res:.2e} (tol 1e-10), max homomorphism defect {worst_hom:.2e} (tol 1e-8), "
           f"h=1 obstructed in every dimension: {obstructed}")


def test_6_norm_decay():
    rng = np.random.default_rng(6)
    k1_ok = True
    for _ in range(20):
        C, w = rng.uniform(0.1, 6), rng.uniform(0.1, 4)
        seq = bound_propagator(1, C, w, [rng.uniform(0.5, 2)], 50)
        cut = math.ceil(C * w)
        k1_ok = k1_ok and all(b == 0 for b in seq.bounds[cut + 1:]) and seq.bounds[0] > 0
    env_ok, fits = True, []
    for k in (2, 3):
        for _ in range(5):
            C, w = rng.uniform(0.5, 4), rng.uniform(0.5, 3)
            seq = bound_propagator(k, C, w, list(rng.uniform(0.5, 2, k)), 50)
            K, r = fit_envelope(seq)
            env_ok = env_ok and all(b <= envelope(k, K, r, n) for n, b in enumerate(seq.bounds))
            fits.append(f"k={k}:K={K:.3g},r={r:.3g}")
    record(6, "norm-decay propagator", k1_ok and env_ok,
           f"k=1 zero beyond ceil(C|w|) on 20 pairs: {k1_ok}; envelopes dominate all 50 terms: {env_ok} "
           f"(first fits {fits[0]}, {fits[5]})")


def test_7_kothe():
    rng = np.random.default_rng(7)
    worst = 0.0
    grid = [(s, t, r, q) for s in (0.25, 0.5, 1.0) for t in (1 / 3, 1.0, 2.0)
            for r in (0.5, 2.0) for q in (1.0, 3.0)]
    for _ in range(100):
        a = random_series(rng, int(rng.integers(0, 60)))
        for s, t, r, q in grid:
            c, d = kothe_diagonal_embed(a, s, t, r, q)
            worst = max(worst, abs(c - d) / c)
    record(7, "Kothe diagonal isometry", worst <= 1e-12,
           f"100 series x {len(grid)} parameter sets, max relative gap {worst:.2e} (tol 1e-12)")


def test_8_properties():
    rng = np.random.default_rng(8)
    sub_fail = 0
    params = [Power(r, s) for r in (0.5, 1.0, 3.0) for s in (0.0, 1 / 3, 0.5, 1.0, 2.0)] + \
             [Formal(m) for m in (0, 3, 10, 40)]
    for _ in range(500):
        a = random_series(rng, int(rng.integers(0, 20)))
        b = random_series(rng, int(rng.integers(0, 20)))
        p = mul(a, b)
        for q in params:
            if seminorm(p, q) > seminorm(a, q) * seminorm(b, q) * (1 + 1e-12):
                sub_fail += 1
    leib_fail = 0
    hs = [(PolynomialModel(c), z.lam) for c in H_CASES.values() for z in find_zeros(PolynomialModel(c))]
    for i in range(200):
        h, lam = hs[i % len(hs)]
        a = random_series(rng, 24, center=lam, polynomial=False)
        b = random_series(rng, 24, center=lam, polynomial=False)
        lhs = delta0_apply(h, mul(a, b), 20)
        rhs = mul(a, delta0_apply(h, b, 20), order=20) + mul(delta0_apply(h, a, 20), b, order=20)
        if deviation(lhs, rhs, through=20)[0] > 1e-12 * max(1.0, np.abs(lhs.coeffs).max()):
            leib_fail += 1
    assoc_fail = 0
    algebras = [OreAlgebra(h, zs, 12) for _, h, zs in h_models()]
    for i in range(100):
        alg = algebras[i % len(algebras)]
        P, Q, R = (alg.random_poly(rng, int(rng.integers(0, 3))) for _ in range(3))
        left, right = (P * Q) * R, P * (Q * R)
        scale = max(1.0, max(float(np.abs(s.coeffs).max()) for c in left.coeffs for s in c))
        if left.deviation(right)[0] > 1e-10 * scale:
            assoc_fail += 1
    record(8, "property suites", sub_fail == leib_fail == assoc_fail == 0,
           f"submultiplicativity failures {sub_fail}/500 pairs x {len(params)} seminorms (rel 1e-12), "
           f"Leibniz {leib_fail}/200 (rel 1e-12), associativity {assoc_fail}/100 (rel 1e-10)")


if __name__ == "__main__":
    import sys

    failed = 0
    for name, fn in sorted((n, f) for n, f in globals().items() if n.startswith("test_")):
        try:
            fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
