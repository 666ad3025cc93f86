"""The derivation ``delta_0(f) = h f'`` and its stability constants.

At a zero ``lam`` of order ``k`` the derivation acts on the local variable
``y = z - lam`` as ``h(lam + y) d/dy`` and raises valuations by ``k - 1``.
For ``k >= 2`` the seminorms ``||.||_{r,s}`` with ``s >= 1/(k-1)`` are
stable with constant ``C_r M r**(k-1) / R**k`` where ``C_r = sum r**m/m!**s``
and ``M, R`` are Cauchy bounds of ``h`` at ``lam``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from .algebra_element import AlgebraElement, fit_order
from .function_model import (
    CoefficientOracle,
    FunctionModel,
    PolynomialModel,
    ZeroDatum,
    cauchy_bounds,
    local_expansion,
    taylor_at,
)
from .series import (
    Formal,
    Power,
    SeminormParams,
    TruncatedSeries,
    differentiate,
    mul,
    random_series,
    seminorm,
)

__all__ = [
    "StabilityCertificate",
    "delta0_apply",
    "delta0_model",
    "deltaj_apply",
    "delta_apply",
    "power_sum",
    "stability_bound_analytic",
    "stability_empirical",
    "formal_stability_constant",
    "certify_stability",
]

# Relative slack added to certified sums to absorb rounding.
_ROUNDING_SLACK = 1e-12


def delta0_apply(h: FunctionModel, f: TruncatedSeries, N: int | None = None) -> TruncatedSeries:
    """``h f'`` as a series at ``f.center``.

    With polynomial ``h`` and ``f`` the product is exact and complete.
    Otherwise the result is truncated at ``N`` (default: the order through
    which ``f'`` is known).
    """
    df = differentiate(f)
    if N is None:
        if isinstance(h, PolynomialModel) and f.polynomial:
            return mul(taylor_at(h, f.center, max(h.degree, 0)), df)
        N = df.order
    return mul(taylor_at(h, f.center, N), df, order=N)


def delta0_model(h: FunctionModel, f: FunctionModel) -> FunctionModel:
    """The function ``h f'`` as a model of the same kind."""
    if isinstance(h, PolynomialModel) and isinstance(f, PolynomialModel):
        return h * f.derivative()

    def rule(center, order):
        hf = taylor_at(h, center, order)
        df = differentiate(taylor_at(f, center, order + 1))
        return mul(hf, df, order=order).coeffs

    return CoefficientOracle(rule, lambda c: min(h.radius(c), f.radius(c)))


@lru_cache(maxsize=512)
def _local_h(h: FunctionModel, z: ZeroDatum, order: int) -> TruncatedSeries:
    t = local_expansion(h, z, order)
    return TruncatedSeries(t.coeffs, 0.0, t.polynomial)


def deltaj_apply(h: FunctionModel, z: ZeroDatum, a: TruncatedSeries,
                 order: int | None = None) -> TruncatedSeries:
    """``h(y + lam) da/dy`` for a series ``a`` in the local variable ``y``.

    The Taylor model of ``h`` at ``lam`` has its first ``k`` coefficients set
    to exactly zero, so the output is exact through ``N_a - 1 + k``.
    """
    if a.center != 0:
        raise ValueError("deltaj_apply expects a series in y_j centered at 0")
    da = differentiate(a)
    k = z.order
    natural = a.order - 1 + k
    if isinstance(h, PolynomialModel) and a.polynomial:
        hloc = _local_h(h, z, max(h.degree, k))
        out = mul(hloc, da)
        return out if order is None else fit_order(out, order)
    if order is None:
        order = natural
    hloc = _local_h(h, z, max(order, k))
    return mul(hloc, da, order=order)


def delta_apply(h: FunctionModel, zeros: list[ZeroDatum], a: AlgebraElement,
                order: int | None = None) -> AlgebraElement:
    """Componentwise product derivation on the product algebra."""
    if len(a) != len(zeros):
        raise ValueError(f"{len(a)} components for {len(zeros)} zeros")
    return AlgebraElement([deltaj_apply(h, z, c, order) for z, c in zip(zeros, a)])


def power_sum(r: float, s: float, rel_cut: float = 1e-16) -> float:
    """Certified upper bound for ``C_r = sum_{m>=0} r**m / m!**s`` (``s > 0``).

    Terms are summed until the next one drops below ``rel_cut`` times the
    partial sum while the term ratio ``r/(m+1)**s`` is below one; the rest is
    bounded by a geometric series with the (decreasing) ratio at the cutoff.
    """
    if not r > 0 or not s > 0:
        raise ValueError("power_sum needs r > 0 and s > 0")
    log_r = math.log(r)
    total = 0.0
    m = 0
    while True:
        term = math.exp(m * log_r - s * math.lgamma(m + 1))
        total += term
        nxt = term * r / (m + 1) ** s
        q = r / (m + 2) ** s
        if q < 1 and nxt <= rel_cut * total:
            return (total + nxt / (1 - q)) * (1 + _ROUNDING_SLACK)
        m += 1
        if m > 10_000_000:
            raise OverflowError(f"C_r summation for r={r}, s={s} did not terminate")


def _s_admissible(z: ZeroDatum, s: float) -> bool:
    return s >= (1 - 1e-12) / (z.order - 1)


def stability_bound_analytic(z: ZeroDatum, r: float, s: float, M: float, R: float) -> float:
    """``C_r * M * r**(k-1) / R**k``, the certified stability constant."""
    if z.order < 2:
        raise ValueError("analytic bound needs a zero of order k >= 2")
    if not _s_admissible(z, s):
        raise ValueError(f"s={s} < 1/(k-1)={1 / (z.order - 1)}: no stability bound available")
    k = z.order
    return power_sum(r, s) * M * r ** (k - 1) / R ** k


def _ratio(h, z, f, p) -> float | None:
    den = seminorm(f, p)
    if den == 0:
        return None
    return seminorm(deltaj_apply(h, z, f), p) / den


def stability_empirical(h: FunctionModel, z: ZeroDatum, p: SeminormParams, N: int = 64,
                        trials: int = 200, rng: np.random.Generator | int | None = 0,
                        basis: bool = False) -> float:
    """Largest observed ``||delta f|| / ||f||`` over random polynomials of degree ``<= N``.

    With ``basis=True`` the monomials ``y**n`` (``n <= N``) are tried too;
    for these weighted l1 seminorms the column maximum is the exact norm of
    the truncated operator.  Either way the value bounds the true constant
    from below.
    """
    rng = np.random.default_rng(rng)
    best = 0.0
    for _ in range(trials):
        ratio = _ratio(h, z, random_series(rng, N), p)
        if ratio is not None:
            best = max(best, ratio)
    if basis:
        top = N if isinstance(p, Power) else min(N, p.m)
        for n in range(top + 1):
            ratio = _ratio(h, z, TruncatedSeries.monomial(n, n), p)
            if ratio is not None:
                best = max(best, ratio)
    return best


def formal_stability_constant(h: FunctionModel, z: ZeroDatum, m: int) -> float:
    """Norm of ``delta`` restricted to the first ``m+1`` coefficients, for ``||.||_{m,inf}``.

    Output coefficients through ``m`` depend only on input coefficients
    through ``m``; the induced l1 bound is the largest column sum.
    """
    cols = []
    for q in range(m + 1):
        d = deltaj_apply(h, z, TruncatedSeries.monomial(q, q), order=None)
        c = np.zeros(m + 1, dtype=complex)
        top = min(m, d.order)
        c[: top + 1] = d.coeffs[: top + 1]
        cols.append(np.abs(c).sum())
    return float(max(cols))


@dataclass(frozen=True)
class StabilityCertificate:
    zero: ZeroDatum
    r: float
    s: float
    M: float
    R: float
    C_analytic: float
    C_empirical: float
    trials: int

    @property
    def dominated(self) -> bool:
        return self.C_empirical <= self.C_analytic * (1 + 1e-9)

    def to_json(self) -> dict:
        out = asdict(self)
        out["zero"] = self.zero.to_json()
        out["dominated"] = self.dominated
        return out


def certify_stability(h: FunctionModel, z: ZeroDatum, r: float, s: float,
                      R: float | None = None, N: int = 64, trials: int = 200,
                      rng: np.random.Generator | int | None = 0,
                      basis: bool = True) -> StabilityCertificate:
    """Pair the analytic constant with an empirical lower bound."""
    if R is None:
        rad = h.radius(z.lam)
        R = 1.0 if math.isinf(rad) else rad / 2
    M = cauchy_bounds(h, z.lam, R)
    analytic = stability_bound_analytic(z, r, s, M, R)
    empirical = stability_empirical(h, z, Power(r, float(s)), N, trials, rng, basis)
    return StabilityCertificate(z, float(r), float(s), M, float(R), analytic, empirical, trials)
