"""Truncated analytic Ore extension over the product of local algebras.

Elements are skew polynomials ``sum_i c_i x**i`` with coefficients on the
left, multiplied with the normal-ordering rule

    x**i b = sum_m binom(i, m) delta**m(b) x**(i - m),

which is the defining relation ``x b = b x + delta(b)`` applied repeatedly.
Series coefficients are carried to a fixed working order ``N``.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy.special import comb

from .algebra_element import AlgebraElement, fit_order
from .derivation import delta0_model, deltaj_apply
from .function_model import FunctionModel, PolynomialModel, ZeroDatum, taylor_at
from .series import Power, SeminormParams, TruncatedSeries, log_weights, random_series, seminorm

__all__ = [
    "TrivialAlgebra",
    "OreAlgebra",
    "OrePoly",
    "element_y",
    "mu",
    "intertwining_residual",
    "ore_mul",
    "commutator",
    "verify_main_relation",
    "ore_seminorm",
    "kothe_diagonal_embed",
]


class TrivialAlgebra(ValueError):
    """``h`` has no zeros, so the universal algebra is zero."""


class OreAlgebra:
    """The truncated algebra ``O(C, A; delta)`` for ``h`` and a finite set of its zeros."""

    def __init__(self, h: FunctionModel, zeros: Sequence[ZeroDatum], order: int = 32):
        if not zeros:
            raise TrivialAlgebra("h has no zeros: the universal algebra is trivial")
        if order < 1:
            raise ValueError("working order must be at least 1")
        self.h = h
        self.zeros = tuple(zeros)
        self.order = order

    @property
    def n_components(self) -> int:
        return len(self.zeros)

    def compatible(self, other: "OreAlgebra") -> bool:
        return self.h == other.h and self.zeros == other.zeros

    # -- elements of the coefficient algebra -----------------------------

    def scalar(self, value: complex) -> AlgebraElement:
        return AlgebraElement([TruncatedSeries.constant(value, self.order)] * self.n_components)

    def element_y(self) -> AlgebraElement:
        """``(lam_j + y_j)_j``."""
        return AlgebraElement([TruncatedSeries.monomial(0, self.order, coefficient=z.lam)
                               + TruncatedSeries.monomial(1, self.order) for z in self.zeros])

    def mu(self, f: FunctionModel) -> AlgebraElement:
        """Simultaneous Taylor expansion of ``f`` at every zero."""
        comps = []
        for z in self.zeros:
            t = taylor_at(f, z.lam, self.order)
            comps.append(TruncatedSeries(t.coeffs, 0.0, t.polynomial))
        return AlgebraElement(comps)

    def delta(self, a: AlgebraElement) -> AlgebraElement:
        if len(a) != self.n_components:
            raise ValueError(f"{len(a)} components for {self.n_components} zeros")
        return AlgebraElement([fit_order(deltaj_apply(self.h, z, c), self.order)
                               for z, c in zip(self.zeros, a)])

    def calculus(self, f: FunctionModel) -> AlgebraElement:
        """``f(y)`` by Horner evaluation in the algebra for polynomial ``f``; ``mu(f)`` otherwise."""
        if not isinstance(f, PolynomialModel):
            return self.mu(f)
        y = self.element_y()
        acc = self.scalar(f.coeffs[-1])
        for c in f.coeffs[-2::-1]:
            acc = (acc * y + self.scalar(c)).fit(self.order)
        return acc

    # -- skew polynomials -----------------------------------------------

    def poly(self, coeffs: Sequence[AlgebraElement]) -> "OrePoly":
        return OrePoly(self, coeffs)

    def eta(self, a: AlgebraElement) -> "OrePoly":
        return OrePoly(self, [a])

    def one(self) -> "OrePoly":
        return self.eta(self.scalar(1.0))

    def x(self) -> "OrePoly":
        return OrePoly(self, [self.scalar(0.0), self.scalar(1.0)])

    def x_power(self, i: int) -> "OrePoly":
        return OrePoly(self, [self.scalar(0.0)] * i + [self.scalar(1.0)])

    def mul(self, P: "OrePoly", Q: "OrePoly") -> "OrePoly":
        if not (P.algebra.compatible(self) and Q.algebra.compatible(self)):
            raise ValueError("Ore polynomials over different zero lists")
        dP = P.x_degree
        out = [self.scalar(0.0) for _ in range(dP + Q.x_degree + 1)]
        for j, b in enumerate(Q.coeffs):
            iterates = [b]
            for _ in range(dP):
                iterates.append(self.delta(iterates[-1]))
            for i, a in enumerate(P.coeffs):
                for m in range(i + 1):
                    term = a * iterates[m]
                    if m:
                        term = term * float(comb(i, m, exact=True))
                    out[i + j - m] = (out[i + j - m] + term).fit(self.order)
        return OrePoly(self, out)

    def random_element(self, rng: np.random.Generator, polynomial: bool = False) -> AlgebraElement:
        return AlgebraElement([random_series(rng, self.order, polynomial=polynomial)
                               for _ in self.zeros])

    def random_poly(self, rng: np.random.Generator, x_degree: int,
                    polynomial: bool = False) -> "OrePoly":
        return OrePoly(self, [self.random_element(rng, polynomial) for _ in range(x_degree + 1)])


class OrePoly:
    """``sum_i coeffs[i] x**i`` with left coefficients in the product algebra."""

    __slots__ = ("algebra", "coeffs")

    def __init__(self, algebra: OreAlgebra, coeffs: Sequence[AlgebraElement]):
        coeffs = list(coeffs) or [algebra.scalar(0.0)]
        for c in coeffs:
            if len(c) != algebra.n_components:
                raise ValueError("coefficient does not match the zero list")
        self.algebra = algebra
        self.coeffs = tuple(c.fit(algebra.order) for c in coeffs)

    @property
    def x_degree(self) -> int:
        return len(self.coeffs) - 1

    def _lift(self, other) -> "OrePoly":
        if isinstance(other, OrePoly):
            return other
        if isinstance(other, AlgebraElement):
            return self.algebra.eta(other)
        return self.algebra.eta(self.algebra.scalar(other))

    def _combine(self, other: "OrePoly", sign: int) -> "OrePoly":
        n = max(len(self.coeffs), len(other.coeffs))
        zero = self.algebra.scalar(0.0)
        a = list(self.coeffs) + [zero] * (n - len(self.coeffs))
        b = list(other.coeffs) + [zero] * (n - len(other.coeffs))
        return OrePoly(self.algebra, [u + v if sign > 0 else u - v for u, v in zip(a, b)])

    def __add__(self, other):
        return self._combine(self._lift(other), 1)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(self._lift(other), -1)

    def __rsub__(self, other):
        return self._lift(other)._combine(self, -1)

    def __neg__(self):
        return OrePoly(self.algebra, [-c for c in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return OrePoly(self.algebra, [c * other for c in self.coeffs])
        return self.algebra.mul(self, self._lift(other))

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self * other
        return self.algebra.mul(self._lift(other), self)

    def __pow__(self, n: int) -> "OrePoly":
        out = self.algebra.one()
        for _ in range(n):
            out = out * self
        return out

    def deviation(self, other: "OrePoly") -> tuple[float, int]:
        """Max coefficient gap over all x-powers and components."""
        diff = self - other
        zero = self.algebra.scalar(0.0)
        worst, reach = 0.0, math.inf
        for c in diff.coeffs:
            d, top = c.deviation(zero)
            worst = max(worst, d)
            reach = min(reach, top)
        return worst, int(reach)

    def to_json(self) -> dict:
        return {"coeffs": [c.to_json() for c in self.coeffs]}

    @classmethod
    def from_json(cls, algebra: OreAlgebra, obj: dict) -> "OrePoly":
        return cls(algebra, [AlgebraElement.from_json(c) for c in obj["coeffs"]])

    def __repr__(self):
        return f"OrePoly(x_degree={self.x_degree}, components={self.algebra.n_components})"


# -- functional interface ----------------------------------------------------

def element_y(zeros: Sequence[ZeroDatum], N: int = 32) -> AlgebraElement:
    if not zeros:
        raise TrivialAlgebra("no zeros: the universal algebra is trivial")
    return AlgebraElement([TruncatedSeries.monomial(0, N, coefficient=z.lam)
                           + TruncatedSeries.monomial(1, N) for z in zeros])


def mu(f: FunctionModel, zeros: Sequence[ZeroDatum], N: int) -> AlgebraElement:
    comps = []
    for z in zeros:
        t = taylor_at(f, z.lam, N)
        comps.append(TruncatedSeries(t.coeffs, 0.0, t.polynomial))
    return AlgebraElement(comps)


def intertwining_residual(h: FunctionModel, zeros: Sequence[ZeroDatum], f: FunctionModel,
                          N: int) -> float:
    """``max |mu(delta_0 f) - delta(mu f)|`` over components and exact orders.

    The left side multiplies ``h`` and ``f'`` as functions and then expands;
    the right side expands first and applies the local derivations.
    """
    lhs = mu(delta0_model(h, f), zeros, N)
    rhs = AlgebraElement([fit_order(deltaj_apply(h, z, c), N)
                          for z, c in zip(zeros, mu(f, zeros, N))])
    return lhs.deviation(rhs)[0]


def ore_mul(P: OrePoly, Q: OrePoly, h: FunctionModel | None = None,
            zeros: Sequence[ZeroDatum] | None = None) -> OrePoly:
    alg = P.algebra
    if h is not None and (h != alg.h or tuple(zeros or ()) != alg.zeros):
        raise ValueError("Ore polynomials belong to a different (h, zeros) pair")
    return alg.mul(P, Q)


def commutator(P: OrePoly, Q: OrePoly, h: FunctionModel | None = None,
               zeros: Sequence[ZeroDatum] | None = None) -> OrePoly:
    return ore_mul(P, Q, h, zeros) - ore_mul(Q, P, h, zeros)


def verify_main_relation(h: FunctionModel, zeros: Sequence[ZeroDatum], N: int = 32,
                         x_degree: int = 4, tol: float = 1e-12) -> dict:
    """Check ``[x, y] = h(y)`` in the truncated Ore extension.

    The commutator is compared with ``mu(h)`` and, for polynomial ``h``, with
    ``h(y)`` computed by arithmetic in the algebra.  For ``i <= x_degree`` the
    identity ``[x**i, y] = sum_{m>=1} binom(i, m) mu(delta_0**(m-1) h) x**(i-m)``
    is checked as well, with the iterates of ``delta_0`` formed on functions;
    those gaps are reported relative to the largest expected coefficient.
    """
    alg = OreAlgebra(h, zeros, N)
    X, Y = alg.x(), alg.eta(alg.element_y())
    C = commutator(X, Y)
    dev_mu, reach = C.deviation(alg.eta(alg.mu(h)))
    dev_calc, _ = C.deviation(alg.eta(alg.calculus(h)))
    iterates = [h]
    for _ in range(1, x_degree):
        iterates.append(delta0_model(h, iterates[-1]))
    higher = []
    Xi = alg.one()
    for i in range(1, x_degree + 1):
        Xi = Xi * X
        expected = [alg.scalar(0.0) for _ in range(i)]
        for m in range(1, i + 1):
            expected[i - m] = expected[i - m] + alg.mu(iterates[m - 1]) * float(comb(i, m, exact=True))
        target = alg.poly(expected)
        dev, r = commutator(Xi, Y).deviation(target)
        higher.append(dev / max(1.0, _max_coefficient(target)))
        reach = min(reach, r)
    worst = max(dev_mu, dev_calc)
    return {
        "deviation": worst,
        "deviation_mu": dev_mu,
        "deviation_calculus": dev_calc,
        "relative_deviation_higher": higher,
        "order_compared": reach,
        "x_degree": x_degree,
        "N": N,
        "tol": tol,
        "ok": worst <= tol and max(higher, default=0.0) <= tol,
    }


def _max_coefficient(P: OrePoly) -> float:
    return max(float(np.abs(s.coeffs).max()) for c in P.coeffs for s in c)


def ore_seminorm(P: OrePoly, p: SeminormParams | Sequence[SeminormParams], rho: float) -> float:
    """``sum_i max_j ||c_i^(j)||_{p_j} rho**i``."""
    params = list(p) if isinstance(p, (list, tuple)) else [p] * P.algebra.n_components
    if len(params) != P.algebra.n_components:
        raise ValueError("need one seminorm per component")
    return sum(max(seminorm(c, q) for c, q in zip(coef, params)) * rho ** i
               for i, coef in enumerate(P.coeffs))


def kothe_diagonal_embed(a: TruncatedSeries, s: float, t: float, r: float,
                         q: float) -> tuple[float, float]:
    """``(||a||_{rq, s+t}, sum |a_n| r**n q**n / (n!**s n!**t))``.

    The first value uses the combined weight; the second multiplies the two
    factor weights term by term.
    """
    if a.center != 0:
        raise ValueError("expected a series centered at 0")
    combined = seminorm(a, Power(r * q, s + t))
    ws = np.exp(log_weights(Power(r, s), a.order))
    wt = np.exp(log_weights(Power(q, t), a.order))
    split = float(np.sum(np.abs(a.coeffs) * ws * wt))
    return combined, split
