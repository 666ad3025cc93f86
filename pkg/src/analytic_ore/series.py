"""Truncated complex power series and the weighted seminorms on them.

A :class:`TruncatedSeries` stores the Taylor coefficients ``a_0 .. a_N`` of a
germ around ``center``.  Coefficients beyond ``N`` are either unknown (the
default) or known to vanish (``polynomial=True``).  Every operation returns a
series whose stored coefficients are all exact given exact inputs; the
``exact_order`` property says how far that guarantee reaches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np
from scipy.special import comb, gammaln

__all__ = [
    "CenterMismatch",
    "SeminormOverflow",
    "Power",
    "Formal",
    "SeminormParams",
    "TruncatedSeries",
    "add",
    "mul",
    "differentiate",
    "seminorm",
    "log_weights",
    "shift_center",
    "deviation",
    "random_series",
]

# Largest exponent whose exp() is still a finite double.
_LOG_FLOAT_MAX = math.log(np.finfo(float).max)


class CenterMismatch(ValueError):
    """Raised when combining series expanded around different centers."""


class SeminormOverflow(OverflowError):
    """Raised when a seminorm value is not representable as a double."""


@dataclass(frozen=True)
class Power:
    """Parameters of ``||a||_{r,s} = sum |a_n| r**n / n!**s``."""

    r: float
    s: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"r must be positive, got {self.r}")
        if not self.s >= 0 or math.isinf(self.s):
            raise ValueError(f"s must be finite and nonnegative, got {self.s}")


@dataclass(frozen=True)
class Formal:
    """Parameters of ``||a||_{m,inf} = sum_{n<=m} |a_n|``."""

    m: int

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 0:
            raise ValueError(f"m must be a nonnegative integer, got {self.m}")


SeminormParams = Union[Power, Formal]


class TruncatedSeries:
    """Immutable truncated Taylor expansion around ``center``.

    Parameters
    ----------
    coeffs : sequence of complex
        Coefficients ``a_0 .. a_N``; must be non-empty.
    center : complex
        Expansion point.
    polynomial : bool
        If true, all coefficients past ``N`` are known to be zero.
    """

    __slots__ = ("_coeffs", "_center", "_polynomial")

    def __init__(self, coeffs: Iterable[complex], center: complex = 0.0,
                 polynomial: bool = False):
        arr = np.array(coeffs, dtype=complex).ravel()
        if arr.size == 0:
            raise ValueError("a series needs at least one coefficient")
        arr.setflags(write=False)
        self._coeffs = arr
        self._center = complex(center)
        self._polynomial = bool(polynomial)

    # -- construction helpers -------------------------------------------

    @classmethod
    def monomial(cls, n: int, order: int, center: complex = 0.0,
                 coefficient: complex = 1.0) -> "TruncatedSeries":
        """``coefficient * (z - center)**n`` as a polynomial of order ``max(n, order)``."""
        c = np.zeros(max(n, order) + 1, dtype=complex)
        c[n] = coefficient
        return cls(c, center, polynomial=True)

    @classmethod
    def constant(cls, value: complex, order: int = 0,
                 center: complex = 0.0) -> "TruncatedSeries":
        return cls.monomial(0, order, center, value)

    @classmethod
    def zero(cls, order: int = 0, center: complex = 0.0) -> "TruncatedSeries":
        return cls(np.zeros(order + 1), center, polynomial=True)

    # -- basic properties -----------------------------------------------

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @property
    def center(self) -> complex:
        return self._center

    @property
    def polynomial(self) -> bool:
        return self._polynomial

    @property
    def order(self) -> int:
        """Truncation order ``N`` (index of the last stored coefficient)."""
        return self._coeffs.size - 1

    trunc_order = order

    @property
    def exact_order(self) -> float:
        """Largest order through which the series is known; ``inf`` for polynomials."""
        return math.inf if self._polynomial else self.order

    def valuation(self) -> float:
        """Index of the first nonzero coefficient.

        For a truncated series that vanishes through ``N`` this is the lower
        bound ``N + 1``; for the zero polynomial it is ``inf``.
        """
        nz = np.flatnonzero(self._coeffs)
        if nz.size:
            return int(nz[0])
        return math.inf if self._polynomial else self.order + 1

    def degree(self) -> int:
        """Index of the last nonzero stored coefficient, ``-1`` if none."""
        nz = np.flatnonzero(self._coeffs)
        return int(nz[-1]) if nz.size else -1

    def coefficient(self, n: int) -> complex:
        if n <= self.order:
            return complex(self._coeffs[n])
        if self._polynomial:
            return 0j
        raise IndexError(f"coefficient {n} beyond exact order {self.order}")

    def truncate(self, order: int) -> "TruncatedSeries":
        """Re-truncate to ``order``; padding is only allowed for polynomials."""
        if order < 0:
            raise ValueError("order must be nonnegative")
        if order > self.exact_order:
            raise ValueError(f"cannot extend a series exact through {self.order} to {order}")
        c = np.zeros(order + 1, dtype=complex)
        k = min(order, self.order) + 1
        c[:k] = self._coeffs[:k]
        return TruncatedSeries(c, self._center,
                               polynomial=self._polynomial and self.degree() <= order)

    def evaluate(self, z: complex) -> complex:
        """Sum the stored coefficients at ``z`` (Horner)."""
        u = complex(z) - self._center
        acc = 0j
        for c in self._coeffs[::-1]:
            acc = acc * u + c
        return acc

    # -- operators --------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, TruncatedSeries):
            return add(self, other)
        return add(self, TruncatedSeries.constant(other, center=self._center))

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(-self._coeffs, self._center, self._polynomial)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            return mul(self, other)
        return TruncatedSeries(self._coeffs * complex(other), self._center,
                               self._polynomial)

    __rmul__ = __mul__

    def __repr__(self):
        tag = "poly" if self._polynomial else f"O(^{self.order + 1})"
        return f"TruncatedSeries({self._coeffs.tolist()!r}, center={self._center!r}, {tag})"

    def allclose(self, other: "TruncatedSeries", atol: float = 1e-12) -> bool:
        dev, _ = deviation(self, other)
        return dev <= atol

    # -- JSON -------------------------------------------------------------

    def to_json(self) -> dict:
        out = {
            "center": [self._center.real, self._center.imag],
            "coeffs": [[c.real, c.imag] for c in self._coeffs.tolist()],
        }
        if self._polynomial:
            out["polynomial"] = True
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "TruncatedSeries":
        center = _complex_from_json(obj.get("center", [0.0, 0.0]))
        coeffs = [_complex_from_json(c) for c in obj["coeffs"]]
        return cls(coeffs, center, polynomial=bool(obj.get("polynomial", False)))


def _complex_from_json(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValueError(f"complex numbers are [re, im] pairs, got {v!r}")
        return complex(float(v[0]), float(v[1]))
    return complex(v)


def _check_centers(a: TruncatedSeries, b: TruncatedSeries):
    if a.center != b.center:
        raise CenterMismatch(f"centers differ: {a.center} vs {b.center}")


def add(a: TruncatedSeries, b: TruncatedSeries, order: int | None = None) -> TruncatedSeries:
    """Coefficientwise sum, truncated at the smaller exact order."""
    _check_centers(a, b)
    limit = min(a.exact_order, b.exact_order)
    if order is None:
        order = max(a.order, b.order) if math.isinf(limit) else int(limit)
    elif order > limit:
        raise ValueError(f"sum is only exact through {limit}")
    c = np.zeros(order + 1, dtype=complex)
    for s in (a, b):
        k = min(order, s.order) + 1
        c[:k] += s.coeffs[:k]
    poly = a.polynomial and b.polynomial and max(a.degree(), b.degree()) <= order
    return TruncatedSeries(c, a.center, poly)


def _product_limit(a: TruncatedSeries, b: TruncatedSeries) -> float:
    # Unknown a_p (p > N_a) first reaches c_n at n = N_a + 1 + val(b).
    limit = math.inf
    if not a.polynomial:
        limit = min(limit, a.order + b.valuation())
    if not b.polynomial:
        limit = min(limit, b.order + a.valuation())
    return limit


def mul(a: TruncatedSeries, b: TruncatedSeries, order: int | None = None) -> TruncatedSeries:
    """Cauchy product.

    By default the result is truncated at ``min(N_a, N_b)`` (a polynomial
    factor counts as infinitely exact, and the product of two polynomials is
    kept whole).  A larger ``order`` may be requested up to the order through
    which the product is actually determined, which grows with the
    valuations of the factors.
    """
    _check_centers(a, b)
    limit = _product_limit(a, b)
    both_poly = a.polynomial and b.polynomial
    if order is None:
        if both_poly:
            order = max(a.degree() + b.degree(), 0)
        elif math.isinf(limit):
            order = min(a.order if not a.polynomial else math.inf,
                        b.order if not b.polynomial else math.inf)
        else:
            order = int(min(a.exact_order, b.exact_order))
    if (a.polynomial and a.degree() < 0) or (b.polynomial and b.degree() < 0):
        return TruncatedSeries.zero(order, a.center)
    if order > limit:
        raise ValueError(f"product is only exact through {limit}")
    ka = min(order, a.order) + 1
    kb = min(order, b.order) + 1
    full = np.convolve(a.coeffs[:ka], b.coeffs[:kb])
    c = np.zeros(order + 1, dtype=complex)
    k = min(order + 1, full.size)
    c[:k] = full[:k]
    poly = (a.polynomial and b.polynomial
            and a.degree() + b.degree() <= order)
    return TruncatedSeries(c, a.center, poly)


def differentiate(a: TruncatedSeries) -> TruncatedSeries:
    """Term-by-term derivative; loses one order unless ``a`` is a polynomial."""
    if a.order == 0:
        if a.polynomial:
            return TruncatedSeries.zero(0, a.center)
        raise ValueError("derivative of an order-0 truncation is undetermined")
    n = np.arange(1, a.order + 1)
    return TruncatedSeries(n * a.coeffs[1:], a.center, a.polynomial)


def log_weights(p: Power, n_max: int) -> np.ndarray:
    """``log(r**n / n!**s)`` for ``n = 0 .. n_max``."""
    n = np.arange(n_max + 1, dtype=float)
    return n * math.log(p.r) - p.s * gammaln(n + 1)


def log_seminorm(a: TruncatedSeries, p: Power) -> float:
    """Natural log of ``||a||_{r,s}``; ``-inf`` for the zero series."""
    mag = np.abs(a.coeffs)
    nz = mag > 0
    if not nz.any():
        return -math.inf
    lw = log_weights(p, a.order)[nz] + np.log(mag[nz])
    top = lw.max()
    return float(top + math.log(np.exp(lw - top).sum()))


def seminorm(a: TruncatedSeries, p: SeminormParams) -> float:
    """Evaluate ``||a||_{r,s}`` or ``||a||_{m,inf}`` on the stored coefficients."""
    if isinstance(p, Formal):
        return float(np.abs(a.coeffs[: min(p.m, a.order) + 1]).sum())
    if not isinstance(p, Power):
        raise TypeError(f"unknown seminorm parameters {p!r}")
    val = log_seminorm(a, p)
    if val == -math.inf:
        return 0.0
    if val > _LOG_FLOAT_MAX:
        raise SeminormOverflow(f"seminorm exp({val:.1f}) exceeds double range")
    return math.exp(val)


def shift_center(a: TruncatedSeries, new_center: complex) -> TruncatedSeries:
    """Re-expand a polynomial around ``new_center``.

    ``b_k = sum_{n>=k} binom(n, k) d**(n-k) a_n`` with ``d`` the center shift.
    """
    if not a.polynomial:
        raise ValueError("only polynomial series can be re-centered (tail unknown)")
    new_center = complex(new_center)
    d = new_center - a.center
    if d == 0:
        return a
    N = a.order
    n = np.arange(N + 1)
    # B[k, n] = binom(n, k) d**(n-k) for n >= k
    expo = n[None, :] - n[:, None]
    mask = expo >= 0
    B = np.where(mask, comb(n[None, :], n[:, None]) * np.power(d, np.where(mask, expo, 0)), 0)
    return TruncatedSeries(B @ a.coeffs, new_center, polynomial=True)


def deviation(a: TruncatedSeries, b: TruncatedSeries,
              through: int | None = None) -> tuple[float, int]:
    """Max coefficient difference over the orders where both are exact.

    Returns ``(max |a_n - b_n|, last order compared)``.
    """
    _check_centers(a, b)
    limit = min(a.exact_order, b.exact_order)
    if math.isinf(limit):
        limit = max(a.order, b.order)
    if through is not None:
        if through > limit:
            raise ValueError(f"comparison requested through {through}, exact only through {limit}")
        limit = through
    limit = int(limit)
    diff = max((abs(a.coefficient(n) - b.coefficient(n)) for n in range(limit + 1)),
               default=0.0)
    return float(diff), limit


def random_series(rng: np.random.Generator, order: int, center: complex = 0.0,
                  polynomial: bool = True, valuation: int = 0) -> TruncatedSeries:
    """Coefficients drawn uniformly from the closed unit disc."""
    size = order + 1
    rad = np.sqrt(rng.uniform(size=size))
    ang = rng.uniform(0, 2 * np.pi, size=size)
    c = rad * np.exp(1j * ang)
    c[:valuation] = 0
    return TruncatedSeries(c, center, polynomial)


def as_series(values: Sequence[complex], center: complex = 0.0) -> TruncatedSeries:
    """Shorthand for an exact polynomial from its coefficient list."""
    return TruncatedSeries(values, center, polynomial=True)
