"""Holomorphic functions given by polynomials or coefficient rules.

The function ``h`` of the relation ``[x, y] = h(y)`` enters only through its
Taylor data at its zeros, so a model is anything that can produce Taylor
coefficients around a requested center.  Polynomials are exact; other
functions are described by a deterministic coefficient rule together with the
radius of the disc on which the expansion is valid.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import pdist

from .series import TruncatedSeries, _complex_from_json, shift_center

__all__ = [
    "FunctionModel",
    "PolynomialModel",
    "CoefficientOracle",
    "ZeroDatum",
    "NotAZero",
    "OrderUndecidable",
    "OutOfRegion",
    "taylor_at",
    "zero_order",
    "local_factor",
    "local_expansion",
    "validate_zero",
    "cauchy_bounds",
    "find_zeros",
    "sinh_model",
    "sinh_deformation",
    "sinh_deformation_zeros",
    "parse_function_spec",
]

DEFAULT_ZERO_TOL = 1e-9
DEFAULT_CLUSTER_RADIUS = 1e-6
DEFAULT_MARGIN = 0.05
# Probe depth for coefficient rules when no degree bounds the expansion.
ORACLE_PROBE_DEPTH = 16


class NotAZero(ValueError):
    pass


class OrderUndecidable(ValueError):
    pass


class OutOfRegion(ValueError):
    pass


class FunctionModel:
    """Base class; subclasses provide :meth:`taylor` and :meth:`radius`."""

    def taylor(self, center: complex, order: int) -> TruncatedSeries:
        raise NotImplementedError

    def radius(self, center: complex) -> float:
        """Radius of convergence of the expansion at ``center`` (0 if outside the domain)."""
        raise NotImplementedError

    def evaluate(self, z: complex) -> complex:
        raise NotImplementedError

    def probe_depth(self) -> int:
        return ORACLE_PROBE_DEPTH

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class PolynomialModel(FunctionModel):
    """``h(z) = sum coeffs[n] z**n``."""

    coeffs: tuple

    def __init__(self, coeffs: Sequence[complex]):
        c = [complex(v) for v in coeffs]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c or [0j]))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1 if any(self.coeffs) else -1

    def as_series(self) -> TruncatedSeries:
        return TruncatedSeries(self.coeffs, 0.0, polynomial=True)

    def taylor(self, center: complex, order: int) -> TruncatedSeries:
        shifted = shift_center(self.as_series(), center)
        if order >= shifted.order:
            return shifted.truncate(order)
        return TruncatedSeries(shifted.coeffs[: order + 1], shifted.center)

    def radius(self, center: complex) -> float:
        return math.inf

    def evaluate(self, z: complex) -> complex:
        return self.as_series().evaluate(z)

    def probe_depth(self) -> int:
        return max(self.degree, 0)

    def derivative(self) -> "PolynomialModel":
        return PolynomialModel([n * c for n, c in enumerate(self.coeffs)][1:] or [0])

    def __mul__(self, other: "PolynomialModel") -> "PolynomialModel":
        return PolynomialModel(np.convolve(self.coeffs, other.coeffs))

    def to_json(self) -> dict:
        return {"type": "polynomial", "coeffs": [[c.real, c.imag] for c in self.coeffs]}


@dataclass(frozen=True)
class CoefficientOracle(FunctionModel):
    """Function known through a rule ``(center, order) -> [c_0 .. c_order]``.

    ``radius_rule`` gives the validity radius at a center; the default treats
    the function as entire.  ``spec`` is echoed back by :meth:`to_json`.
    """

    rule: Callable[[complex, int], Sequence[complex]]
    radius_rule: Callable[[complex], float] = field(default=lambda c: math.inf)
    spec: tuple = ()

    def taylor(self, center: complex, order: int) -> TruncatedSeries:
        center = complex(center)
        if not self.radius(center) > 0:
            raise OutOfRegion(f"{center} is outside the domain of the model")
        c = np.asarray(self.rule(center, order), dtype=complex)
        if c.size != order + 1:
            raise ValueError(f"coefficient rule returned {c.size} values, expected {order + 1}")
        return TruncatedSeries(c, center)

    def radius(self, center: complex) -> float:
        return float(self.radius_rule(complex(center)))

    def evaluate(self, z: complex) -> complex:
        # Expand at the origin unless the point is outside that disc.
        center = 0j if abs(z) < self.radius(0j) else complex(z)
        return _sum_taylor(self, center, complex(z))

    def to_json(self) -> dict:
        return dict(self.spec) if self.spec else {"type": "oracle"}


def _sum_taylor(f: FunctionModel, center: complex, z: complex) -> complex:
    """Sum the Taylor model of ``f`` at ``center`` until the tail is negligible."""
    u = abs(z - center)
    order = 64
    while True:
        c = f.taylor(center, order).coeffs
        terms = np.abs(c) * u ** np.arange(order + 1)
        total = terms.sum()
        if terms[-8:].max() <= 1e-17 * max(total, 1e-300) or order >= 4096:
            return f.taylor(center, order).evaluate(z)
        order *= 2


@dataclass(frozen=True)
class ZeroDatum:
    """A zero ``lam`` of ``h`` of multiplicity ``order``."""

    lam: complex
    order: int

    def __post_init__(self):
        object.__setattr__(self, "lam", complex(self.lam))
        if int(self.order) != self.order or self.order < 1:
            raise ValueError(f"zero order must be a positive integer, got {self.order}")
        object.__setattr__(self, "order", int(self.order))

    @property
    def k(self) -> int:
        return self.order

    @property
    def s(self):
        """Exponent ``1/(k-1)`` of the local algebra, ``inf`` for simple zeros."""
        return math.inf if self.order == 1 else Fraction(1, self.order - 1)

    def to_json(self) -> dict:
        s = self.s
        return {
            "lambda": [self.lam.real, self.lam.imag],
            "order": self.order,
            "s": "inf" if s == math.inf else str(s),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ZeroDatum":
        return cls(_complex_from_json(obj["lambda"]), int(obj["order"]))


def taylor_at(f: FunctionModel, lam: complex, N: int) -> TruncatedSeries:
    """Coefficients ``f^(n)(lam)/n!`` for ``n <= N``."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    if not f.radius(lam) > 0:
        raise OutOfRegion(f"{lam} is outside the domain of the model")
    return f.taylor(lam, N)


def zero_order(f: FunctionModel, lam: complex, tol: float = DEFAULT_ZERO_TOL,
               depth: int | None = None) -> int:
    """Multiplicity of ``lam`` as a zero of ``f``, judged against a relative tolerance."""
    depth = f.probe_depth() if depth is None else depth
    c = np.abs(taylor_at(f, lam, depth).coeffs)
    scale = c.max()
    if scale == 0:
        raise OrderUndecidable(f"all Taylor coefficients at {lam} through {depth} vanish")
    above = np.flatnonzero(c > tol * scale)
    if above[0] == 0:
        raise NotAZero(f"|f({lam})| = {c[0]:.3g} exceeds tolerance")
    return int(above[0])


def validate_zero(f: FunctionModel, z: ZeroDatum, tol: float = DEFAULT_ZERO_TOL) -> None:
    """Raise unless ``z.order`` matches :func:`zero_order` at ``z.lam``."""
    depth = max(f.probe_depth(), z.order)
    k = zero_order(f, z.lam, tol, depth)
    if k != z.order:
        raise ValueError(f"declared order {z.order} at {z.lam}, measured {k}")


def local_expansion(f: FunctionModel, z: ZeroDatum, N: int) -> TruncatedSeries:
    """Taylor model of ``f`` at a declared zero with ``c_0 .. c_{k-1}`` set to exactly 0."""
    t = taylor_at(f, z.lam, N)
    c = t.coeffs.copy()
    c[: min(z.order, N + 1)] = 0
    return TruncatedSeries(c, t.center, t.polynomial)


def local_factor(f: FunctionModel, z: ZeroDatum, N: int) -> TruncatedSeries:
    """Series of ``g`` with ``f(w) = (w - lam)**k g(w)``, centered at ``lam``."""
    t = taylor_at(f, z.lam, N + z.order)
    g = TruncatedSeries(t.coeffs[z.order:], z.lam, t.polynomial)
    scale = np.abs(t.coeffs).max()
    if abs(g.coeffs[0]) <= DEFAULT_ZERO_TOL * scale:
        raise NotAZero(f"g({z.lam}) vanishes: order at {z.lam} exceeds {z.order}")
    return g


def cauchy_bounds(f: FunctionModel, lam: complex, R: float, samples: int = 256,
                  margin: float = DEFAULT_MARGIN) -> float:
    """``M`` with ``|f^(p)(lam)/p!| <= M / R**p``, from max modulus on ``|z - lam| = R``."""
    if not R > 0:
        raise ValueError("R must be positive")
    if not R < f.radius(lam):
        raise OutOfRegion(f"disc of radius {R} around {lam} leaves the domain")
    lam = complex(lam)
    theta = 2 * np.pi * np.arange(samples) / samples
    pts = lam + R * np.exp(1j * theta)
    if isinstance(f, PolynomialModel):
        vals = np.polyval(np.array(f.coeffs[::-1]), pts)
    else:
        series = _adequate_taylor(f, lam, R)
        vals = np.polyval(series.coeffs[::-1], pts - lam)
    return float((1 + margin) * np.abs(vals).max())


def _adequate_taylor(f: FunctionModel, lam: complex, R: float) -> TruncatedSeries:
    order = 64
    while True:
        t = f.taylor(lam, order)
        terms = np.abs(t.coeffs) * R ** np.arange(order + 1)
        if terms[-8:].max() <= 1e-17 * max(terms.sum(), 1e-300) or order >= 4096:
            return t
        order *= 2


def _companion_roots(coeffs: Sequence[complex]) -> np.ndarray:
    c = np.asarray(coeffs, dtype=complex)
    d = len(c) - 1
    A = np.zeros((d, d), dtype=complex)
    A[1:, :-1] = np.eye(d - 1)
    A[:, -1] = -c[:-1] / c[-1]
    return np.linalg.eigvals(A)


def find_zeros(f: FunctionModel, region: tuple[float, float, float, float] | None = None,
               tol: float = DEFAULT_ZERO_TOL,
               cluster_radius: float = DEFAULT_CLUSTER_RADIUS,
               max_radius: float = 1e-2) -> list[ZeroDatum]:
    """All zeros of a polynomial model with multiplicities.

    Roots come from the companion matrix.  They are grouped by single
    linkage at ``max_radius`` (relative to the root scale), and a group is
    accepted when :func:`zero_order` at its Newton-polished centroid equals
    its size.  Unresolved groups are split again with a tenfold smaller
    radius, down to ``cluster_radius``.  Going from coarse to fine keeps the
    individual members of a split multiple root from passing as simple
    zeros.  ``region`` is ``(re_min, re_max, im_min, im_max)``.
    """
    if not isinstance(f, PolynomialModel):
        raise TypeError("zeros of coefficient-rule models must be declared, not searched")
    if f.degree < 0:
        raise ValueError("h vanishes identically")
    if f.degree == 0:
        return []
    roots = _companion_roots(f.coeffs)
    scale = max(1.0, float(np.abs(roots).max()))
    found: list[ZeroDatum] = []
    pending = roots
    radius = max_radius
    while pending.size:
        if radius < cluster_radius * (1 - 1e-9):
            raise ValueError(f"could not resolve multiplicities of roots {pending}")
        labels = _cluster(pending, radius * scale)
        unresolved = []
        for lab in np.unique(labels):
            group = pending[labels == lab]
            center = _polish(f, complex(group.mean()), group.size, radius * scale)
            try:
                k = zero_order(f, center, tol)
            except NotAZero:
                k = None
            if k == group.size:
                found.append(ZeroDatum(center, k))
            else:
                unresolved.append(group)
        pending = np.concatenate(unresolved) if unresolved else np.array([], dtype=complex)
        radius /= 10
    if region is not None:
        re0, re1, im0, im1 = region
        found = [z for z in found if re0 <= z.lam.real <= re1 and im0 <= z.lam.imag <= im1]
    return sorted(found, key=lambda z: (z.lam.real, z.lam.imag))


def _polish(f: PolynomialModel, z0: complex, k: int, step_cap: float) -> complex:
    """Newton on ``f^(k-1)``, where a zero of order ``k`` is simple."""
    g = f
    for _ in range(k - 1):
        g = g.derivative()
    dg = g.derivative()
    z = z0
    for _ in range(8):
        d = dg.evaluate(z)
        if d == 0:
            break
        step = g.evaluate(z) / d
        if abs(z - step - z0) > step_cap:
            return z0
        z -= step
        if abs(step) <= 1e-16 * max(1.0, abs(z)):
            break
    return z


def _cluster(points: np.ndarray, radius: float) -> np.ndarray:
    if points.size == 1:
        return np.zeros(1, dtype=int)
    xy = np.column_stack([points.real, points.imag])
    return fcluster(linkage(pdist(xy), method="single"), t=radius, criterion="distance")


# -- builtin transcendental models --------------------------------------------

def _sinh_rule(a: complex, norm: complex):
    def rule(center: complex, order: int):
        sh, ch = cmath.sinh(a * center), cmath.cosh(a * center)
        out = np.empty(order + 1, dtype=complex)
        term = 1 / norm
        for n in range(order + 1):
            out[n] = term * (sh if n % 2 == 0 else ch)
            term = term * a / (n + 1)
        return out
    return rule


def sinh_model(scale: complex = 1.0) -> CoefficientOracle:
    """``sinh(scale * z)`` as an entire coefficient rule."""
    scale = complex(scale)
    return CoefficientOracle(_sinh_rule(scale, 1.0),
                             spec=(("type", "builtin"), ("name", "sinh"),
                                   ("scale", (scale.real, scale.imag))))


def sinh_deformation(hbar: complex) -> CoefficientOracle:
    """``sinh(hbar * z) / sinh(hbar)``, the quantum deformation of ``h(z) = z``."""
    hbar = complex(hbar)
    norm = cmath.sinh(hbar)
    if hbar == 0 or abs(norm) < 1e-300:
        raise ValueError("hbar must be nonzero with sinh(hbar) != 0")
    return CoefficientOracle(_sinh_rule(hbar, norm),
                             spec=(("type", "builtin"), ("name", "sinh_deformation"),
                                   ("hbar", (hbar.real, hbar.imag))))


def sinh_deformation_zeros(hbar: complex, window: int) -> list[ZeroDatum]:
    """Zeros ``pi*i*j/hbar`` for ``|j| <= window``; all are simple."""
    hbar = complex(hbar)
    out = []
    for j in range(-window, window + 1):
        lam = 1j * math.pi * j / hbar
        out.append(ZeroDatum(complex(lam.real + 0.0, lam.imag + 0.0), 1))
    return out


def parse_function_spec(obj: dict) -> tuple[FunctionModel, list[ZeroDatum] | None]:
    """Build a model from its JSON description.

    Returns the model and the declared zeros (``None`` when they should be
    searched for, which is only possible for polynomials).
    """
    kind = obj.get("type")
    declared = None
    if "zeros" in obj:
        declared = [ZeroDatum.from_json(z) for z in obj["zeros"]]
    if kind == "polynomial":
        return PolynomialModel([_complex_from_json(c) for c in obj["coeffs"]]), declared
    if kind == "builtin":
        name = obj.get("name")
        if name == "sinh_deformation":
            hbar = _complex_from_json(obj.get("hbar", [1.0, 0.0]))
            model = sinh_deformation(hbar)
            if declared is None:
                declared = sinh_deformation_zeros(hbar, int(obj.get("window", 2)))
            return model, declared
        if name == "sinh":
            scale = _complex_from_json(obj.get("scale", [1.0, 0.0]))
            model = sinh_model(scale)
            if declared is None:
                declared = [ZeroDatum(1j * math.pi * j / scale, 1)
                            for j in range(-int(obj.get("window", 2)), int(obj.get("window", 2)) + 1)]
            return model, declared
        raise ValueError(f"unknown builtin function {name!r}")
    raise ValueError(f"unknown function spec type {kind!r}")
