"""Elements of the finite product of local power-series algebras."""

from __future__ import annotations

import math
from typing import Sequence

from .series import TruncatedSeries, deviation

__all__ = ["AlgebraElement", "fit_order"]


def fit_order(a: TruncatedSeries, N: int) -> TruncatedSeries:
    """Cap a component at working order ``N``.

    Polynomials of degree ``<= N`` stay exact polynomials; anything else is
    cut to ``min(N, exact order)``.
    """
    if a.polynomial and a.degree() <= N:
        return a.truncate(N)
    top = int(min(N, a.exact_order))
    if top == a.order and not a.polynomial:
        return a
    return TruncatedSeries(a.coeffs[: top + 1], a.center)


class AlgebraElement:
    """Tuple of series, component ``j`` in the local variable ``y_j`` (center 0)."""

    __slots__ = ("_components",)

    def __init__(self, components: Sequence[TruncatedSeries]):
        comps = tuple(components)
        for c in comps:
            if c.center != 0:
                raise ValueError("components are expansions in y_j around 0")
        self._components = comps

    @property
    def components(self) -> tuple:
        return self._components

    def __len__(self):
        return len(self._components)

    def __getitem__(self, j) -> TruncatedSeries:
        return self._components[j]

    def __iter__(self):
        return iter(self._components)

    @classmethod
    def constant(cls, value: complex, n_components: int) -> "AlgebraElement":
        return cls([TruncatedSeries.constant(value)] * n_components)

    @classmethod
    def unit(cls, n_components: int) -> "AlgebraElement":
        return cls.constant(1.0, n_components)

    def _check(self, other: "AlgebraElement"):
        if len(other) != len(self):
            raise ValueError(f"component count mismatch: {len(self)} vs {len(other)}")

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return AlgebraElement([a + b for a, b in zip(self, other)])

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return AlgebraElement([a - b for a, b in zip(self, other)])

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement([-a for a in self])

    def __mul__(self, other) -> "AlgebraElement":
        if isinstance(other, AlgebraElement):
            self._check(other)
            return AlgebraElement([a * b for a, b in zip(self, other)])
        return AlgebraElement([a * other for a in self])

    def __rmul__(self, other) -> "AlgebraElement":
        return AlgebraElement([other * a for a in self])

    def fit(self, N: int) -> "AlgebraElement":
        return AlgebraElement([fit_order(a, N) for a in self])

    @property
    def exact_order(self) -> float:
        return min((a.exact_order for a in self), default=math.inf)

    def is_zero(self) -> bool:
        return all(not a.coeffs.any() for a in self)

    def deviation(self, other: "AlgebraElement", through: int | None = None) -> tuple[float, int]:
        """Max coefficient gap over all components, through common exact orders."""
        self._check(other)
        worst, reach = 0.0, math.inf
        for a, b in zip(self, other):
            d, top = deviation(a, b, through)
            worst = max(worst, d)
            reach = min(reach, top)
        return worst, (reach if math.isfinite(reach) else -1)

    def to_json(self) -> dict:
        return {"components": [a.to_json() for a in self]}

    @classmethod
    def from_json(cls, obj: dict) -> "AlgebraElement":
        return cls([TruncatedSeries.from_json(c) for c in obj["components"]])

    def __repr__(self):
        return f"AlgebraElement({list(self._components)!r})"
