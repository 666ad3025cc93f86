"""Concrete operators realizing ``[X, Y] = h(Y)`` and numerical norm studies.

* Jordan pairs: ``Y = lam I + J`` with ``J`` the nilpotent shift, ``X`` solved
  from the commutator equation.  Evaluating skew polynomials at such a pair is
  the finite-dimensional shadow of the universal homomorphism.
* The Volterra operator ``Vf(x) = int_0^x f`` together with ``Tf(x) = x f(x)``
  satisfies ``[T, V] = V**2``; its powers have ``n! ||V**n|| -> 1/2``.
* The norm recurrence for ``||y**n chi||`` near a zero of order ``k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import svdvals
from scipy.sparse.linalg import svds

from .function_model import FunctionModel, ZeroDatum, taylor_at
from .ore import OrePoly

__all__ = [
    "MatrixRep",
    "jordan_pair",
    "evaluate_orepoly",
    "VolterraNorm",
    "volterra_kernel",
    "volterra_norms",
    "commutator_residual_TV",
    "BoundSequence",
    "bound_propagator",
    "closed_form_bound",
    "fit_envelope",
    "factorial_domination",
]

SOLVER_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class MatrixRep:
    lam: complex
    X: np.ndarray
    Y: np.ndarray
    H: np.ndarray
    residual: float
    trace_obstruction: bool
    tol: float = SOLVER_TOL

    @property
    def n(self) -> int:
        return self.Y.shape[0]

    @property
    def feasible(self) -> bool:
        return not self.trace_obstruction and self.residual <= self.tol


def _shift(n: int) -> np.ndarray:
    return np.eye(n, k=1, dtype=complex)


def jordan_pair(h: FunctionModel, z: ZeroDatum | complex, n: int,
                tol: float = SOLVER_TOL) -> MatrixRep:
    """Solve ``XY - YX = h(Y)`` for ``Y = lam I + J_n``.

    ``h(Y)`` is the finite Taylor sum in the nilpotent ``J``.  ``X`` is the
    minimum-Frobenius-norm least-squares solution of the ``n**2`` linear
    system.  Since commutators are traceless, ``h(lam) != 0`` makes the
    system inconsistent; this is flagged as ``trace_obstruction``.
    """
    if n < 2:
        raise ValueError("dimension must be at least 2")
    lam = z.lam if isinstance(z, ZeroDatum) else complex(z)
    J = _shift(n)
    eye = np.eye(n, dtype=complex)
    Y = lam * eye + J
    c = taylor_at(h, lam, n - 1).coeffs
    H = np.zeros((n, n), dtype=complex)
    Jm = eye
    for cm in c:
        H += cm * Jm
        Jm = Jm @ J
    # column-major vec: vec(XY) = (Y^T kron I) vec X, vec(YX) = (I kron Y) vec X
    A = np.kron(Y.T, eye) - np.kron(eye, Y)
    sol, *_ = np.linalg.lstsq(A, H.reshape(-1, order="F"), rcond=None)
    X = sol.reshape((n, n), order="F")
    residual = float(np.linalg.norm(X @ Y - Y @ X - H))
    obstruction = abs(np.trace(H)) > tol * max(1.0, float(np.linalg.norm(H)))
    return MatrixRep(lam, X, Y, H, residual, bool(obstruction), tol)


def evaluate_orepoly(P: OrePoly, rep: MatrixRep, zero_index: int) -> np.ndarray:
    """``sum_i c_i(Y - lam I) X**i`` using component ``zero_index`` of each coefficient."""
    z = P.algebra.zeros[zero_index]
    if abs(z.lam - rep.lam) > 1e-12 * max(1.0, abs(z.lam)):
        raise ValueError(f"representation sits at {rep.lam}, component at {z.lam}")
    n = rep.n
    Nil = rep.Y - rep.lam * np.eye(n)
    powers = [np.eye(n, dtype=complex)]
    for _ in range(n - 1):
        powers.append(powers[-1] @ Nil)
    out = np.zeros((n, n), dtype=complex)
    Xi = np.eye(n, dtype=complex)
    for i, coef in enumerate(P.coeffs):
        s = coef[zero_index]
        if s.exact_order < n - 1:
            raise ValueError(f"coefficient {i} exact only through {s.order}, need {n - 1}")
        A = sum(s.coefficient(m) * powers[m] for m in range(n))
        out += A @ Xi
        Xi = Xi @ rep.X
    return out


@dataclass(frozen=True)
class VolterraNorm:
    n: int
    norm: float
    n_factorial_scaled: float


def volterra_kernel(grid: int, n: int, scaled: bool = True) -> np.ndarray:
    """Quadrature matrix of ``V**n`` on the midpoint grid, without the spacing factor.

    Entries are ``(x_i - t_j)**(n-1) / (n-1)!`` for ``t_j < x_i``, formed in
    log space.  For ``n = 1`` the diagonal cell is half covered by ``[0, x_i]``
    and gets weight 1/2.  With ``scaled=True`` everything is multiplied by
    ``n!``, i.e. the kernel becomes ``n (x - t)**(n-1)``.
    """
    if grid < 1 or n < 1:
        raise ValueError("grid and n must be positive")
    x = (np.arange(grid) + 0.5) / grid
    d = x[:, None] - x[None, :]
    K = np.zeros((grid, grid))
    below = d > 0
    log_norm = math.log(n) if scaled else -math.lgamma(n)
    if n == 1:
        K[below] = math.exp(log_norm)
        np.fill_diagonal(K, 0.5 * math.exp(log_norm))
    else:
        K[below] = np.exp(log_norm + (n - 1) * np.log(d[below]))
    return K


def _top_singular_value(K: np.ndarray, method: str) -> float:
    if method == "full" or min(K.shape) < 3:
        return float(svdvals(K)[0])
    v0 = np.full(K.shape[1], 1 / math.sqrt(K.shape[1]))
    return float(svds(K, k=1, v0=v0, return_singular_vectors=False)[0])


def volterra_norms(grid: int = 2000, n_max: int = 40, method: str = "arpack") -> list[VolterraNorm]:
    """``||V**n||`` on ``L^2[0,1]`` for ``n = 1 .. n_max``.

    Norm estimate: top singular value of the kernel matrix times the grid
    spacing.  ``method`` is ``"arpack"`` (Lanczos, default) or ``"full"``.
    """
    if grid < 100:
        raise ValueError("grid must be at least 100")
    out = []
    for n in range(1, n_max + 1):
        scaled = _top_singular_value(volterra_kernel(grid, n, scaled=True), method) / grid
        norm = math.exp(math.log(scaled) - math.lgamma(n + 1))
        out.append(VolterraNorm(n, norm, scaled))
    return out


def volterra_matrices(grid: int) -> tuple[np.ndarray, np.ndarray]:
    """``(T, V)`` on the midpoint grid."""
    x = (np.arange(grid) + 0.5) / grid
    return np.diag(x), volterra_kernel(grid, 1, scaled=False) / grid


def commutator_residual_TV(grid: int) -> float:
    """Operator-norm size of ``TV - VT - V**2`` on the grid."""
    if grid < 100:
        raise ValueError("grid must be at least 100")
    T, V = volterra_matrices(grid)
    R = T @ V - V @ T - V @ V
    return float(svdvals(R)[0])


@dataclass(frozen=True)
class BoundSequence:
    """Bounds on ``||y**n chi||`` for ``n = 0 .. len(bounds)-1``."""

    k: int
    C: float
    w_norm: float
    base: tuple
    bounds: tuple = field(repr=False)

    def first_vanishing(self) -> int | None:
        """Index after which every bound is exactly zero, if any."""
        for n in range(len(self.bounds)):
            if all(b == 0 for b in self.bounds[n:]):
                return n
        return None


def bound_propagator(k: int, C, w_norm, base_norms: Sequence, n_terms: int = 50) -> BoundSequence:
    """Run ``||y**(n+k-1) g chi|| <= (C ||w|| / n) ||y**n g chi||``.

    ``base_norms[m]`` bounds ``||y**m g chi||`` for ``m < k`` (a single value
    for ``k = 1``, used for every ``n``).  The output bounds ``||y**n chi||``
    by ``||w|| ||y**n g chi||``.  For ``k = 1`` the recurrence forces zero as
    soon as ``n > C ||w||``.  Works with ``Fraction`` inputs for exact checks.
    """
    if int(k) != k or k < 1:
        raise ValueError(f"invalid zero order {k}")
    if not C > 0 or not w_norm > 0:
        raise ValueError("C and w_norm must be positive")
    base = tuple(base_norms)
    g: list = [None] * n_terms
    if k == 1:
        if len(base) < 1:
            raise ValueError("k = 1 needs one base value")
        for n in range(n_terms):
            g[n] = 0 * base[0] if n > C * w_norm else base[0]
    else:
        if len(base) < k:
            raise ValueError(f"k = {k} needs base norms for m = 0 .. {k - 1}")
        for m in range(min(k, n_terms)):
            g[m] = base[m]
        for n in range(1, n_terms - k + 1):
            g[n + k - 1] = C * w_norm * g[n] / n
    return BoundSequence(k, C, w_norm, base, tuple(w_norm * v for v in g))


def closed_form_bound(k: int, C, w_norm, base_m, m: int, j: int):
    """``C**j ||w||**(j+1) base_m / (m (m+k-1) ... (m+(j-1)(k-1)))``."""
    den = 1
    for i in range(j):
        den *= m + i * (k - 1)
    return C ** j * w_norm ** (j + 1) * base_m / den


def fit_envelope(seq: BoundSequence, slack: float = 1e-9) -> tuple[float, float]:
    """Fit ``K r**n / (n+k-1)!**(1/(k-1))`` above every nonzero bound.

    ``log r`` is the least-squares slope of ``log(bound * (n+k-1)!**(1/(k-1)))``
    and ``K`` the smallest constant making the envelope dominate the data
    (inflated by ``slack``).
    """
    k = seq.k
    if k < 2:
        raise ValueError("envelope applies to k >= 2")
    ns, e = [], []
    for n, b in enumerate(seq.bounds):
        if b > 0:
            ns.append(n)
            e.append(math.log(float(b)) + math.lgamma(n + k) / (k - 1))
    ns, e = np.array(ns, dtype=float), np.array(e)
    slope = np.polyfit(ns, e, 1)[0]
    logK = float((e - slope * ns).max())
    return math.exp(logK) * (1 + slack), math.exp(slope)


def envelope(k: int, K: float, r: float, n: int) -> float:
    return math.exp(math.log(K) + n * math.log(r) - math.lgamma(n + k) / (k - 1))


def factorial_domination(k: int, m: int, j: int) -> bool:
    """``prod_{i<j} (m + i(k-1))**(k-1) >= (m + (j-1)(k-1))!`` in exact integers."""
    lhs = 1
    for i in range(j):
        lhs *= (m + i * (k - 1)) ** (k - 1)
    return lhs >= math.factorial(m + (j - 1) * (k - 1))
