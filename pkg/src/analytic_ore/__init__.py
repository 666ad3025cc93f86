"""Computable pieces of the universal algebra of ``[x, y] = h(y)``."""

from .algebra_element import AlgebraElement
from .derivation import (
    StabilityCertificate,
    certify_stability,
    delta0_apply,
    delta_apply,
    deltaj_apply,
    stability_bound_analytic,
    stability_empirical,
)
from .function_model import (
    CoefficientOracle,
    FunctionModel,
    PolynomialModel,
    ZeroDatum,
    find_zeros,
    sinh_deformation,
    taylor_at,
    zero_order,
)
from .ore import OreAlgebra, OrePoly, commutator, verify_main_relation
from .series import Formal, Power, TruncatedSeries, seminorm

__version__ = "0.1.0"
