"""Exact computations with f-products on vertex algebras, Zhu-type quotients
and the q-series behind their associativity."""

from .conditions import check_conditions, check_F_family, solve_ode
from .exactcore import BivarSeries, LaurentSeries, bernoulli
from .funring import FunctionElement, RationalDomain, TrigDomain, span_membership
from .quotient import build_ideal, build_variant, c2_poisson, verify_algebra
from .vertex import AlgebraSpec, VAState, axiom_check, f_product, heisenberg, nth_product, virasoro

__version__ = "0.1.0"

__all__ = [
    "AlgebraSpec",
    "BivarSeries",
    "FunctionElement",
    "LaurentSeries",
    "RationalDomain",
    "TrigDomain",
    "VAState",
    "axiom_check",
    "bernoulli",
    "build_ideal",
    "build_variant",
    "c2_poisson",
    "check_F_family",
    "check_conditions",
    "f_product",
    "heisenberg",
    "nth_product",
    "solve_ode",
    "span_membership",
    "verify_algebra",
    "virasoro",
]
