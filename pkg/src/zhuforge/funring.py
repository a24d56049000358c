"""Closed-form functions of ``z`` in two coordinate domains.

``TrigDomain(c)`` elements are polynomials in ``u = 1/(e^{cz} - 1)``.  In
this coordinate ``d/dz = -c (u^2 + u) d/du`` and ``z -> -z`` is the ring map
``u -> -1 - u``, so every derivative, product and reflection stays a
polynomial.  ``RationalDomain`` elements are Laurent polynomials in ``z``.

Span membership questions ``p in <d^(k) g>`` become finite triangular
systems: in the trig domain ``deg d^(k) g = deg g + k``; in the rational
domain the pole order grows by one with each derivative.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Mapping

from .errors import DomainMismatch, ZeroSpanGenerator
from .exactcore import LaurentSeries, bernoulli, binom, format_scalar, to_fraction
from .linalg import axpy, combine, solve_combination

STRICT = "strict"
ALLOW_CONSTANTS = "allow_constants"
# S + S(-z): modulo TV, x_(h(-z))y = -y_(h)x, so reflected generators are free
TV_SYMMETRIC = "tv_symmetric"
MODES = (STRICT, ALLOW_CONSTANTS, TV_SYMMETRIC)


@dataclass(frozen=True)
class TrigDomain:
    c: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "c", to_fraction(self.c))
        if self.c == 0:
            raise ValueError("TrigDomain needs c != 0")

    def __str__(self):
        return f"trig(c={format_scalar(self.c)})"


@dataclass(frozen=True)
class RationalDomain:
    def __str__(self):
        return "rational"


class FunctionElement:
    """Polynomial in ``u`` (trig domain) or Laurent polynomial in ``z``."""

    __slots__ = ("domain", "coeffs")

    def __init__(self, domain, coeffs: Mapping[int, object]):
        if isinstance(domain, TrigDomain) and any(int(k) < 0 for k, c in coeffs.items() if c):
            raise ValueError("trig-domain elements are polynomials in u")
        self.domain = domain
        self.coeffs = {int(k): to_fraction(c) for k, c in sorted(coeffs.items()) if c}

    @property
    def var(self) -> str:
        return "u" if isinstance(self.domain, TrigDomain) else "z"

    @property
    def is_trig(self) -> bool:
        return isinstance(self.domain, TrigDomain)

    def is_zero(self) -> bool:
        return not self.coeffs

    def degree(self) -> int:
        """Top power (``u``-degree or top ``z`` exponent); ``-1`` for zero."""
        return max(self.coeffs, default=-1)

    def pole_order(self) -> int:
        """Rational domain: ``-min exponent`` (0 if no pole)."""
        return max(0, -min(self.coeffs, default=0))

    def constant_term(self) -> Fraction:
        return self.coeffs.get(0, Fraction(0))

    def _check(self, other: "FunctionElement"):
        if self.domain != other.domain:
            raise DomainMismatch(f"{self.domain} vs {other.domain}")

    def __eq__(self, other):
        if not isinstance(other, FunctionElement):
            return NotImplemented
        return self.domain == other.domain and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.domain, tuple(self.coeffs.items())))

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = constant(self.domain, other)
        self._check(other)
        return FunctionElement(self.domain, axpy(dict(self.coeffs), other.coeffs))

    __radd__ = __add__

    def __neg__(self):
        return FunctionElement(self.domain, {k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = constant(self.domain, other)
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return FunctionElement(self.domain, {k: other * c for k, c in self.coeffs.items()})
        return fr_mul(self, other)

    __rmul__ = __mul__

    def __repr__(self):
        return f"FunctionElement({self.domain}, {self.to_string()!r})"

    def to_string(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for k in sorted(self.coeffs, reverse=True):
            c = self.coeffs[k]
            mon = "" if k == 0 else self.var if k == 1 else f"{self.var}^{k}"
            if not mon:
                parts.append(format_scalar(c))
            elif c == 1:
                parts.append(mon)
            elif c == -1:
                parts.append("-" + mon)
            else:
                parts.append(f"{format_scalar(c)}*{mon}")
        return " + ".join(parts).replace("+ -", "- ")


def constant(domain, value) -> FunctionElement:
    return FunctionElement(domain, {0: value})


def trig(coeffs: Mapping[int, object], c=1) -> FunctionElement:
    return FunctionElement(TrigDomain(to_fraction(c)), coeffs)


def rational(coeffs: Mapping[int, object]) -> FunctionElement:
    return FunctionElement(RationalDomain(), coeffs)


def zhu_f(c=1) -> FunctionElement:
    """``c e^{cz}/(e^{cz}-1) = c(u + 1)``."""
    c = to_fraction(c)
    return trig({1: c, 0: c}, c)


def c2_f() -> FunctionElement:
    return rational({-1: 1})


def fr_mul(a: FunctionElement, b: FunctionElement) -> FunctionElement:
    a._check(b)
    out: dict[int, Fraction] = {}
    for i, x in a.coeffs.items():
        for j, y in b.coeffs.items():
            out[i + j] = out.get(i + j, 0) + x * y
    return FunctionElement(a.domain, out)


def _derive_once(a: FunctionElement) -> FunctionElement:
    if a.is_trig:
        # d/dz u^n = -c n (u^{n+1} + u^n)
        c = a.domain.c
        out: dict[int, Fraction] = {}
        for n, x in a.coeffs.items():
            if n == 0:
                continue
            out[n + 1] = out.get(n + 1, 0) - c * n * x
            out[n] = out.get(n, 0) - c * n * x
        return FunctionElement(a.domain, out)
    return FunctionElement(a.domain, {n - 1: n * x for n, x in a.coeffs.items() if n})


def fr_derive(a: FunctionElement, j: int = 1) -> FunctionElement:
    """Divided derivative ``d^j/dz^j / j!``."""
    if j < 0:
        raise ValueError("derivative order must be nonnegative")
    if not a.is_trig:
        return FunctionElement(a.domain, {n - j: binom(n, j) * x for n, x in a.coeffs.items()})
    out = a
    for _ in range(j):
        out = _derive_once(out)
    return out * Fraction(1, factorial(j)) if j > 1 else out


def fr_negate_arg(a: FunctionElement) -> FunctionElement:
    """Image under ``z -> -z``."""
    if not a.is_trig:
        return FunctionElement(a.domain, {n: (-1) ** (n % 2) * x for n, x in a.coeffs.items()})
    # u -> -1 - u, expanded via Horner
    minus_one_minus_u = FunctionElement(a.domain, {0: -1, 1: -1})
    out = constant(a.domain, 0)
    for n in range(a.degree(), -1, -1):
        out = fr_mul(out, minus_one_minus_u) + a.coeffs.get(n, 0)
    return out


def u_expansion(c, trunc: int) -> LaurentSeries:
    """``u = 1/(e^{cz}-1) = sum_n B_n c^{n-1} z^{n-1} / n!`` below ``trunc``."""
    c = to_fraction(c)
    return LaurentSeries({n - 1: bernoulli(n) * c ** (n - 1) / factorial(n) for n in range(trunc + 1)}, trunc)


def laurent_expand(a: FunctionElement, trunc: int) -> LaurentSeries:
    """Expansion at ``z = 0`` known on all exponents below ``trunc``."""
    if not a.is_trig:
        return LaurentSeries(a.coeffs, trunc)
    d = a.degree()
    if d <= 0:
        return LaurentSeries({0: a.constant_term()}, trunc)
    # each factor of u costs one exponent of window
    u = u_expansion(a.domain.c, trunc + d - 1)
    out = LaurentSeries({0: a.coeffs.get(d, 0)}, None)
    for n in range(d - 1, -1, -1):
        out = out * u + a.coeffs.get(n, 0)
    return out.truncate(trunc)


@dataclass
class SpanCertificate:
    member: bool
    coefficients: dict[int, Fraction] = field(default_factory=dict)
    constant: Fraction = Fraction(0)
    reflected: dict[int, Fraction] = field(default_factory=dict)
    remainder: FunctionElement | None = None

    def to_json(self) -> dict:
        out = {"member": self.member}
        if self.member:
            out["coefficients"] = {str(k): format_scalar(v) for k, v in sorted(self.coefficients.items())}
            if self.reflected:
                out["reflected"] = {str(k): format_scalar(v) for k, v in sorted(self.reflected.items())}
            if self.constant:
                out["constant"] = format_scalar(self.constant)
        elif self.remainder is not None:
            out["remainder"] = self.remainder.to_string()
        return out


def span_order_bound(p: FunctionElement, g: FunctionElement) -> int:
    """Largest derivative order of ``g`` that can appear in a representation of ``p``."""
    if p.is_trig:
        return max(0, p.degree() - g.degree())
    if g.pole_order() > 0:
        return max(0, p.pole_order() - g.pole_order())
    # polynomial g: derivatives die out after deg g steps
    return max(0, g.degree())


def span_membership(p: FunctionElement, g: FunctionElement, mode: str = STRICT) -> SpanCertificate:
    """Decide ``p in <d^(k) g : k >= 0>``.

    ``allow_constants`` adds the constant function to the span;
    ``tv_symmetric`` adds the reflected derivatives ``d^(k)(g(-z))``.
    """
    p._check(g)
    if g.is_zero():
        raise ZeroSpanGenerator("span generator g is zero")
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    gens = {k: fr_derive(g, k).coeffs for k in range(span_order_bound(p, g) + 1)}
    if mode == ALLOW_CONSTANTS:
        gens["const"] = {0: Fraction(1)}
    elif mode == TV_SYMMETRIC:
        g_neg = fr_negate_arg(g)
        for k in range(span_order_bound(p, g) + 1):
            gens[("neg", k)] = fr_derive(g_neg, k).coeffs
    coeffs, rem = solve_combination(gens, p.coeffs)
    if coeffs is None:
        return SpanCertificate(False, remainder=FunctionElement(p.domain, rem))
    const = coeffs.pop("const", Fraction(0))
    reflected = {k[1]: coeffs.pop(k) for k in sorted(k for k in coeffs if isinstance(k, tuple))}
    return SpanCertificate(True, dict(sorted(coeffs.items())), const, reflected)


def reconstruct(cert: SpanCertificate, g: FunctionElement) -> FunctionElement:
    """``constant + sum_k coefficients[k] d^(k) g + sum_k reflected[k] d^(k) g(-z)``."""
    gens = {k: fr_derive(g, k).coeffs for k in cert.coefficients}
    out = FunctionElement(g.domain, combine(gens, cert.coefficients))
    if cert.reflected:
        g_neg = fr_negate_arg(g)
        gens = {k: fr_derive(g_neg, k).coeffs for k in cert.reflected}
        out = out + FunctionElement(g.domain, combine(gens, cert.reflected))
    return out + cert.constant if cert.constant else out
