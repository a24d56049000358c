"""Closure, associativity and unit conditions on a pair ``(f, g)``.

Each condition family is a membership statement in ``S = <d^(k) g>``:

* ``left_ideal``         g * d^(j) f          in S  for j >= 0
* ``assoc_derivatives``  d^(j) f              in S  for j >= 1
* ``assoc_product``      f * d^(j)(f(-z))     in S  for j >= 0
* ``right_ideal``        f * d^(j)(g(-z))     in S  for j >= 0

plus ``unit`` (``res f = 1``) and ``g_singular`` (g has a pole).  The
checker tests ``j <= j_max`` and records the degree-saturation argument
covering larger ``j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .exactcore import LaurentSeries, format_scalar, to_fraction
from .funring import (
    ALLOW_CONSTANTS,
    STRICT,
    FunctionElement,
    fr_derive,
    fr_mul,
    fr_negate_arg,
    laurent_expand,
    reconstruct,
    span_membership,
    zhu_f,
)

CONDITION_NAMES = ("left_ideal", "assoc_derivatives", "assoc_product", "right_ideal", "unit", "g_singular")

SATURATION_NOTE = (
    "for j beyond j_max each tested product has degree (pole order) growing by one per step, "
    "exactly as d^(k) g does, so the triangular system has the same shape at every larger j"
)


@dataclass
class Verdict:
    """Outcome of one condition family.

    ``j``/``witness`` name the first failure; ``failures`` lists every
    failing ``(j, witness)`` in the tested range.
    """

    passed: bool
    j: int | None = None
    witness: str | None = None
    certificates: dict[int, dict] = field(default_factory=dict)
    failures: list[tuple[int | None, str]] = field(default_factory=list)

    def to_json(self) -> dict:
        out: dict = {"verdict": "pass" if self.passed else "fail"}
        if not self.passed:
            out["j"] = self.j
            out["witness"] = self.witness
            if len(self.failures) > 1:
                out["all_failures"] = [[j, w] for j, w in self.failures]
        if self.certificates:
            out["certificates"] = {str(j): c for j, c in sorted(self.certificates.items())}
        return out


@dataclass
class ConditionReport:
    verdicts: dict[str, Verdict]
    j_max: int
    mode: str
    variant: str | None = None
    f: str = ""
    g: str = ""
    domain: str = ""

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts.values())

    def failures(self) -> list[str]:
        return [k for k, v in self.verdicts.items() if not v.passed]

    def to_json(self) -> dict:
        out = {
            "domain": self.domain,
            "f": self.f,
            "g": self.g,
            "mode": self.mode,
            "j_max": self.j_max,
            "conditions": {k: self.verdicts[k].to_json() for k in CONDITION_NAMES},
            "saturation": SATURATION_NOTE,
            "passed": self.passed,
        }
        if self.variant:
            out["variant"] = self.variant
        return out


def _membership_family(products: Iterable[tuple[int, FunctionElement]], g: FunctionElement, mode: str) -> Verdict:
    certs = {}
    failures = []
    for j, p in products:
        cert = span_membership(p, g, mode)
        if not cert.member:
            failures.append((j, p.to_string()))
        elif reconstruct(cert, g) != p:
            failures.append((j, f"certificate failed to reconstruct {p.to_string()}"))
        else:
            certs[j] = cert.to_json()
    if failures:
        return Verdict(False, failures[0][0], failures[0][1], failures=failures)
    return Verdict(True, certificates=certs)


def _scalar_verdict(ok: bool, j, witness: str) -> Verdict:
    return Verdict(True) if ok else Verdict(False, j, witness, failures=[(j, witness)])


def check_conditions(f: FunctionElement, g: FunctionElement, j_max: int = 6, mode: str = STRICT) -> ConditionReport:
    f._check(g)
    if j_max < 2:
        raise ValueError("j_max must be at least 2")
    f_neg = fr_negate_arg(f)
    g_neg = fr_negate_arg(g)
    js = range(j_max + 1)
    verdicts = {
        "left_ideal": _membership_family(((j, fr_mul(g, fr_derive(f, j))) for j in js), g, mode),
        "assoc_derivatives": _membership_family(((j, fr_derive(f, j)) for j in js if j >= 1), g, mode),
        "assoc_product": _membership_family(((j, fr_mul(f, fr_derive(f_neg, j))) for j in js), g, mode),
        "right_ideal": _membership_family(((j, fr_mul(f, fr_derive(g_neg, j))) for j in js), g, mode),
    }
    # pole order of f is at most deg f (trig) or its literal pole order
    window = max(f.degree(), g.degree(), f.pole_order() if not f.is_trig else 0, 1) + 2
    f_exp = laurent_expand(f, window)
    res = f_exp.coeff(-1)
    verdicts["unit"] = _scalar_verdict(res == 1, -1, f"res f = {format_scalar(res)}")
    g_sing = laurent_expand(g, window).singular_part()
    verdicts["g_singular"] = _scalar_verdict(not g_sing.is_zero(), None, "g has no pole at z = 0")
    return ConditionReport(
        verdicts, j_max, mode, f=f.to_string(), g=g.to_string(), domain=str(f.domain)
    )


def solve_ode(f0, order: int) -> LaurentSeries:
    """Solve ``f(-z) f(z) = f'(z)`` with ``f = z^-1 + f0 + ...`` through ``z^order``.

    Writing ``f = z^-1 + sum_{n>=0} a_n z^n``, the ``z^m`` coefficient of the
    equation gives ``(m + 2 + (-1)^m) a_{m+1} = sum_{i+j=m} (-1)^i a_i a_j``,
    whose left factor never vanishes.
    """
    if order < 1:
        raise ValueError("order must be at least 1")
    a = [to_fraction(f0)]
    for m in range(order):
        s = sum((-1) ** i * a[i] * a[m - i] for i in range(m + 1))
        a.append(Fraction(s, m + 2 + (-1) ** m))
    coeffs = {-1: 1}
    coeffs.update(enumerate(a))
    return LaurentSeries(coeffs, order + 1)


def family_generator(c=1) -> FunctionElement:
    """``c^2 (u^2 + u)``, i.e. ``x^-2 + x^-1`` at ``c = 1``.

    This is ``-df/dz``: the normalization under which ``f_1/2 = f + g``
    holds for ``f_1/2 = e^{2z}/(e^z - 1)^2``.  The family of all ``F = f + p``
    does not depend on this sign, only the coordinates of ``p`` do.
    """
    return -fr_derive(zhu_f(c), 1)


def build_family_F(p_spec, c=1) -> tuple[FunctionElement, FunctionElement]:
    """``F = f + sum coeff * d^(k) g`` and ``F' = dF/dz`` in the trig domain,
    with ``g`` the :func:`family_generator`."""
    f = zhu_f(c)
    g = family_generator(c)
    F = f
    for k, coeff in p_spec:
        F = F + fr_derive(g, int(k)) * to_fraction(coeff)
    return F, fr_derive(F, 1)


def check_F_family(p_spec, c=1, j_max: int = 6, mode: str = ALLOW_CONSTANTS) -> ConditionReport:
    F, Fp = build_family_F(p_spec, c)
    report = check_conditions(F, Fp, j_max, mode)
    report.variant = "family(TV-augmented): p = " + (
        " + ".join(f"{format_scalar(coeff)}*d^({k})g" for k, coeff in p_spec) or "0"
    )
    return report
