"""Truncated ideals ``V_(g)V (+ TV)`` and quotient presentations.

The ideal is approximated at cutoff ``N`` by the span of all generators
``a_(g)b`` (and ``Ta``) whose every term has weight ``<= N``.  Reduction is
exact row echelon form with pivots at the largest monomial in
weight-major order, so coset representatives are the non-pivot monomials.
Because the quotient is filtered rather than graded, low-weight dimensions
are only trusted once they agree between cutoffs ``N`` and ``N + 2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct

from .conditions import build_family_F
from .errors import WeightOverflow
from .exactcore import LaurentSeries, format_scalar, to_fraction
from .funring import fr_derive, laurent_expand, trig, zhu_f
from .linalg import Echelon, axpy
from .vertex import (
    AlgebraSpec,
    VAState,
    as_vec,
    basis_upto,
    engine,
    f_product_vec,
    monomial_key,
    monomial_string,
    weight,
)

STABILIZATION_NOTE = (
    "heuristic: the truncated ideal only uses generators of weight <= N, "
    "so low-weight dimensions are trusted once cutoffs N and N+2 agree"
)


@dataclass
class IdealTruncation:
    spec: AlgebraSpec
    cutoff: int
    include_TV: bool
    g_series: LaurentSeries
    echelon: Echelon
    generator_count: int = 0

    @property
    def pivots(self) -> list:
        return self.echelon.pivots

    def vectors(self) -> list[VAState]:
        return [VAState(self.echelon.rows[p]) for p in self.pivots]


def top_weight(a, b, series: LaurentSeries) -> int:
    """Largest weight occurring in ``a_(h)b`` for a series ``h``."""
    return weight(a) + weight(b) - series.low - 1


def build_ideal(spec: AlgebraSpec, g: LaurentSeries, N: int, include_TV: bool = False) -> IdealTruncation:
    """Row-reduce every generator ``a_(g)b`` (and ``Ta``) living in ``V_{<=N}``."""
    if N < 0:
        raise ValueError("cutoff must be nonnegative")
    ech = Echelon(key=monomial_key)
    states = basis_upto(spec, N)
    count = 0
    for a, b in iproduct(states, repeat=2):
        if top_weight(a, b, g) > N:
            continue
        vec = f_product_vec(spec, {a: 1}, g, {b: 1})
        count += 1
        if vec:
            ech.add(vec)
    if include_TV:
        eng = engine(spec)
        for a in states:
            if weight(a) + 1 <= N:
                count += 1
                vec = eng.translate_vec({a: 1})
                if vec:
                    ech.add(vec)
    return IdealTruncation(spec, N, include_TV, g, ech, count)


def reduce(s, ideal: IdealTruncation) -> VAState:
    """Normal form of ``s`` modulo the truncated ideal."""
    vec = as_vec(s)
    w = max((weight(m) for m in vec), default=0)
    if w > ideal.cutoff:
        raise WeightOverflow(f"state of weight {w} exceeds cutoff {ideal.cutoff}")
    return VAState(ideal.echelon.reduce(vec)[0])


@dataclass
class QuotientCheck:
    name: str
    passed: bool
    checked: int = 0
    failures: list = field(default_factory=list)
    note: str = ""

    def to_json(self) -> dict:
        out = {"verdict": "pass" if self.passed else "fail", "checked": self.checked}
        if self.failures:
            out["failures"] = self.failures[:10]
        if self.note:
            out["note"] = self.note
        return out


class QuotientPresentation:
    """Coset basis and (partial) structure constants of ``V_{<=N} / I_N``."""

    def __init__(self, ideal: IdealTruncation, f_series: LaurentSeries, variant: str = ""):
        self.ideal = ideal
        self.f_series = f_series
        self.variant = variant
        self.spec = ideal.spec
        pivots = set(ideal.echelon.rows)
        self.representatives = [m for m in basis_upto(self.spec, ideal.cutoff) if m not in pivots]
        self.index = {m: i for i, m in enumerate(self.representatives)}
        # an f-product can exceed the weight of its inputs by this much
        self.headroom = max(0, -f_series.low - 1)
        self.safe_weight = ideal.cutoff - self.headroom
        self._table: dict = {}

    @property
    def cutoff(self) -> int:
        return self.ideal.cutoff

    @property
    def triple_weight(self) -> int:
        """Bound on ``wt a + wt b + wt c`` so that ``(a*b)*c`` and ``a*(b*c)`` are both safe."""
        return self.safe_weight - self.headroom

    def per_weight_dims(self) -> list[int]:
        dims = [0] * (self.cutoff + 1)
        for m in self.representatives:
            dims[weight(m)] += 1
        return dims

    def reduce(self, s) -> VAState:
        return reduce(s, self.ideal)

    def product(self, a, b) -> VAState:
        """``reduce(a_(f)b)``, bilinear; basis pairs are memoized."""
        out: dict = {}
        for ma, ca in as_vec(a).items():
            for mb, cb in as_vec(b).items():
                axpy(out, self._basis_product(ma, mb), ca * cb)
        return VAState(out)

    def _basis_product(self, a, b) -> dict:
        key = (a, b)
        hit = self._table.get(key)
        if hit is None:
            if weight(a) + weight(b) > self.safe_weight:
                raise WeightOverflow(
                    f"{monomial_string(a)} * {monomial_string(b)} exceeds safe weight {self.safe_weight}"
                )
            raw = f_product_vec(self.spec, {a: 1}, self.f_series, {b: 1})
            hit = self.ideal.echelon.reduce(raw)[0]
            self._table[key] = hit
        return hit

    def product_table(self) -> list:
        rows = []
        reps = self.representatives
        for i, a in enumerate(reps):
            for j, b in enumerate(reps):
                if weight(a) + weight(b) > self.safe_weight:
                    continue
                prod = self._basis_product(a, b)
                entries = sorted((self.index[m], format_scalar(c)) for m, c in prod.items())
                rows.append([i, j, [list(e) for e in entries]])
        return rows

    def representative_strings(self) -> list[str]:
        return [monomial_string(m, self.spec.symbol) for m in self.representatives]

    def to_json(self, checks: dict | None = None) -> dict:
        return {
            "schema": 1,
            "variant": self.variant,
            "algebra": str(self.spec),
            "cutoff": self.cutoff,
            "safe_weight": self.safe_weight,
            "triple_weight": self.triple_weight,
            "per_weight_dims": self.per_weight_dims(),
            "representatives": self.representative_strings(),
            "product_table": self.product_table(),
            "checks": {k: v.to_json() for k, v in (checks or {}).items()},
            "note": STABILIZATION_NOTE,
        }


def quotient_product(a, b, pres: QuotientPresentation) -> VAState:
    return pres.product(a, b)


def _reps_upto(pres: QuotientPresentation, w: int):
    return [m for m in pres.representatives if weight(m) <= w]


def _fail(spec, case: str, lhs: dict, rhs: dict | None = None) -> dict:
    out = {"case": case, "lhs": VAState(lhs).to_string(spec.symbol)}
    if rhs is not None:
        out["rhs"] = VAState(rhs).to_string(spec.symbol)
    return out


def zhu_constant(f: LaurentSeries, window: int) -> Fraction | None:
    """``c`` with ``f(-z) = -f(z) + c`` on the known window, else ``None``."""
    s = (f + f.negate_arg()).truncate(window)
    if any(e != 0 for e in s.coeffs):
        return None
    return s.coeffs.get(0, Fraction(0))


def verify_algebra(pres: QuotientPresentation, checks=("associativity", "unit", "fcomm", "commutativity")) -> dict:
    """Exact checks on all representative pairs/triples within the safe weight."""
    spec, safe = pres.spec, pres.safe_weight
    eng = engine(spec)
    reps = _reps_upto(pres, safe)
    name = lambda m: monomial_string(m, spec.symbol)
    out: dict[str, QuotientCheck] = {}
    for check in checks:
        failures, n = [], 0
        note = ""
        if check == "associativity":
            for a, b, c in iproduct(reps, repeat=3):
                if weight(a) + weight(b) + weight(c) > pres.triple_weight:
                    continue
                n += 1
                lhs = pres.product(pres.product(a, b), c).terms
                rhs = pres.product(a, pres.product(b, c)).terms
                if lhs != rhs:
                    failures.append(_fail(spec, f"({name(a)}, {name(b)}, {name(c)})", lhs, rhs))
        elif check == "unit":
            vac = ()
            for b in reps:
                n += 1
                left, right = pres.product(vac, b).terms, pres.product(b, vac).terms
                if left != {b: 1} or right != {b: 1}:
                    failures.append(_fail(spec, name(b), left, right))
        elif check == "commutativity":
            for a, b in iproduct(reps, repeat=2):
                if weight(a) + weight(b) > safe or monomial_key(a) >= monomial_key(b):
                    continue
                n += 1
                lhs, rhs = pres.product(a, b).terms, pres.product(b, a).terms
                if lhs != rhs:
                    failures.append(_fail(spec, f"({name(a)}, {name(b)})", lhs, rhs))
        elif check == "fcomm":
            c = zhu_constant(pres.f_series, safe + 1)
            if c is None:
                note = "not applicable: f(-z) + f(z) is not constant"
            else:
                note = f"c = {format_scalar(c)}"
                for a, b in iproduct(reps, repeat=2):
                    if weight(a) + weight(b) > safe:
                        continue
                    n += 1
                    diff = dict(pres.product(a, b).terms)
                    axpy(diff, pres.product(b, a).terms, -1)
                    a0b = eng.prod(a, 0, b)
                    if a0b:
                        axpy(diff, pres.reduce(a0b).terms, -c)
                    if diff:
                        failures.append(_fail(spec, f"({name(a)}, {name(b)})", diff))
        else:
            raise ValueError(f"unknown check {check!r}")
        out[check] = QuotientCheck(check, not failures, n, failures, note)
    return out


def c2_poisson(pres: QuotientPresentation) -> dict:
    """Bracket ``{a,b} = a(0)b`` on ``R_V``: skew-symmetry, Leibniz, and vanishing for Heisenberg."""
    spec, safe = pres.spec, pres.safe_weight
    eng = engine(spec)
    reps = _reps_upto(pres, safe)
    name = lambda m: monomial_string(m, spec.symbol)

    def bracket(x, y) -> dict:
        out: dict = {}
        for mx, cx in as_vec(x).items():
            for my, cy in as_vec(y).items():
                axpy(out, eng.prod(mx, 0, my), cx * cy)
        return pres.reduce(out).terms if out else {}

    skew, leibniz, zero = [], [], []
    n_skew = n_leib = 0
    for a, b in iproduct(reps, repeat=2):
        if weight(a) + weight(b) > safe:
            continue
        n_skew += 1
        ab, ba = bracket(a, b), bracket(b, a)
        if axpy(dict(ab), ba):
            skew.append(_fail(spec, f"{{{name(a)}, {name(b)}}}", ab, {m: -c for m, c in ba.items()}))
        if ab:
            zero.append(_fail(spec, f"{{{name(a)}, {name(b)}}}", ab))
    for a, b, c in iproduct(reps, repeat=3):
        if weight(a) + weight(b) + weight(c) > pres.triple_weight:
            continue
        n_leib += 1
        lhs = bracket(a, pres.product(b, c))
        rhs = dict(pres.product(bracket(a, b), c).terms) if bracket(a, b) else {}
        ac = bracket(a, c)
        if ac:
            axpy(rhs, pres.product(b, ac).terms)
        if lhs != rhs:
            leibniz.append(_fail(spec, f"({name(a)}, {name(b)}, {name(c)})", lhs, rhs))
    out = {
        "skew_symmetry": QuotientCheck("skew_symmetry", not skew, n_skew, skew),
        "leibniz": QuotientCheck("leibniz", not leibniz, n_leib, leibniz),
    }
    if spec.kind == "heisenberg":
        out["bracket_zero"] = QuotientCheck("bracket_zero", not zero, n_skew, zero)
    return out


def bracket_table(pres: QuotientPresentation) -> list:
    """``[[i, j, [[k, coeff], ...]], ...]`` for ``{rep_i, rep_j}`` within the safe weight."""
    eng = engine(pres.spec)
    rows = []
    for i, a in enumerate(pres.representatives):
        for j, b in enumerate(pres.representatives):
            if weight(a) + weight(b) > pres.safe_weight:
                continue
            red = pres.reduce(eng.prod(a, 0, b)).terms
            rows.append([i, j, sorted([pres.index[m], format_scalar(c)] for m, c in red.items())])
    return rows


# -- variants -------------------------------------------------------------------

VARIANTS = ("zhu", "c2", "zhu_half", "dlm_zhu1", "family")


@dataclass
class VariantData:
    name: str
    f_series: LaurentSeries
    g_series: LaurentSeries
    include_TV: bool


def variant_series(variant: str, N: int, c=1, p_spec=()) -> VariantData:
    """The ``(f, g)`` expansions and TV flag for a named variant.

    Windows extend to ``N + 2``, past every index where ``a(n)b`` can be
    nonzero for states in ``V_{<=N}``.
    """
    trunc = N + 2
    c = to_fraction(c)
    if variant == "zhu":
        if c == 0:
            raise ValueError("zhu variant needs c != 0")
        f = zhu_f(c)
        label, tv = f"zhu(c={format_scalar(c)})", False
    elif variant == "c2":
        return VariantData("c2", LaurentSeries({-1: 1}), LaurentSeries({-2: -1}), False)
    elif variant == "zhu_half":
        f = trig({2: 1, 1: 2, 0: 1})
        label, tv = "zhu_half", True
    elif variant == "dlm_zhu1":
        f = trig({3: -2, 2: -3, 0: 1})
        g = trig({4: 1, 3: 2, 2: 1})
        return VariantData("dlm_zhu1", laurent_expand(f, trunc), laurent_expand(g, trunc), True)
    elif variant == "family":
        f, _ = build_family_F(p_spec, c)
        desc = " + ".join(f"{format_scalar(k)}*d^({j})g" for j, k in p_spec) or "0"
        label, tv = f"family(p = {desc})", True
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return VariantData(label, laurent_expand(f, trunc), laurent_expand(fr_derive(f, 1), trunc), tv)


def build_variant(variant: str, spec: AlgebraSpec, N: int, c=1, p_spec=()) -> QuotientPresentation:
    data = variant_series(variant, N, c, p_spec)
    ideal = build_ideal(spec, data.g_series, N, data.include_TV)
    return QuotientPresentation(ideal, data.f_series, data.name)


def stabilization(variant: str, spec: AlgebraSpec, N: int, c=1, p_spec=()) -> QuotientCheck:
    """Compare per-weight dims at cutoffs ``N`` and ``N + 2`` on weights ``<= N - 2``."""
    lo = build_variant(variant, spec, N, c, p_spec).per_weight_dims()
    hi = build_variant(variant, spec, N + 2, c, p_spec).per_weight_dims()
    upto = max(N - 2, 0)
    ok = lo[: upto + 1] == hi[: upto + 1]
    failures = [] if ok else [{"cutoff_N": lo, "cutoff_N+2": hi}]
    return QuotientCheck("stabilization", ok, upto + 1, failures, f"weights <= {upto}; {STABILIZATION_NOTE}")
