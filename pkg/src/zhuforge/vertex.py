"""Heisenberg and universal Virasoro vertex algebras with exact n-th products.

States are rational combinations of PBW monomials.  A monomial is a tuple of
negative generator-mode indices in weakly decreasing order applied to the
vacuum, e.g. ``(-1, -2)`` is ``a(-1)a(-2)|0>`` for the Heisenberg algebra and
``(-2, -3)`` is ``L(-2)L(-3)|0>`` for Virasoro.  Mode indices are those of
the Lie algebra (``alpha_n``, ``L_n``); the conformal vector
``w = L_{-2}|0>`` has n-th product modes ``w(n) = L_{n-1}``.

``a(n)b`` is computed by peeling the leftmost mode off ``a = h(m) a'`` and
using the normal-ordered product expansion::

    (h(m)a')(n)b = sum_i (-1)^i C(m,i) [ h(m-i) a'(n+i) b - (-1)^m a'(m+n-i) h(i) b ]

which is the Borcherds identity specialised to ``h``.  Results are memoized
per basis triple; the memo is the only shared state and its writes are
idempotent.
"""

from __future__ import annotations

import bisect
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product as iproduct
from math import factorial
from typing import Iterable, Mapping, Union

from .errors import WindowInsufficient
from .exactcore import LaurentSeries, binom, format_scalar, to_fraction
from .linalg import axpy, solve_combination

Monomial = tuple
VACUUM: Monomial = ()


@dataclass(frozen=True)
class AlgebraSpec:
    kind: str
    central_charge: Fraction | None = None

    def __post_init__(self):
        if self.kind not in ("heisenberg", "virasoro"):
            raise ValueError(f"unknown algebra kind {self.kind!r}")
        if self.kind == "virasoro":
            object.__setattr__(self, "central_charge", to_fraction(self.central_charge or 0))
        else:
            object.__setattr__(self, "central_charge", None)

    @property
    def symbol(self) -> str:
        return "a" if self.kind == "heisenberg" else "L"

    @property
    def gen_weight(self) -> int:
        return 1 if self.kind == "heisenberg" else 2

    @property
    def max_creation_mode(self) -> int:
        """Largest mode index that creates (basis monomials use modes <= this)."""
        return -1 if self.kind == "heisenberg" else -2

    @property
    def generator(self) -> Monomial:
        return (self.max_creation_mode,)

    def __str__(self):
        if self.kind == "heisenberg":
            return "heisenberg"
        return f"virasoro(c={format_scalar(self.central_charge)})"


def heisenberg() -> AlgebraSpec:
    return AlgebraSpec("heisenberg")


def virasoro(central_charge=Fraction(1, 2)) -> AlgebraSpec:
    return AlgebraSpec("virasoro", to_fraction(central_charge))


def weight(mono: Monomial) -> int:
    return -sum(mono)


def partitions(n: int, min_part: int = 1) -> list[tuple[int, ...]]:
    """Partitions of ``n`` into parts ``>= min_part``, parts in increasing order."""
    if n == 0:
        return [()]
    out = []
    for first in range(min_part, n + 1):
        for rest in partitions(n - first, first):
            out.append((first,) + rest)
    return out


def basis(spec: AlgebraSpec, w: int) -> list[Monomial]:
    """PBW monomials of weight ``w`` in canonical order."""
    min_part = -spec.max_creation_mode
    return sorted(tuple(-p for p in parts) for parts in partitions(w, min_part))


def basis_upto(spec: AlgebraSpec, max_weight: int) -> list[Monomial]:
    return [m for w in range(max_weight + 1) for m in basis(spec, w)]


def monomial_key(mono: Monomial):
    """Weight-major, then lexicographic on the mode tuple."""
    return (weight(mono), mono)


class VAState:
    """Finite rational combination of PBW monomials."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, object] | None = None):
        self.terms = {tuple(m): to_fraction(c) for m, c in (terms or {}).items() if c}

    @classmethod
    def vacuum(cls) -> "VAState":
        return cls({VACUUM: 1})

    @classmethod
    def mono(cls, mono: Iterable[int], coeff=1) -> "VAState":
        return cls({tuple(mono): coeff})

    def is_zero(self) -> bool:
        return not self.terms

    def weight(self) -> int:
        return max((weight(m) for m in self.terms), default=0)

    def __eq__(self, other):
        if isinstance(other, VAState):
            return self.terms == other.terms
        if isinstance(other, Mapping):
            return self.terms == VAState(other).terms
        return NotImplemented

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    def __add__(self, other):
        return VAState(axpy(dict(self.terms), as_vec(other)))

    def __sub__(self, other):
        return VAState(axpy(dict(self.terms), as_vec(other), -1))

    def __neg__(self):
        return VAState({m: -c for m, c in self.terms.items()})

    def __mul__(self, k):
        if not isinstance(k, (int, Fraction)):
            return NotImplemented
        return VAState({m: k * c for m, c in self.terms.items()})

    __rmul__ = __mul__

    def __repr__(self):
        return f"VAState({self.to_string('a')!r})"

    def to_string(self, symbol: str = "a") -> str:
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=monomial_key, reverse=True):
            c = self.terms[m]
            body = monomial_string(m, symbol)
            parts.append(body if c == 1 else f"-{body}" if c == -1 else f"{format_scalar(c)}*{body}")
        return " + ".join(parts).replace("+ -", "- ")


def monomial_string(mono: Monomial, symbol: str = "a") -> str:
    return "".join(f"{symbol}({n})" for n in mono) + "|0>"


StateLike = Union[VAState, Mapping, tuple]


def as_vec(s: StateLike) -> dict:
    if isinstance(s, VAState):
        return s.terms
    if isinstance(s, tuple):
        return {s: 1}
    return dict(s)


class Engine:
    """Memoized mode algebra and n-th products for one :class:`AlgebraSpec`."""

    def __init__(self, spec: AlgebraSpec):
        self.spec = spec
        self.gw = spec.gen_weight
        self.top = spec.max_creation_mode
        self.virasoro = spec.kind == "virasoro"
        self.c = spec.central_charge
        self._act: dict = {}
        self._prod: dict = {}

    # -- generator modes -----------------------------------------------------
    def act(self, n: int, mono: Monomial) -> dict:
        """Generator mode ``alpha_n`` / ``L_n`` applied to a basis monomial."""
        key = (n, mono)
        hit = self._act.get(key)
        if hit is None:
            hit = self._act_virasoro(n, mono) if self.virasoro else self._act_heisenberg(n, mono)
            self._act[key] = hit
        return hit

    @staticmethod
    def _act_heisenberg(n: int, mono: Monomial) -> dict:
        if n < 0:
            # insert keeping weakly decreasing order
            lst = list(mono)
            pos = bisect.bisect_left([-m for m in lst], -n)
            lst.insert(pos, n)
            return {tuple(lst): 1}
        if n == 0:
            return {}
        k = mono.count(-n)
        if not k:
            return {}
        lst = list(mono)
        lst.remove(-n)
        return {tuple(lst): n * k}

    def _act_virasoro(self, n: int, mono: Monomial) -> dict:
        if not mono:
            return {} if n >= -1 else {(n,): 1}
        m1, rest = mono[0], mono[1:]
        if n <= -2 and n >= m1:
            return {(n,) + mono: 1}
        # L_n L_m1 R = L_m1 (L_n R) + [L_n, L_m1] R
        out: dict = {}
        for mono2, c2 in self.act(n, rest).items():
            axpy(out, self.act(m1, mono2), c2)
        if n + m1 == 0:
            central = self.c * Fraction(n**3 - n, 12)
            if central:
                axpy(out, {rest: 1}, central)
        if n != m1:
            axpy(out, self.act(n + m1, rest), n - m1)
        return out

    def act_vec(self, n: int, vec: Mapping) -> dict:
        out: dict = {}
        for mono, c in vec.items():
            axpy(out, self.act(n, mono), c)
        return out

    def state_mode(self, j: int, vec: Mapping) -> dict:
        """Mode ``h(j)`` of the generating state ``h``."""
        return self.act_vec(j - 1 if self.virasoro else j, vec)

    # -- n-th products -------------------------------------------------------
    def prod(self, a: Monomial, n: int, b: Monomial) -> dict:
        """``a(n)b`` for basis monomials; the returned dict must not be mutated."""
        key = (a, n, b)
        hit = self._prod.get(key)
        if hit is not None:
            return hit
        if not a:
            hit = {b: 1} if n == -1 else {}
        elif weight(a) + weight(b) - n - 1 < 0:
            hit = {}
        elif a == (self.top,):
            hit = self.state_mode(n, {b: 1})
        else:
            hit = self._prod_peel(a, n, b)
        self._prod[key] = hit
        return hit

    def _prod_peel(self, a: Monomial, n: int, b: Monomial) -> dict:
        m = a[0] + 1 if self.virasoro else a[0]
        rest = a[1:]
        wr, wb = weight(rest), weight(b)
        out: dict = {}
        sign_m = -1 if m % 2 else 1
        i = 0
        while n + i <= wr + wb - 1:
            cb = binom(m, i) * (-1) ** i
            inner = self.prod(rest, n + i, b)
            if inner:
                axpy(out, self.state_mode(m - i, inner), cb)
            i += 1
        for i in range(self.gw + wb):
            cb = binom(m, i) * (-1) ** i * sign_m
            hb = self.state_mode(i, {b: 1})
            if hb:
                axpy(out, self.prod_vec_right(rest, m + n - i, hb), -cb)
        return out

    def prod_vec_right(self, a: Monomial, n: int, vec: Mapping) -> dict:
        out: dict = {}
        for mono, c in vec.items():
            axpy(out, self.prod(a, n, mono), c)
        return out

    def prod_vec(self, x: Mapping, n: int, y: Mapping) -> dict:
        out: dict = {}
        for ma, ca in x.items():
            for mb, cb in y.items():
                axpy(out, self.prod(ma, n, mb), ca * cb)
        return out

    def translate_vec(self, x: Mapping) -> dict:
        return self.prod_vec(x, -2, {VACUUM: 1})

    def divided_translate(self, x: Mapping, j: int) -> dict:
        out = dict(x)
        for _ in range(j):
            out = self.translate_vec(out)
        return {m: Fraction(c, factorial(j)) for m, c in out.items()} if j > 1 else out

    def max_nonzero_index(self, x: Mapping, y: Mapping) -> int:
        """Largest ``n`` for which ``x(n)y`` can be nonzero by the grading."""
        return max((weight(a) for a in x), default=0) + max((weight(b) for b in y), default=0) - 1


@lru_cache(maxsize=None)
def engine(spec: AlgebraSpec) -> Engine:
    return Engine(spec)


def mode_action(spec: AlgebraSpec, n: int, s: StateLike) -> VAState:
    """Apply the Lie-algebra generator mode ``alpha_n`` / ``L_n`` to ``s``."""
    return VAState(engine(spec).act_vec(n, as_vec(s)))


def nth_product(spec: AlgebraSpec, a: StateLike, n: int, b: StateLike) -> VAState:
    return VAState(engine(spec).prod_vec(as_vec(a), n, as_vec(b)))


def translate(spec: AlgebraSpec, a: StateLike) -> VAState:
    """``T a = a(-2)|0>``."""
    return VAState(engine(spec).translate_vec(as_vec(a)))


def f_product_vec(spec: AlgebraSpec, x: Mapping, f: LaurentSeries, y: Mapping) -> dict:
    """``res_z f(z) x(z) y = sum_n f_n x(n)y`` on raw dicts."""
    eng = engine(spec)
    out: dict = {}
    for a, ca in x.items():
        for b, cb in y.items():
            top = weight(a) + weight(b) - 1
            if f.trunc is not None and f.trunc <= top:
                for n in range(max(f.trunc, f.low), top + 1):
                    if eng.prod(a, n, b):
                        raise WindowInsufficient(
                            f"{monomial_string(a)}({n}){monomial_string(b)} is nonzero but f is truncated at {f.trunc}"
                        )
            for n, fn in f.coeffs.items():
                if n > top:
                    break
                axpy(out, eng.prod(a, n, b), fn * ca * cb)
    return out


def f_product(spec: AlgebraSpec, a: StateLike, f: LaurentSeries, b: StateLike) -> VAState:
    return VAState(f_product_vec(spec, as_vec(a), f, as_vec(b)))


# -- axioms -------------------------------------------------------------------


@dataclass
class AxiomReport:
    mode: str
    spec: str
    checked: int
    failures: list[dict]

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "algebra": self.spec,
            "checked": self.checked,
            "verdict": "pass" if self.passed else "fail",
            "failures": self.failures[:10],
        }


def _vec_str(spec, v):
    return VAState(v).to_string(spec.symbol)


class TripleTables:
    """Memoized iterated products for one basis triple ``(a, b, c)``.

    ``left(p, r) = (a(p)b)(r)c``, ``ab_c(p, r) = a(p)(b(r)c)`` and
    ``ba_c(p, r) = b(p)(a(r)c)``; every component identity over an index box
    is a binomial combination of these.
    """

    def __init__(self, eng: Engine, a, b, c):
        self.eng, self.a, self.b, self.c = eng, a, b, c
        self._left: dict = {}
        self._abc: dict = {}
        self._bac: dict = {}

    def left(self, p: int, r: int) -> dict:
        key = (p, r)
        v = self._left.get(key)
        if v is None:
            ab = self.eng.prod(self.a, p, self.b)
            v = self.eng.prod_vec(ab, r, {self.c: 1}) if ab else {}
            self._left[key] = v
        return v

    def ab_c(self, p: int, r: int) -> dict:
        key = (p, r)
        v = self._abc.get(key)
        if v is None:
            bc = self.eng.prod(self.b, r, self.c)
            v = self.eng.prod_vec_right(self.a, p, bc) if bc else {}
            self._abc[key] = v
        return v

    def ba_c(self, p: int, r: int) -> dict:
        key = (p, r)
        v = self._bac.get(key)
        if v is None:
            ac = self.eng.prod(self.a, r, self.c)
            v = self.eng.prod_vec_right(self.b, p, ac) if ac else {}
            self._bac[key] = v
        return v


def borcherds_sides(eng: Engine, a, b, c, m: int, n: int, k: int, tables: TripleTables | None = None):
    """Both sides of the Borcherds component identity for basis monomials::

        sum_j C(m,j) (a(n+j)b)(m+k-j)c
          = sum_j (-1)^j C(n,j) [a(m+n-j)(b(k+j)c) - (-1)^n b(n+k-j)(a(m+j)c)]
    """
    t = tables or TripleTables(eng, a, b, c)
    wa, wb, wc = weight(a), weight(b), weight(c)
    lhs: dict = {}
    for j in range(max(0, wa + wb - n)):
        axpy(lhs, t.left(n + j, m + k - j), binom(m, j))
    rhs: dict = {}
    sign_n = -1 if n % 2 else 1
    for j in range(max(0, wb + wc - k)):
        cj = binom(n, j)
        if cj:
            axpy(rhs, t.ab_c(m + n - j, k + j), cj if j % 2 == 0 else -cj)
    for j in range(max(0, wa + wc - m)):
        cj = binom(n, j)
        if cj:
            axpy(rhs, t.ba_c(n + k - j, m + j), -sign_n * cj if j % 2 == 0 else sign_n * cj)
    return lhs, rhs


def commutator_sides(eng: Engine, a, b, c, m: int, n: int, tables: TripleTables | None = None):
    """``[a(m), b(n)] c`` against ``sum_j C(m,j) (a(j)b)(m+n-j) c``."""
    t = tables or TripleTables(eng, a, b, c)
    lhs = axpy(dict(t.ab_c(m, n)), t.ba_c(n, m), -1)
    rhs: dict = {}
    for j in range(weight(a) + weight(b)):
        cj = binom(m, j)
        if cj:
            axpy(rhs, t.left(j, m + n - j), cj)
    return lhs, rhs


def skew_sides(eng: Engine, a, b, n: int) -> tuple[dict, dict]:
    lhs = eng.prod(a, n, b)
    rhs: dict = {}
    j = 0
    while n + j <= weight(a) + weight(b) - 1:
        ba = eng.prod(b, n + j, a)
        if ba:
            axpy(rhs, eng.divided_translate(ba, j), -((-1) ** ((n + j) % 2)))
        j += 1
    return lhs, rhs


def translation_sides(eng: Engine, a, b, n: int) -> tuple[dict, dict]:
    lhs = eng.prod_vec(eng.translate_vec({a: 1}), n, {b: 1})
    rhs = {m: -n * c for m, c in eng.prod(a, n - 1, b).items()} if n else {}
    return lhs, rhs


AXIOM_MODES = ("borcherds", "commutator", "skew", "translation")


def _check_first(spec: AlgebraSpec, mode: str, a, states, index_range: int):
    """All cases of ``mode`` whose first state is ``a``: ``(checked, failures)``."""
    eng = engine(spec)
    idx = range(-index_range, index_range + 1)
    failures: list[dict] = []
    checked = 0

    def record(sides, **case):
        nonlocal checked
        checked += 1
        lhs, rhs = sides
        if lhs != rhs:
            label = " ".join(f"{k}={v}" for k, v in case.items())
            failures.append({"case": label, "lhs": _vec_str(spec, lhs), "rhs": _vec_str(spec, rhs)})

    if mode in ("borcherds", "commutator"):
        for b, c in iproduct(states, repeat=2):
            t = TripleTables(eng, a, b, c)
            if mode == "borcherds":
                for m, n, k in iproduct(idx, repeat=3):
                    record(borcherds_sides(eng, a, b, c, m, n, k, t), a=a, b=b, c=c, m=m, n=n, k=k)
            else:
                for m, n in iproduct(idx, repeat=2):
                    record(commutator_sides(eng, a, b, c, m, n, t), a=a, b=b, c=c, m=m, n=n)
    elif mode in ("skew", "translation"):
        sides = skew_sides if mode == "skew" else translation_sides
        for b in states:
            for n in idx:
                record(sides(eng, a, b, n), a=a, b=b, n=n)
    else:
        raise ValueError(f"unknown axiom mode {mode!r}")
    return checked, failures


def thread_count() -> int:
    """Worker cap from ``ZHUFORGE_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("ZHUFORGE_THREADS", "1")))
    except ValueError:
        return 1


def axiom_check(
    spec: AlgebraSpec,
    mode: str,
    sample: Iterable[Monomial] | None = None,
    index_range: int = 4,
    max_weight: int = 4,
) -> AxiomReport:
    """Exhaustive exact check over all sample tuples and indices in ``[-r, r]``.

    With ``ZHUFORGE_THREADS > 1`` the first state of each tuple is farmed out
    to worker processes; results are merged in input order.
    """
    if mode not in AXIOM_MODES:
        raise ValueError(f"unknown axiom mode {mode!r}")
    states = [tuple(s) for s in sample] if sample is not None else basis_upto(spec, max_weight)
    workers = min(thread_count(), len(states))
    args = [(spec, mode, a, states, index_range) for a in states]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_check_first, *zip(*args)))
    else:
        results = [_check_first(*x) for x in args]
    checked = sum(r[0] for r in results)
    failures = [f for r in results for f in r[1]]
    return AxiomReport(mode, str(spec), checked, failures)


def raw_product(spec: AlgebraSpec, a: Monomial, n: int, b: Monomial) -> dict:
    """``a(n)b`` evaluated without the top-level grading shortcut."""
    eng = engine(spec)
    if not a:
        return {b: 1} if n == -1 else {}
    if a == spec.generator:
        return eng.state_mode(n, {b: 1})
    return eng._prod_peel(a, n, b)


def grading_check(spec: AlgebraSpec, max_weight: int = 4, index_range: int = 4) -> AxiomReport:
    """``a(n)b = 0`` whenever ``n >= wt a + wt b``, with the top level fully expanded."""
    states = basis_upto(spec, max_weight)
    failures, checked = [], 0
    for a, b in iproduct(states, repeat=2):
        for n in range(max(weight(a) + weight(b), -index_range), index_range + 1):
            checked += 1
            v = raw_product(spec, a, n, b)
            if v:
                failures.append({"case": f"a={a} b={b} n={n}", "lhs": _vec_str(spec, v), "rhs": "0"})
    return AxiomReport("grading", str(spec), checked, failures)


def general_commutation(spec: AlgebraSpec, a: StateLike, b: StateLike, f: LaurentSeries) -> VAState | None:
    """Solve ``T x = a_(f)b + b_(f(-z))a`` exactly; ``None`` if no solution exists."""
    eng = engine(spec)
    x, y = as_vec(a), as_vec(b)
    target = f_product_vec(spec, x, f, y)
    axpy(target, f_product_vec(spec, y, f.negate_arg(), x))
    if not target:
        return VAState()
    top = max(weight(m) for m in target)
    gens = {m: eng.translate_vec({m: 1}) for m in basis_upto(spec, max(top - 1, 0))}
    coeffs, _ = solve_combination({m: v for m, v in gens.items() if v}, target, key=monomial_key)
    return None if coeffs is None else VAState(coeffs)
