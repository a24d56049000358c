"""Exact rational arithmetic and truncated formal series.

Scalars are :class:`fractions.Fraction`.  A :class:`LaurentSeries` stores a
sparse map ``exponent -> coefficient`` together with a truncation point
``trunc``: every coefficient with exponent ``>= trunc`` is unknown, every
coefficient below ``trunc`` that is not stored is exactly zero.  ``trunc=None``
marks an exact (finite) Laurent polynomial.

Window propagation is pessimistic.  A product ``f*g`` is known below
``min(f.trunc + g.low, g.trunc + f.low)``; a derivative loses one exponent;
nothing ever silently claims precision it does not have.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from numbers import Rational
from typing import Iterable, Mapping

from .errors import InvertNonUnit, WindowEmpty

ExactScalar = Fraction

# Defaults for callers that do not pass explicit windows.
DEFAULT_Z_WINDOW = (-8, 16)
DEFAULT_X_WINDOW = (-12, 12)
DEFAULT_Q_ORDER = 8


def to_fraction(value) -> Fraction:
    """Coerce ints, Fractions and strings like ``"-3/4"`` to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational, str)):
        return Fraction(value)
    raise TypeError(f"not an exact scalar: {value!r}")


def format_scalar(value) -> str:
    value = Fraction(value)
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """Bernoulli number ``B_n`` for ``x/(e^x - 1) = sum B_n x^n / n!`` (so ``B_1 = -1/2``)."""
    if n < 0:
        raise ValueError("bernoulli index must be nonnegative")
    if n == 0:
        return Fraction(1)
    if n > 1 and n % 2 == 1:
        return Fraction(0)
    # sum_{k<=n} C(n+1, k) B_k = 0
    acc = sum(comb(n + 1, k) * bernoulli(k) for k in range(n))
    return Fraction(-acc, n + 1)


def _tmin(*values):
    finite = [v for v in values if v is not None]
    return min(finite) if finite else None


def _tadd(a, b):
    return None if a is None or b is None else a + b


class LaurentSeries:
    """Truncated Laurent series with exact rational coefficients.

    Instances are treated as immutable.  ``low`` is the minimum stored
    exponent (``trunc`` for a series with no stored terms).
    """

    __slots__ = ("var", "coeffs", "trunc", "low")

    def __init__(self, coeffs: Mapping[int, object] | Iterable = (), trunc: int | None = None, var: str = "z"):
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        clean: dict[int, Fraction] = {}
        for e, c in items:
            e = int(e)
            if trunc is not None and e >= trunc:
                continue
            c = to_fraction(c)
            if c:
                clean[e] = clean.get(e, 0) + c
                if not clean[e]:
                    del clean[e]
        self.var = var
        self.coeffs = dict(sorted(clean.items()))
        self.trunc = trunc
        if self.coeffs:
            self.low = next(iter(self.coeffs))
        else:
            self.low = trunc if trunc is not None else 0

    # -- constructors ------------------------------------------------------
    @classmethod
    def monomial(cls, exponent: int, coeff=1, trunc: int | None = None, var: str = "z") -> "LaurentSeries":
        return cls({exponent: coeff}, trunc, var)

    @classmethod
    def zero(cls, trunc: int | None = None, var: str = "z") -> "LaurentSeries":
        return cls({}, trunc, var)

    # -- basic access ------------------------------------------------------
    @property
    def is_exact(self) -> bool:
        return self.trunc is None

    @property
    def window(self) -> tuple[int, int | None]:
        return (self.low, self.trunc)

    def coeff(self, n: int) -> Fraction:
        if self.trunc is not None and n >= self.trunc:
            raise WindowEmpty(f"coefficient of {self.var}^{n} unknown (series truncated at {self.trunc})")
        return self.coeffs.get(n, Fraction(0))

    def __getitem__(self, n: int) -> Fraction:
        return self.coeff(n)

    def known(self, n: int) -> bool:
        return self.trunc is None or n < self.trunc

    def truncate(self, trunc: int | None) -> "LaurentSeries":
        return LaurentSeries(self.coeffs, _tmin(self.trunc, trunc), self.var)

    def singular_part(self) -> "LaurentSeries":
        return LaurentSeries({e: c for e, c in self.coeffs.items() if e < 0}, None, self.var)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        return self.var == other.var and self.trunc == other.trunc and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.var, self.trunc, tuple(self.coeffs.items())))

    def agrees_with(self, other: "LaurentSeries") -> bool:
        """Coefficient equality on the common known window."""
        t = _tmin(self.trunc, other.trunc)
        keys = set(self.coeffs) | set(other.coeffs)
        return all(self.coeffs.get(e, 0) == other.coeffs.get(e, 0) for e in keys if t is None or e < t)

    def _check_var(self, other: "LaurentSeries"):
        if self.var != other.var:
            raise ValueError(f"series in different variables: {self.var} vs {other.var}")

    # -- arithmetic --------------------------------------------------------
    def __neg__(self):
        return LaurentSeries({e: -c for e, c in self.coeffs.items()}, self.trunc, self.var)

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = LaurentSeries({0: other}, None, self.var)
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        self._check_var(other)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out.get(e, 0) + c
        return LaurentSeries(out, _tmin(self.trunc, other.trunc), self.var)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = LaurentSeries({0: other}, None, self.var)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, k) -> "LaurentSeries":
        k = to_fraction(k)
        return LaurentSeries({e: k * c for e, c in self.coeffs.items()}, self.trunc, self.var)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        self._check_var(other)
        trunc = _tmin(_tadd(self.trunc, other.low), _tadd(other.trunc, self.low))
        out: dict[int, Fraction] = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = e1 + e2
                if trunc is not None and e >= trunc:
                    continue
                out[e] = out.get(e, 0) + c1 * c2
        return LaurentSeries(out, trunc, self.var)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.invert() ** (-k)
        result = LaurentSeries({0: 1}, None, self.var)
        for _ in range(k):
            result = result * self
        return result

    def derive(self) -> "LaurentSeries":
        """Term-wise derivative ``n f_n z^(n-1)``."""
        return LaurentSeries(
            {e - 1: e * c for e, c in self.coeffs.items()},
            None if self.trunc is None else self.trunc - 1,
            self.var,
        )

    def derive_divided(self, j: int) -> "LaurentSeries":
        """Divided derivative ``d^j/j!``; coefficient ``C(n, j) f_n`` at ``n - j``."""
        return LaurentSeries(
            {e - j: _gbinom(e, j) * c for e, c in self.coeffs.items()},
            None if self.trunc is None else self.trunc - j,
            self.var,
        )

    def invert(self, trunc: int | None = None) -> "LaurentSeries":
        """Multiplicative inverse.

        For ``f = z^v (a_0 + ...)`` known below ``t`` the inverse is known
        below ``t - 2v``.  Exact inputs need an explicit ``trunc``.
        """
        if not self.coeffs:
            raise InvertNonUnit("lowest coefficient is zero or unknown")
        v = self.low
        if self.trunc is not None:
            trunc = _tmin(trunc, self.trunc - 2 * v)
        if trunc is None:
            if len(self.coeffs) == 1:
                return LaurentSeries({-v: 1 / self.coeffs[v]}, None, self.var)
            raise ValueError("inverting an exact non-monomial needs an explicit trunc")
        lead = self.coeffs[v]
        # b_0 = 1/a_0, b_m = -(1/a_0) sum_{i=1..m} a_i b_{m-i}
        rel = {e - v: c for e, c in self.coeffs.items()}
        n_terms = trunc + v
        b: list[Fraction] = []
        for m in range(max(n_terms, 0)):
            if m == 0:
                b.append(1 / lead)
                continue
            acc = Fraction(0)
            for i in range(1, m + 1):
                a_i = rel.get(i)
                if a_i:
                    acc += a_i * b[m - i]
            b.append(-acc / lead)
        return LaurentSeries({m - v: bm for m, bm in enumerate(b)}, trunc, self.var)

    def compose_scale(self, k) -> "LaurentSeries":
        """``f(k z)``; ``k = -1`` negates the argument."""
        k = to_fraction(k)
        if k == 0:
            raise ValueError("scale factor must be nonzero")
        return LaurentSeries({e: c * k**e for e, c in self.coeffs.items()}, self.trunc, self.var)

    def negate_arg(self) -> "LaurentSeries":
        return self.compose_scale(-1)

    def residue(self) -> Fraction:
        return residue(self)

    # -- presentation ------------------------------------------------------
    def __repr__(self):
        return f"LaurentSeries({self.to_string()!r})"

    def to_string(self) -> str:
        parts = []
        for e, c in self.coeffs.items():
            cs = format_scalar(c)
            if e == 0:
                parts.append(cs)
            else:
                mon = self.var if e == 1 else f"{self.var}^{e}"
                parts.append(mon if c == 1 else f"-{mon}" if c == -1 else f"{cs}*{mon}")
        body = " + ".join(parts).replace("+ -", "- ") if parts else "0"
        return body if self.trunc is None else f"{body} + O({self.var}^{self.trunc})"

    def to_json(self) -> dict:
        return {
            "var": self.var,
            "trunc": self.trunc,
            "coeffs": [[e, format_scalar(c)] for e, c in self.coeffs.items()],
        }


@lru_cache(maxsize=8192)
def _gbinom(n: int, k: int) -> int:
    """Binomial coefficient for any integer top argument."""
    if k < 0:
        return 0
    if n >= 0:
        return comb(n, k)
    # C(n, k) = (-1)^k C(k - n - 1, k)
    return (-1) ** k * comb(k - n - 1, k)


binom = _gbinom


def residue(f: LaurentSeries) -> Fraction:
    """Coefficient of ``z^-1``."""
    if f.trunc is not None and f.trunc <= -1:
        raise WindowEmpty("residue requested but z^-1 lies beyond the truncation")
    return f.coeffs.get(-1, Fraction(0))


def exp_series(trunc: int, scale=1, var: str = "z") -> LaurentSeries:
    """``e^(scale*z)`` truncated below ``trunc``."""
    scale = to_fraction(scale)
    return LaurentSeries({n: scale**n / factorial(n) for n in range(max(trunc, 0))}, trunc, var)


def series_arith(op: str, *args, **kwargs) -> LaurentSeries:
    """Dispatch by name: ``add``, ``mul``, ``derive``, ``invert``, ``compose_scale``."""
    if op == "add":
        out = args[0]
        for s in args[1:]:
            out = out + s
    elif op == "mul":
        out = args[0]
        for s in args[1:]:
            out = out * s
    elif op == "derive":
        out = args[0].derive()
    elif op == "invert":
        out = args[0].invert(kwargs.get("trunc"))
    elif op == "compose_scale":
        out = args[0].compose_scale(args[1] if len(args) > 1 else kwargs["k"])
    else:
        raise ValueError(f"unknown series op {op!r}")
    series = [a for a in args if isinstance(a, LaurentSeries)]
    if op == "mul":
        nominal_low = sum(a.low for a in series)
    elif op == "add":
        nominal_low = min(a.low for a in series)
    else:
        nominal_low = out.low if out.coeffs else series[0].low - (1 if op == "derive" else 0)
    if out.trunc is not None and out.trunc <= nominal_low and not out.coeffs:
        raise WindowEmpty(f"{op}: operand windows leave no known coefficient")
    return out


class BivarSeries:
    """Series Laurent in ``x`` and power in ``q``.

    Coefficients are keyed by ``(x_exponent, q_exponent)``.  Every q-order
    below ``q_trunc`` is known on the x-window ``[x_low, x_trunc)``.
    """

    __slots__ = ("coeffs", "x_trunc", "q_trunc", "x_low")

    def __init__(self, coeffs: Mapping[tuple[int, int], object], x_trunc: int, q_trunc: int):
        clean: dict[tuple[int, int], Fraction] = {}
        for (i, n), c in coeffs.items():
            if n < 0:
                raise ValueError("q-exponents must be nonnegative")
            if i >= x_trunc or n >= q_trunc:
                continue
            c = to_fraction(c)
            if c:
                clean[(i, n)] = c
        self.coeffs = dict(sorted(clean.items(), key=lambda kv: (kv[0][1], kv[0][0])))
        self.x_trunc = x_trunc
        self.q_trunc = q_trunc
        self.x_low = min((i for i, _ in self.coeffs), default=x_trunc)

    @classmethod
    def from_x_series(cls, s: LaurentSeries, q_trunc: int, q_power: int = 0) -> "BivarSeries":
        if s.trunc is None:
            raise ValueError("x-series needs a finite truncation to become bivariate")
        return cls({(e, q_power): c for e, c in s.coeffs.items()}, s.trunc, q_trunc)

    @classmethod
    def from_q_series(cls, s: LaurentSeries, x_trunc: int) -> "BivarSeries":
        return cls({(0, e): c for e, c in s.coeffs.items()}, x_trunc, s.trunc if s.trunc is not None else 0)

    def __eq__(self, other):
        if not isinstance(other, BivarSeries):
            return NotImplemented
        return (self.coeffs, self.x_trunc, self.q_trunc) == (other.coeffs, other.x_trunc, other.q_trunc)

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, i: int, n: int) -> Fraction:
        if i >= self.x_trunc or n >= self.q_trunc:
            raise WindowEmpty(f"coefficient x^{i} q^{n} is outside the known window")
        return self.coeffs.get((i, n), Fraction(0))

    def q_coeff(self, n: int) -> LaurentSeries:
        """Coefficient of ``q^n`` as an x-series."""
        if n >= self.q_trunc:
            raise WindowEmpty(f"q^{n} is beyond q-truncation {self.q_trunc}")
        return LaurentSeries({i: c for (i, m), c in self.coeffs.items() if m == n}, self.x_trunc, "x")

    def epsilon(self) -> LaurentSeries:
        """Specialization ``q = 0``."""
        return self.q_coeff(0)

    def x_coeff(self, i: int) -> LaurentSeries:
        """Coefficient of ``x^i`` as a q-series."""
        if i >= self.x_trunc:
            raise WindowEmpty(f"x^{i} is beyond x-truncation {self.x_trunc}")
        return LaurentSeries({n: c for (j, n), c in self.coeffs.items() if j == i}, self.q_trunc, "q")

    def __neg__(self):
        return BivarSeries({k: -c for k, c in self.coeffs.items()}, self.x_trunc, self.q_trunc)

    def __add__(self, other):
        if not isinstance(other, BivarSeries):
            return NotImplemented
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0) + c
        return BivarSeries(out, min(self.x_trunc, other.x_trunc), min(self.q_trunc, other.q_trunc))

    def __sub__(self, other):
        return self + (-other)

    def scale(self, k) -> "BivarSeries":
        k = to_fraction(k)
        return BivarSeries({key: k * c for key, c in self.coeffs.items()}, self.x_trunc, self.q_trunc)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if isinstance(other, LaurentSeries):
            return self.mul_q_series(other)
        if not isinstance(other, BivarSeries):
            return NotImplemented
        x_trunc = min(self.x_trunc + other.x_low, other.x_trunc + self.x_low)
        q_trunc = min(self.q_trunc, other.q_trunc)
        out: dict[tuple[int, int], Fraction] = {}
        for (i1, n1), c1 in self.coeffs.items():
            for (i2, n2), c2 in other.coeffs.items():
                i, n = i1 + i2, n1 + n2
                if i >= x_trunc or n >= q_trunc:
                    continue
                out[(i, n)] = out.get((i, n), 0) + c1 * c2
        return BivarSeries(out, x_trunc, q_trunc)

    __rmul__ = __mul__

    def mul_q_series(self, s: LaurentSeries) -> "BivarSeries":
        if s.var != "q" or s.low < 0:
            raise ValueError("expected a power series in q")
        q_trunc = _tmin(self.q_trunc, s.trunc)
        out: dict[tuple[int, int], Fraction] = {}
        for (i, n1), c1 in self.coeffs.items():
            for n2, c2 in s.coeffs.items():
                n = n1 + n2
                if n < q_trunc:
                    out[(i, n)] = out.get((i, n), 0) + c1 * c2
        return BivarSeries(out, self.x_trunc, q_trunc)

    def q_dq(self) -> "BivarSeries":
        """``q d/dq``."""
        return BivarSeries({(i, n): n * c for (i, n), c in self.coeffs.items()}, self.x_trunc, self.q_trunc)

    def truncate(self, x_trunc: int | None = None, q_trunc: int | None = None) -> "BivarSeries":
        return BivarSeries(
            self.coeffs,
            self.x_trunc if x_trunc is None else min(x_trunc, self.x_trunc),
            self.q_trunc if q_trunc is None else min(q_trunc, self.q_trunc),
        )

    def __repr__(self):
        return f"BivarSeries({len(self.coeffs)} terms, x<{self.x_trunc}, q<{self.q_trunc})"
