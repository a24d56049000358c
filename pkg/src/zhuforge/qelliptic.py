"""Normalized Weierstrass series in ``(x, q)`` coordinates.

All ``2*pi*i`` factors are scaled out.  With ``x = e^{2 pi i z} - 1`` the
dictionary to the classical functions is::

    wp_bar   = (2 pi i)^2 P(x, q)
    zeta_bar = (2 pi i)   Z(x, q)
    d/dz     = (2 pi i)   D,      D = (1 + x) d/dx
    G_2k / (2 pi i)^2k = gbar_2k = -B_2k E_2k / (2k)!

so every coefficient handled here is rational.  "Elliptic" is made
operational as membership in the module over ``Q[[q]]`` spanned by ``1`` and
the divided derivatives ``D^(k) P``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

from .errors import WindowEmpty
from .exactcore import BivarSeries, LaurentSeries, bernoulli, binom, exp_series, format_scalar
from .funring import fr_derive, fr_mul, span_membership, zhu_f


def _check_windows(x_window, q_order):
    x_low, x_trunc = x_window
    if q_order < 1:
        raise ValueError("q_order must be at least 1")
    if x_low > -2 or x_trunc < q_order:
        raise ValueError(f"x-window {x_window} must cover [-2, {q_order})")


def _binomial_power(n: int, x_trunc: int) -> dict[int, Fraction]:
    """``(1 + x)^n`` truncated below ``x^x_trunc`` (any integer ``n``)."""
    return {i: Fraction(binom(n, i)) for i in range(x_trunc) if binom(n, i)}


def _lambert_multiples(n: int, q_order: int) -> range:
    return range(n, q_order, n)


def compute_P(x_window=(-12, 12), q_order: int = 8) -> BivarSeries:
    """``P = (1+x)/x^2 + sum_n n q^n/(1-q^n) [(1+x)^n + (1+x)^-n]``."""
    _check_windows(x_window, q_order)
    x_trunc = x_window[1]
    coeffs: dict[tuple[int, int], Fraction] = {(-2, 0): Fraction(1), (-1, 0): Fraction(1)}
    for n in range(1, q_order):
        plus, minus = _binomial_power(n, x_trunc), _binomial_power(-n, x_trunc)
        for i in set(plus) | set(minus):
            c = n * (plus.get(i, 0) + minus.get(i, 0))
            for m in _lambert_multiples(n, q_order):
                coeffs[(i, m)] = coeffs.get((i, m), 0) + c
    return BivarSeries(coeffs, x_trunc, q_order)


def compute_Z(x_window=(-12, 12), q_order: int = 8) -> BivarSeries:
    """``Z = (1+x)/x - sum_n q^n/(1-q^n) [(1+x)^n - (1+x)^-n]``."""
    _check_windows(x_window, q_order)
    x_trunc = x_window[1]
    coeffs: dict[tuple[int, int], Fraction] = {(-1, 0): Fraction(1), (0, 0): Fraction(1)}
    for n in range(1, q_order):
        plus, minus = _binomial_power(n, x_trunc), _binomial_power(-n, x_trunc)
        for i in set(plus) | set(minus):
            c = -(plus.get(i, 0) - minus.get(i, 0))
            for m in _lambert_multiples(n, q_order):
                coeffs[(i, m)] = coeffs.get((i, m), 0) + c
    return BivarSeries(coeffs, x_trunc, q_order)


def d_z(s: BivarSeries, j: int = 1) -> BivarSeries:
    """Divided power ``D^(j)`` of ``D = (1 + x) d/dx``; costs ``j`` exponents of x-window."""
    if j < 0:
        raise ValueError("derivative order must be nonnegative")
    if s.x_trunc - j <= s.x_low:
        raise WindowEmpty(f"no x-window headroom for D^({j}): known window [{s.x_low}, {s.x_trunc})")
    out = s
    for _ in range(j):
        coeffs: dict[tuple[int, int], Fraction] = {}
        for (i, n), c in out.coeffs.items():
            if i == 0:
                continue
            # (1 + x) i x^(i-1) c
            coeffs[(i - 1, n)] = coeffs.get((i - 1, n), 0) + i * c
            coeffs[(i, n)] = coeffs.get((i, n), 0) + i * c
        out = BivarSeries(coeffs, out.x_trunc - 1, out.q_trunc)
    return out.scale(Fraction(1, factorial(j))) if j > 1 else out


def divisor_sigma(k: int, n: int) -> int:
    return sum(d**k for d in range(1, n + 1) if n % d == 0)


def eisenstein(k: int, q_order: int) -> LaurentSeries:
    """``E_2k = 1 - (4k / B_2k) sum_n sigma_{2k-1}(n) q^n``, known below ``q^q_order``."""
    if k < 1:
        raise ValueError("eisenstein index k must be >= 1")
    pref = Fraction(4 * k) / bernoulli(2 * k)
    coeffs = {0: Fraction(1)}
    for n in range(1, q_order):
        coeffs[n] = -pref * divisor_sigma(2 * k - 1, n)
    return LaurentSeries(coeffs, q_order, "q")


def gbar(k: int, q_order: int) -> LaurentSeries:
    """Normalized Eisenstein series ``-B_2k E_2k / (2k)!``."""
    return eisenstein(k, q_order).scale(-bernoulli(2 * k) / factorial(2 * k))


@dataclass
class EllipticDecomposition:
    constant_part: LaurentSeries
    derivative_coeffs: dict[int, LaurentSeries]
    residual: BivarSeries

    @property
    def success(self) -> bool:
        return self.residual.is_zero()

    def to_json(self) -> dict:
        return {
            "constant_part": self.constant_part.to_string(),
            "derivative_coeffs": {str(k): v.to_string() for k, v in sorted(self.derivative_coeffs.items())},
            "residual_terms": len(self.residual.coeffs),
            "residual_zero": self.success,
        }


def p_derivatives(P: BivarSeries, k_max: int) -> list[BivarSeries]:
    out = [P]
    for _ in range(k_max):
        # D^(k+1) = D(D^(k)) / (k+1)
        out.append(d_z(out[-1], 1).scale(Fraction(1, len(out))))
    return out


def ellipticity_check(s: BivarSeries, k_max: int, P: BivarSeries | None = None) -> EllipticDecomposition:
    """Write ``s = alpha + sum_k beta_k D^(k) P`` with q-series coefficients.

    At each q-order the unknowns are fixed by peeling x-poles from the top:
    ``D^(k) P`` has an x-pole of exact order ``k + 2`` in its ``q^0`` part and
    no pole in higher q-orders.  The residual is computed by full
    re-expansion, so it checks the peeling as well.
    """
    if P is None:
        P = compute_P((min(-2, s.x_low), max(s.x_trunc + k_max, s.q_trunc)), s.q_trunc)
    derivs = p_derivatives(P, k_max)
    q_trunc = min(s.q_trunc, P.q_trunc)
    x_trunc = min([s.x_trunc] + [d.x_trunc for d in derivs])
    alpha: dict[int, Fraction] = {}
    beta: dict[int, dict[int, Fraction]] = {k: {} for k in range(k_max + 1)}
    leads = [derivs[k].coeff(-k - 2, 0) for k in range(k_max + 1)]
    for m in range(q_trunc):
        # r = q^m coefficient of s minus contributions of earlier beta orders
        r = dict((i, c) for (i, n), c in s.coeffs.items() if n == m and i < x_trunc)
        for k in range(k_max + 1):
            dk = derivs[k]
            for i_q, b in beta[k].items():
                for (i, n), c in dk.coeffs.items():
                    if n == m - i_q and i < x_trunc:
                        r[i] = r.get(i, 0) - b * c
        for k in range(k_max, -1, -1):
            c = r.get(-k - 2, 0)
            if not c:
                continue
            b = c / leads[k]
            beta[k][m] = b
            for (i, n), dc in derivs[k].coeffs.items():
                if n == 0 and i < x_trunc:
                    r[i] = r.get(i, 0) - b * dc
        if r.get(0):
            alpha[m] = r[0]
    const = LaurentSeries(alpha, q_trunc, "q")
    betas = {k: LaurentSeries(v, q_trunc, "q") for k, v in beta.items() if v}
    recon = BivarSeries.from_q_series(const, x_trunc)
    for k, b in betas.items():
        recon = recon + derivs[k].mul_q_series(b)
    residual = (s - recon).truncate(x_trunc, q_trunc)
    return EllipticDecomposition(const, betas, residual)


@dataclass
class CheckRecord:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"name": self.name, "verdict": "pass" if self.passed else "fail", **self.detail}


def _q_divisible(s: LaurentSeries) -> bool:
    return s.coeffs.get(0, 0) == 0


def closure_check(j_max: int = 4, x_window=(-12, 12), q_order: int = 6) -> list[CheckRecord]:
    """Closure of ``<D^(k) P>`` under multiplication by ``P`` and ``Z`` modulo ``q``.

    (a) ``P * D^(j) P`` decomposes with q-divisible constant part.
    (b) ``q d/dq Z + Z P`` (j = 0) and ``q d/dq D^(j-1) P - j Z D^(j) P``
        (j >= 1) decompose likewise.
    In both cases the q^0 coefficients must agree with the trig-domain span
    certificates for ``g * d^(j) g`` and ``f * d^(j) g`` at c = 1, where
    ``eps(P) = -g`` and ``eps(Z) = f``.
    """
    if j_max < 2:
        raise ValueError("j_max must be at least 2")
    P = compute_P(x_window, q_order)
    Z = compute_Z(x_window, q_order)
    derivs = p_derivatives(P, j_max + 1)
    f = zhu_f(1)
    g = fr_derive(f, 1)
    records = []
    for j in range(j_max + 1):
        s_a = P * derivs[j]
        dec = ellipticity_check(s_a, j + 2, P)
        cert = span_membership(fr_mul(g, fr_derive(g, j)), g)
        # eps(P D^(j) P) = g d^(j) g = sum gamma_k d^(k) g = sum -gamma_k eps(D^(k) P)
        q0 = {k: -v for k, v in cert.coefficients.items() if v}
        records.append(_closure_record(f"P*D^({j})P", dec, q0))
    for j in range(j_max + 1):
        if j == 0:
            s_b = Z.q_dq() + Z * P
            # eps = f * (-g) = sum delta_k d^(k)(-g) = sum delta_k eps(D^(k) P)
            fg_cert = span_membership(fr_mul(f, g), g)
            q0 = {k: v for k, v in fg_cert.coefficients.items() if v}
        else:
            s_b = derivs[j - 1].q_dq() - (Z * derivs[j]).scale(j)
            # eps = -j f D^(j)(-g) = j f d^(j) g = j sum delta_k d^(k) g
            fg_cert = span_membership(fr_mul(f, fr_derive(g, j)), g)
            q0 = {k: -j * v for k, v in fg_cert.coefficients.items() if v}
        dec = ellipticity_check(s_b, j + 3, P)
        name = "q*dq(Z) + Z*P" if j == 0 else f"q*dq(D^({j - 1})P) - {j}*Z*D^({j})P"
        records.append(_closure_record(name, dec, q0))
    return records


def _closure_record(name: str, dec: EllipticDecomposition, q0_expected: dict[int, Fraction]) -> CheckRecord:
    q0_actual = {k: v.coeffs.get(0, 0) for k, v in dec.derivative_coeffs.items() if v.coeffs.get(0, 0)}
    q0_match = q0_actual == q0_expected
    ok = dec.success and _q_divisible(dec.constant_part) and q0_match
    detail = {
        "residual_zero": dec.success,
        "constant_part_q_divisible": _q_divisible(dec.constant_part),
        "q0_matches_funring": q0_match,
        "decomposition": dec.to_json(),
    }
    if not dec.success:
        (i, n), c = next(iter(dec.residual.coeffs.items()))
        detail["first_residual"] = {"x": i, "q": n, "coeff": format_scalar(c)}
    return CheckRecord(name, ok, detail)


def substitute_exp(s: BivarSeries, w_trunc: int) -> dict[int, LaurentSeries]:
    """Substitute ``x = e^w - 1``; returns ``q-power -> w-series``."""
    if s.x_trunc < w_trunc:
        raise WindowEmpty(f"x-window {s.x_trunc} too short for w-order {w_trunc}")
    low = min(s.x_low, 0)
    head = max(0, -low)
    x = exp_series(w_trunc + 2 * head + 2, 1, "w") - 1
    powers = {0: LaurentSeries({0: 1}, None, "w")}
    for i in range(1, s.x_trunc):
        powers[i] = (powers[i - 1] * x).truncate(w_trunc)
    if low < 0:
        xinv = x.invert()
        for i in range(-1, low - 1, -1):
            powers[i] = powers[i + 1] * xinv
    out: dict[int, LaurentSeries] = {}
    for n in range(s.q_trunc):
        acc = LaurentSeries({}, w_trunc, "w")
        for (i, m), c in s.coeffs.items():
            if m == n:
                acc = acc + powers[i].scale(c)
        if acc.trunc is None or acc.trunc < w_trunc:
            raise WindowEmpty("w-expansion lost precision")
        out[n] = acc.truncate(w_trunc)
    return out


def expected_P_expansion(w_trunc: int, q_order: int) -> dict[int, LaurentSeries]:
    """``w^-2 + sum_{k>=1} (2k-1) gbar_2k w^(2k-2)``, split by q-power."""
    out = {n: {} for n in range(q_order)}
    out[0][-2] = Fraction(1)
    for k in range(1, w_trunc // 2 + 2):
        e = 2 * k - 2
        if e >= w_trunc:
            break
        for n, c in gbar(k, q_order).coeffs.items():
            out[n][e] = out[n].get(e, 0) + (2 * k - 1) * c
    return {n: LaurentSeries(v, w_trunc, "w") for n, v in out.items()}


def expected_Z_expansion(w_trunc: int, q_order: int) -> dict[int, LaurentSeries]:
    """``w^-1 + 1/2 - sum_{k>=1} gbar_2k w^(2k-1)``, split by q-power."""
    out = {n: {} for n in range(q_order)}
    out[0][-1] = Fraction(1)
    out[0][0] = Fraction(1, 2)
    for k in range(1, w_trunc // 2 + 2):
        e = 2 * k - 1
        if e >= w_trunc:
            break
        for n, c in gbar(k, q_order).coeffs.items():
            out[n][e] = out[n].get(e, 0) - c
    return {n: LaurentSeries(v, w_trunc, "w") for n, v in out.items()}


def _first_mismatch(actual: dict[int, LaurentSeries], expected: dict[int, LaurentSeries]):
    for n in sorted(expected):
        a, e = actual[n], expected[n]
        for i in sorted(set(a.coeffs) | set(e.coeffs)):
            if a.coeffs.get(i, 0) != e.coeffs.get(i, 0):
                return {"q": n, "w": i, "actual": format_scalar(a.coeffs.get(i, 0)), "expected": format_scalar(e.coeffs.get(i, 0))}
    return None


def verify_expansions(order: int = 10, x_window=(-12, 12), q_order: int = 6) -> list[CheckRecord]:
    """Cross-check the ``x = e^w - 1`` expansions of P and Z through ``w^order``."""
    if order < 4:
        raise ValueError("order must be at least 4")
    w_trunc = order + 1
    P = compute_P(x_window, q_order)
    Z = compute_Z(x_window, q_order)
    records = []
    p_exp = substitute_exp(P, w_trunc)
    mism = _first_mismatch(p_exp, expected_P_expansion(w_trunc, q_order))
    records.append(CheckRecord("P expansion", mism is None, {"first_mismatch": mism} if mism else {}))
    z_exp = substitute_exp(Z, w_trunc)
    mism = _first_mismatch(z_exp, expected_Z_expansion(w_trunc, q_order))
    records.append(CheckRecord("Z expansion", mism is None, {"first_mismatch": mism} if mism else {}))
    const = LaurentSeries({n: p_exp[n].coeffs.get(0, 0) for n in p_exp}, q_order, "q")
    target = eisenstein(1, q_order).scale(Fraction(-1, 12))
    records.append(CheckRecord("P constant term = -E2/12", const == target, {"constant_term": const.to_string()}))
    odd_ok = all(e % 2 == 0 for s in p_exp.values() for e in s.coeffs)
    records.append(CheckRecord("P expansion even in w", odd_ok))
    return records


def bernoulli_identity(n_max: int = 40) -> list[dict]:
    """``(1 - n(n-1)/2) B_n/n! = sum_{i=2}^{n-2} (i-1) B_i/i! * B_{n-i}/(n-i)!`` for ``2 <= n <= n_max``."""
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    rows = []
    for n in range(2, n_max + 1):
        lhs = (1 - Fraction(n * (n - 1), 2)) * bernoulli(n) / factorial(n)
        rhs = sum(
            (Fraction(i - 1) * bernoulli(i) / factorial(i) * bernoulli(n - i) / factorial(n - i) for i in range(2, n - 1)),
            Fraction(0),
        )
        rows.append({"n": n, "lhs": lhs, "rhs": rhs, "passed": lhs == rhs})
    return rows
