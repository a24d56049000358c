from fractions import Fraction

import pytest
import sympy

from oracles import Z as W, sympy_bernoulli, sympy_laurent
from zhuforge.exactcore import BivarSeries, LaurentSeries
from zhuforge.qelliptic import (
    bernoulli_identity,
    closure_check,
    compute_P,
    compute_Z,
    d_z,
    divisor_sigma,
    eisenstein,
    ellipticity_check,
    gbar,
    substitute_exp,
    verify_expansions,
)


def test_P_and_Z_mod_q():
    P = compute_P((-4, 8), 4)
    Zs = compute_Z((-4, 8), 4)
    assert P.epsilon().coeffs == {-2: 1, -1: 1}
    assert Zs.epsilon().coeffs == {-1: 1, 0: 1}


def test_Z_q1_coefficient():
    Zs = compute_Z((-4, 8), 3)
    # -[(1+x) - (1+x)^-1] = -(2x - x^2 + x^3 - ...)
    plus = {0: 1, 1: 1}
    expected = {i: -(plus.get(i, 0) - (-1) ** i) for i in range(8)}
    expected = {i: c for i, c in expected.items() if c}
    assert Zs.q_coeff(1).coeffs == expected


def test_d_z_examples():
    x = BivarSeries({(1, 0): 1}, 6, 3)
    assert d_z(x).coeffs == {(0, 0): 1, (1, 0): 1}
    s = BivarSeries({(-2, 0): 1, (-1, 0): 1}, 6, 3)
    assert d_z(s).coeffs == {(-3, 0): -2, (-2, 0): -3, (-1, 0): -1}
    q_only = BivarSeries({(0, 1): 5, (0, 2): 1}, 6, 3)
    assert d_z(q_only).is_zero()
    with pytest.raises(ValueError):
        d_z(x, -1)


def test_eisenstein_examples():
    assert eisenstein(1, 4) == LaurentSeries({0: 1, 1: -24, 2: -72, 3: -96}, 4, "q")
    assert eisenstein(2, 2) == LaurentSeries({0: 1, 1: 240}, 2, "q")
    assert eisenstein(5, 1).coeffs == {0: 1}
    with pytest.raises(ValueError):
        eisenstein(0, 3)


def test_eisenstein_against_sympy():
    for k in range(1, 6):
        e = eisenstein(k, 8)
        pref = Fraction(4 * k) / sympy_bernoulli(2 * k)
        for n in range(1, 8):
            assert e.coeff(n) == -pref * int(sympy.divisor_sigma(n, 2 * k - 1))
    assert divisor_sigma(3, 6) == 1 + 8 + 27 + 216
    assert gbar(1, 3).coeffs == {0: Fraction(-1, 12), 1: 2, 2: 6}


def _sympy_P_qcoeff(n):
    if n == 0:
        return sympy.exp(W) / (sympy.exp(W) - 1) ** 2
    return sum(d * (sympy.exp(d * W) + sympy.exp(-d * W)) for d in sympy.divisors(n))


def _sympy_Z_qcoeff(n):
    if n == 0:
        return sympy.exp(W) / (sympy.exp(W) - 1)
    return -sum(sympy.exp(d * W) - sympy.exp(-d * W) for d in sympy.divisors(n))


def test_w_expansions_against_sympy():
    P = compute_P((-2, 10), 4)
    Zs = compute_Z((-2, 10), 4)
    p_exp = substitute_exp(P, 7)
    z_exp = substitute_exp(Zs, 7)
    for n in range(4):
        assert p_exp[n].coeffs == sympy_laurent(_sympy_P_qcoeff(n), 7), n
        assert z_exp[n].coeffs == sympy_laurent(_sympy_Z_qcoeff(n), 7), n


def test_ellipticity_trivial_and_square():
    P = compute_P((-12, 12), 5)
    dec = ellipticity_check(P, 2, P)
    assert dec.success
    assert {k: v.coeffs for k, v in dec.derivative_coeffs.items()} == {0: {0: 1}}
    dec = ellipticity_check(P * P, 3, P)
    assert dec.success
    assert not dec.constant_part.is_zero()
    assert dec.constant_part.coeff(0) == 0
    assert 2 in dec.derivative_coeffs


def test_ellipticity_of_qdq_Z_plus_ZP():
    P = compute_P((-12, 12), 6)
    Zs = compute_Z((-12, 12), 6)
    dec = ellipticity_check(Zs.q_dq() + Zs * P, 3, P)
    assert dec.success and dec.residual.is_zero()


def test_non_elliptic_leaves_residual():
    P = compute_P((-12, 12), 4)
    Zs = compute_Z((-12, 12), 4)
    assert not ellipticity_check(Zs, 3, P).success


def test_closure_check():
    records = closure_check(4, (-12, 12), 6)
    assert len(records) == 10
    for r in records:
        assert r.passed, r.name
        assert r.detail["constant_part_q_divisible"]
        assert r.detail["q0_matches_funring"]
    with pytest.raises(ValueError):
        closure_check(1)


def test_verify_expansions():
    records = verify_expansions(10, (-12, 12), 6)
    assert [r.name for r in records] == ["P expansion", "Z expansion", "P constant term = -E2/12", "P expansion even in w"]
    assert all(r.passed for r in records)


def test_bernoulli_identity():
    rows = bernoulli_identity(40)
    assert len(rows) == 39
    assert all(r["passed"] for r in rows)
    assert rows[0]["lhs"] == rows[0]["rhs"] == 0
    four = rows[2]
    assert four["n"] == 4 and four["lhs"] == four["rhs"] == Fraction(1, 144)
    with pytest.raises(ValueError):
        bernoulli_identity(1)
