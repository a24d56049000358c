from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zhuforge.funring import RationalDomain, TrigDomain, constant, rational, trig, zhu_f
from zhuforge.parsing import ParseError, parse_function, parse_p_spec, parse_scalar, parse_state
from zhuforge.vertex import VAState, heisenberg, virasoro

H = heisenberg()
VIR = virasoro(Fraction(1, 2))


def test_trig_expressions():
    assert parse_function("c*(u+1)", 1) == zhu_f(1)
    assert parse_function("c*(u+1)", 3) == zhu_f(3)
    assert parse_function("(u+1)^2") == trig({2: 1, 1: 2, 0: 1})
    assert parse_function("u**2 + u/2") == trig({2: 1, 1: Fraction(1, 2)})
    assert parse_function("1 - 3*u^2 - 2*u^3") == trig({3: -2, 2: -3, 0: 1})


def test_rational_expressions():
    assert parse_function("z^-1 + z") == rational({-1: 1, 1: 1})
    assert parse_function("-z^-2 + 1") == rational({-2: -1, 0: 1})
    assert parse_function("2*z^-3/4") == rational({-3: Fraction(1, 2)})
    assert parse_function("(z^-1)^2") == rational({-2: 1})


def test_constants_take_requested_domain():
    assert parse_function("1/2") == constant(TrigDomain(1), Fraction(1, 2))
    assert parse_function("c^2", 2, domain=RationalDomain()) == constant(RationalDomain(), 4)


@pytest.mark.parametrize(
    "text, token",
    [
        ("u + z", "z"),
        ("sin(u)", "sin"),
        ("u/u", "u"),
        ("u^-1", "u^-1"),
        ("0.5*u", "0.5"),
        ("u +", "u +"),
        ("", ""),
    ],
)
def test_parse_errors_name_token(text, token):
    with pytest.raises(ParseError) as info:
        parse_function(text)
    assert info.value.token == token


def test_scalars():
    assert parse_scalar(" -3/4 ") == Fraction(-3, 4)
    with pytest.raises(ParseError):
        parse_scalar("0.75")


def test_states():
    assert parse_state("a(-1)a(-2)|0>", H) == VAState.mono((-1, -2))
    # non-canonical words are normal ordered
    assert parse_state("a(-2)a(-1)|0>", H) == VAState.mono((-1, -2))
    assert parse_state("2*a(-1)|0> - 1/12*|0>", H) == VAState({(-1,): 2, (): Fraction(-1, 12)})
    assert parse_state("a(1)a(-1)|0>", H) == VAState.vacuum()
    assert parse_state("L(2)L(-2)|0>", VIR) == VAState.vacuum() * Fraction(1, 4)
    assert parse_state("|0>", VIR) == VAState.vacuum()


@pytest.mark.parametrize("text", ["L(-2)|0>", "a(-1)", "a(-1)|0> a(-2)|0>", "", "a(x)|0>"])
def test_state_errors(text):
    with pytest.raises(ParseError):
        parse_state(text, H)


def test_p_spec():
    assert parse_p_spec("0:1, 2:-1/3") == [(0, 1), (2, Fraction(-1, 3))]
    assert parse_p_spec("") == []
    for bad in ("1", "x:1", "1:0.5"):
        with pytest.raises(ParseError):
            parse_p_spec(bad)


@settings(max_examples=50, deadline=None)
@given(st.dictionaries(st.integers(0, 4), st.integers(-9, 9).filter(bool), min_size=1, max_size=4))
def test_round_trip_through_to_string(coeffs):
    f = trig(coeffs)
    assert parse_function(f.to_string()) == f
    g = rational({k - 2: v for k, v in coeffs.items()})
    assert parse_function(g.to_string(), domain=RationalDomain()) == g
