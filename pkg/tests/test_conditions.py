from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zhuforge.conditions import (
    CONDITION_NAMES,
    build_family_F,
    check_conditions,
    check_F_family,
    family_generator,
    solve_ode,
)
from zhuforge.funring import (
    ALLOW_CONSTANTS,
    STRICT,
    TV_SYMMETRIC,
    fr_derive,
    laurent_expand,
    rational,
    span_membership,
    trig,
    zhu_f,
)

DLM_F = trig({3: -2, 2: -3, 0: 1})
DLM_G = trig({4: 1, 3: 2, 2: 1})


def test_zhu_pair_passes_strict():
    for c in (1, 2, Fraction(-3, 2)):
        f = zhu_f(c)
        report = check_conditions(f, fr_derive(f, 1), 6, STRICT)
        assert report.passed, report.failures()
        assert set(report.verdicts) == set(CONDITION_NAMES)


def test_c2_pair_passes_strict():
    report = check_conditions(rational({-1: 1}), rational({-2: -1}), 6)
    assert report.passed


def test_tampered_pair_fails_with_witness():
    report = check_conditions(rational({-1: 1, 1: 1}), rational({-2: -1, 0: 1}), 6)
    assert set(report.failures()) == {"left_ideal", "assoc_product", "right_ideal"}
    left = report.verdicts["left_ideal"]
    assert left.j == 0 and left.witness
    # g * df = z^-4 - 2 z^-2 + 1 is among the failures (j = 1)
    assert (1, "1 - 2*z^-2 + z^-4") in left.failures
    doc = report.to_json()
    assert doc["conditions"]["left_ideal"]["verdict"] == "fail"
    assert "all_failures" in doc["conditions"]["left_ideal"]


def test_unit_and_singularity_failures():
    report = check_conditions(trig({1: 2, 0: 2}), trig({2: -4, 1: -4}), 3)
    assert not report.verdicts["unit"].passed
    assert report.verdicts["unit"].witness == "res f = 2"
    report = check_conditions(rational({-1: 1}), rational({1: 1}), 3)
    assert not report.verdicts["g_singular"].passed


def test_j_max_floor():
    with pytest.raises(ValueError):
        check_conditions(zhu_f(1), fr_derive(zhu_f(1), 1), 1)


def test_solve_ode_examples():
    assert solve_ode(0, 8).coeffs == {-1: 1}
    s = solve_ode(Fraction(1, 2), 3)
    assert s.coeffs == {-1: 1, 0: Fraction(1, 2), 1: Fraction(1, 12), 3: Fraction(-1, 720)}
    assert s.trunc == 4


def test_solve_ode_matches_trig_expansion():
    for c in (1, 2, Fraction(2, 3)):
        s = solve_ode(Fraction(c) / 2, 12)
        assert s.agrees_with(laurent_expand(zhu_f(c), 13))


@settings(max_examples=40, deadline=None)
@given(st.fractions(-4, 4, max_denominator=5))
def test_solve_ode_properties(f0):
    s = solve_ode(f0, 10)
    assert s.coeff(2) == 0
    assert all(s.coeff(n) == 0 for n in range(2, 11, 2))
    # f(-z) f(z) = f'(z) on the known window
    assert (s.negate_arg() * s - s.derive()).is_zero()


def test_family_generator_sign():
    f = zhu_f(1)
    g = family_generator(1)
    assert g == trig({2: 1, 1: 1})
    assert g == -fr_derive(f, 1)


def test_family_examples():
    F, _ = build_family_F([])
    assert F == zhu_f(1)
    assert check_F_family([]).passed
    F, Fp = build_family_F([(0, 1)])
    assert F == trig({2: 1, 1: 2, 0: 1})
    assert check_F_family([(0, 1)]).passed
    F, _ = build_family_F([(1, 1)])
    assert F == DLM_F
    assert check_F_family([(1, 1)]).passed


def test_family_report_is_tagged():
    report = check_F_family([(0, 1)])
    assert report.variant.startswith("family(TV-augmented)")
    assert report.mode == ALLOW_CONSTANTS


def test_generic_family_members_need_reflections():
    p = [(0, -1)]
    assert set(check_F_family(p).failures()) == {"assoc_product", "right_ideal"}
    assert check_F_family(p, mode=TV_SYMMETRIC).passed


def test_odd_order_part_must_be_dg():
    for p in ([(1, -1)], [(1, 2)], [(3, 1)], [(1, 1), (3, 1)]):
        assert not check_F_family(p, j_max=4, mode=TV_SYMMETRIC).passed


even_terms = st.lists(st.tuples(st.sampled_from([0, 2]), st.fractions(-2, 2, max_denominator=3).filter(bool)), max_size=2)


@settings(max_examples=15, deadline=None)
@given(even_terms, st.booleans())
def test_even_family_members_pass_tv_symmetric(p_spec, with_dg):
    if with_dg:
        p_spec = p_spec + [(1, 1)]
    assert check_F_family(p_spec, j_max=4, mode=TV_SYMMETRIC).passed


def test_dlm_pair_allow_constants():
    report = check_conditions(DLM_F, DLM_G, 6, ALLOW_CONSTANTS)
    assert report.passed
    # g is a multiple of F' here
    assert span_membership(fr_derive(DLM_F, 1), DLM_G).member
