import json
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import Z, filtered_dims, partitions, sympy_laurent, to_package, wick_product
from zhuforge.errors import WeightOverflow
from zhuforge.exactcore import LaurentSeries
from zhuforge.quotient import (
    VARIANTS,
    bracket_table,
    build_ideal,
    build_variant,
    c2_poisson,
    quotient_product,
    reduce,
    stabilization,
    top_weight,
    variant_series,
    verify_algebra,
    zhu_constant,
)
from zhuforge.vertex import VAState, basis_upto, heisenberg, translate, virasoro, weight

H = heisenberg()
VIR = virasoro(Fraction(1, 2))
ALPHA = VAState.mono((-1,))
VAC = VAState.vacuum()


@pytest.fixture(scope="module")
def heis_zhu6():
    return build_variant("zhu", H, 6)


@pytest.fixture(scope="module")
def heis_c2():
    return build_variant("c2", H, 6)


def test_c2_dims():
    assert build_variant("c2", H, 6).per_weight_dims() == [1] * 7
    assert build_variant("c2", VIR, 6).per_weight_dims() == [1, 0, 1, 0, 1, 0, 1]


def test_cutoff_zero_keeps_only_vacuum():
    for spec in (H, VIR):
        for variant in ("zhu", "c2"):
            pres = build_variant(variant, spec, 0)
            assert pres.representatives == [()]
    with pytest.raises(ValueError):
        build_ideal(H, LaurentSeries({-2: -1}), -1)


def test_translations_lie_in_zhu_ideal(heis_zhu6):
    ideal = heis_zhu6.ideal
    assert not ideal.include_TV
    for a in basis_upto(H, 5):
        assert reduce(translate(H, VAState.mono(a)), ideal).is_zero()


def test_reduce_examples(heis_c2, heis_zhu6):
    assert reduce(VAState.mono((-2,)), heis_c2.ideal).is_zero()
    for pres in (heis_c2, heis_zhu6):
        assert reduce(VAC, pres.ideal) == VAC
        for v in pres.ideal.vectors():
            assert reduce(v, pres.ideal).is_zero()
    with pytest.raises(WeightOverflow):
        reduce(VAState.mono((-7,)), heis_c2.ideal)


def test_top_weight():
    g = LaurentSeries({-2: -1})
    assert top_weight((-1,), (-1, -1), g) == 4


def test_product_examples(heis_zhu6):
    pres = heis_zhu6
    b = VAState.mono((-1, -1))
    assert quotient_product(VAC, b, pres) == pres.reduce(b)
    aa = quotient_product(ALPHA, ALPHA, pres)
    expected = pres.reduce(VAState.mono((-1, -1)) + VAC * Fraction(1, 12))
    assert aa == expected
    assert (aa - quotient_product(ALPHA, ALPHA, pres)).is_zero()
    with pytest.raises(WeightOverflow):
        pres.product(VAState.mono((-3,)), VAState.mono((-1, -1, -1, -1)))


def _heis_generators(g: dict, N: int):
    """``a_(g)b`` via the Wick oracle for all basis pairs inside ``V_{<=N}``."""
    low = min(g)
    monos = [p for w in range(N + 1) for p in partitions(w)]
    vecs = []
    for a in monos:
        for b in monos:
            if sum(a) + sum(b) - low - 1 > N:
                continue
            vec: dict = {}
            for n, gn in g.items():
                for k, v in wick_product(a, n, b).items():
                    key = to_package(k)
                    vec[key] = vec.get(key, 0) + gn * v
            vec = {k: v for k, v in vec.items() if v}
            if vec:
                vecs.append(vec)
    return vecs, [to_package(p) for p in monos]


def test_dims_against_rank_oracle(heis_zhu6):
    g = sympy_laurent(sympy.diff(sympy.exp(Z) / (sympy.exp(Z) - 1), Z), 8)
    vecs, basis = _heis_generators(g, 6)
    expected = filtered_dims(vecs, basis, weight)
    assert heis_zhu6.per_weight_dims() == expected
    assert expected == [1] * 7


def test_c2_dims_against_rank_oracle():
    vecs, basis = _heis_generators({-2: Fraction(-1)}, 6)
    assert filtered_dims(vecs, basis, weight) == build_variant("c2", H, 6).per_weight_dims()


def test_verify_algebra_heisenberg(heis_zhu6):
    checks = verify_algebra(heis_zhu6)
    for name, check in checks.items():
        assert check.passed, (name, check.failures)
        assert check.checked > 0
    assert checks["fcomm"].note == "c = 1"


def test_verify_algebra_virasoro():
    pres = build_variant("zhu", VIR, 6)
    assert pres.per_weight_dims() == [1, 0, 1, 0, 1, 0, 1]
    checks = verify_algebra(pres)
    assert all(c.passed for c in checks.values())


def test_verify_algebra_rejects_unknown(heis_c2):
    with pytest.raises(ValueError):
        verify_algebra(heis_c2, ("jacobi",))


@pytest.fixture(scope="module")
def independence_data(heis_zhu6):
    pres = heis_zhu6
    vectors = [v for v in pres.ideal.vectors() if v.weight() <= pres.safe_weight]
    reps = [m for m in pres.representatives if weight(m) <= pres.safe_weight]
    return pres, vectors, reps


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_representative_independence(independence_data, data):
    pres, vectors, reps = independence_data
    a = data.draw(st.sampled_from(reps))
    room = pres.safe_weight - weight(a)
    b = data.draw(st.sampled_from([m for m in reps if weight(m) <= room]))
    ok_left = [v for v in vectors if v.weight() + weight(b) <= pres.safe_weight]
    ok_right = [v for v in vectors if v.weight() + weight(a) <= pres.safe_weight]
    base = pres.product(a, b)
    if ok_left:
        i = data.draw(st.sampled_from(ok_left))
        k = data.draw(st.fractions(-3, 3, max_denominator=4))
        assert pres.product(VAState.mono(a) + i * k, b) == base
    if ok_right:
        i = data.draw(st.sampled_from(ok_right))
        assert pres.product(a, VAState.mono(b) + i) == base


def test_c2_poisson_heisenberg(heis_c2):
    report = c2_poisson(heis_c2)
    assert set(report) == {"skew_symmetry", "leibniz", "bracket_zero"}
    assert all(c.passed for c in report.values())
    assert all(entries == [] for _, _, entries in bracket_table(heis_c2))


def test_c2_poisson_virasoro():
    pres = build_variant("c2", VIR, 6)
    report = c2_poisson(pres)
    assert set(report) == {"skew_symmetry", "leibniz"}
    assert all(c.passed for c in report.values())
    w = pres.index[(-2,)]
    # {w, w} = w(0)w = T w = L(-3)|0> lies in C2
    assert [w, w, []] in bracket_table(pres)


def test_zhu_constant():
    f = LaurentSeries({-1: 1, 0: Fraction(1, 2), 1: Fraction(1, 12)}, 3)
    assert zhu_constant(f, 3) == 1
    assert zhu_constant(LaurentSeries({-1: 1}), 3) == 0
    assert zhu_constant(LaurentSeries({-2: 1, -1: 1}), 3) is None


def test_variant_series_shapes():
    assert VARIANTS == ("zhu", "c2", "zhu_half", "dlm_zhu1", "family")
    half = variant_series("zhu_half", 4)
    fam = variant_series("family", 4, p_spec=[(0, 1)])
    assert half.f_series == fam.f_series and half.g_series == fam.g_series
    assert half.include_TV and fam.include_TV
    assert half.f_series.coeffs == sympy_laurent(sympy.exp(2 * Z) / (sympy.exp(Z) - 1) ** 2, 6)
    dlm = variant_series("dlm_zhu1", 4)
    assert dlm.f_series.low == -3 and dlm.g_series.low == -4
    with pytest.raises(ValueError):
        variant_series("zhu", 4, c=0)
    with pytest.raises(ValueError):
        variant_series("zhu2", 4)


def test_c_to_zero_limit_recovers_c2():
    # the z^n coefficient of the Zhu f is c^(n+1) times its value at c = 1
    base = variant_series("zhu", 6).f_series
    c = Fraction(1, 7)
    scaled = variant_series("zhu", 6, c=c).f_series
    for n, v in base.coeffs.items():
        assert scaled.coeff(n) == c ** (n + 1) * v
    limit = {n: v for n, v in base.coeffs.items() if n + 1 == 0}
    assert limit == variant_series("c2", 6).f_series.coeffs


def test_zhu_half_presentation():
    pres = build_variant("zhu_half", H, 4)
    assert pres.headroom == 1 and pres.safe_weight == 3
    checks = verify_algebra(pres, ("associativity", "unit"))
    assert all(c.passed for c in checks.values())
    assert verify_algebra(pres, ("fcomm",))["fcomm"].note.startswith("not applicable")


def test_dlm_presentation_dims():
    pres = build_variant("dlm_zhu1", H, 6)
    assert pres.per_weight_dims() == [1, 1, 1, 1, 2, 2, 2]
    checks = verify_algebra(pres, ("associativity", "unit"))
    assert all(c.passed for c in checks.values())


def test_stabilization():
    for spec in (H, VIR):
        check = stabilization("zhu", spec, 4)
        assert check.passed and "heuristic" in check.note


def test_presentation_json(heis_c2):
    doc = heis_c2.to_json(verify_algebra(heis_c2, ("unit",)))
    assert list(doc) == [
        "schema",
        "variant",
        "algebra",
        "cutoff",
        "safe_weight",
        "triple_weight",
        "per_weight_dims",
        "representatives",
        "product_table",
        "checks",
        "note",
    ]
    assert doc["representatives"][:3] == ["|0>", "a(-1)|0>", "a(-1)a(-1)|0>"]
    assert doc["checks"]["unit"]["verdict"] == "pass"
    assert json.loads(json.dumps(doc)) == doc
