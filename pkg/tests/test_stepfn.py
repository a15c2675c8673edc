import json
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from haarlab.grid import GridInterval, RatSet, WindowSpec
from haarlab.maps import tau
from haarlab.stepfn import (
    ZERO,
    StepFunction,
    add,
    cond_exp,
    haar,
    indicator,
    indicator_slice,
    inner_product,
    integral,
    level_slice,
    linear_combination,
    lp_norm,
    mds_check,
    multiply,
    orthogonality_report,
    scale_by,
    subtract,
)

from . import oracles

S = GridInterval.standard
H = GridInterval.shifted


def R(*pairs):
    return RatSet((F(a), F(b)) for a, b in pairs)


def test_haar_examples():
    assert haar(S(0, 0)) == StepFunction([0, F(1, 2), 1], [1, -1])
    assert haar(H(0, 0)) == StepFunction([F(1, 3), F(5, 6), F(4, 3)], [1, -1])
    assert integral(haar(H(3, -7))) == 0


def test_algebra_examples():
    one = indicator(R((0, 1)))
    assert subtract(one, one) == ZERO and not ZERO
    assert add(one, indicator(R((1, 2)))) == indicator(R((0, 2)))
    assert multiply(haar(S(0, 0)), haar(S(0, 0))) == one
    assert indicator(R((0, 1))).breakpoints == (0, 1)


def test_constructor_is_canonical():
    f = StepFunction([0, 1, 2, 3], [1, 1, 0])
    assert f.breakpoints == (0, 2) and f.values == (1,)
    with pytest.raises(ValueError):
        StepFunction([0, 0, 1], [1, 2])
    with pytest.raises(ValueError):
        StepFunction([0, 1], [1, 2])


def test_integrals_and_norms():
    assert integral(haar(S(0, 0))) == 0
    assert integral(scale_by(3, indicator(R((0, F(1, 3)))))) == 1
    assert inner_product(haar(S(0, 0)), haar(S(1, 0))) == 0
    assert integral(indicator(R((0, 4))), R((1, 2), (3, 10))) == 2
    f = scale_by(3, indicator(R((0, F(1, 3)))))
    assert lp_norm(f, 2).pth_power == 3
    assert lp_norm(f, 3).pth_power is None
    assert lp_norm(f, 3).value == pytest.approx(9 ** (1 / 3))


@given(st.sampled_from([S, H]), st.integers(-3, 6), st.integers(-20, 20), st.sampled_from([2, 4, 6]))
def test_haar_norm_is_length(kind, j, k, p):
    I = kind(j, k)
    assert lp_norm(haar(I), p).pth_power == I.measure


@given(st.integers(-3, 6), st.integers(-20, 20), st.integers(1, 9), st.sampled_from([2, 4]))
def test_shift_difference_norm(j, k, m, p):
    I = S(j, k)
    J = tau(m, I)
    g = subtract(indicator(J), indicator(I))
    assert lp_norm(g, p).pth_power == 2 * I.measure


def test_cond_exp_examples():
    assert cond_exp(haar(S(0, 0)), [R((0, 1))]) == ZERO
    assert cond_exp(indicator(R((0, F(1, 2)))), [R((0, 1))]) == scale_by(F(1, 2), indicator(R((0, 1))))
    got = cond_exp(indicator(R((0, 1))), [R((0, 1), (5, 6)), R((1, 5))])
    assert got == scale_by(F(1, 2), indicator(R((0, 1), (5, 6))))
    with pytest.raises(ValueError):
        cond_exp(indicator(R((0, 2))), [R((0, 1))])


small = st.fractions(min_value=-4, max_value=4, max_denominator=6)


@st.composite
def step_functions(draw):
    n = draw(st.integers(0, 5))
    xs = sorted(set(draw(st.lists(small, min_size=n + 1, max_size=n + 1))))
    if len(xs) < 2:
        return ZERO
    vals = draw(st.lists(small, min_size=len(xs) - 1, max_size=len(xs) - 1))
    return StepFunction(xs, vals)


@given(step_functions(), step_functions(), small)
def test_linear_structure(f, g, c):
    assert add(f, ZERO) == f
    assert add(f, scale_by(-1, f)) == ZERO
    assert integral(add(scale_by(c, f), g)) == c * integral(f) + integral(g)
    assert inner_product(f, g) == inner_product(g, f)
    assert lp_norm(f, 2).pth_power == inner_product(f, f)
    assert linear_combination([(c, f), (1, g)]) == scale_by(c, f) + g
    for x in (F(-5), F(-1, 3), F(0), F(1, 2), F(7, 3)):
        assert (f * g)(x) == f(x) * g(x)


@given(step_functions())
def test_cond_exp_averages(f):
    cells = [R((-4, -1), (2, 3)), R((-1, 0)), R((0, 2), (3, 4))]
    e = cond_exp(f, cells)
    assert integral(e) == integral(f)
    assert cond_exp(e, cells) == e


@given(step_functions())
def test_json_roundtrip(f):
    data = json.loads(json.dumps(f.to_json()))
    assert StepFunction.from_json(data) == f


def test_slices():
    u = {S(0, 0): 2, S(1, 0): 1}
    assert level_slice(u, 0) == scale_by(2, haar(S(0, 0)))
    assert indicator_slice(u, 0) == scale_by(2, indicator(S(0, 0)))
    v = {S(2, k): F(k, 3) for k in range(-3, 5)}
    assert lp_norm(level_slice(v, 2), 2) == lp_norm(indicator_slice(v, 2), 2)


def test_mds_examples():
    assert mds_check([(0, haar(S(0, 0))), (1, haar(S(1, 0)))])
    bad = mds_check([(0, haar(S(0, 0))), (0, haar(S(0, 0)).translate(F(1, 2)))])
    assert not bad and bad.condition == "disjoint" and set(bad.witness) == {0, 1}
    coarse = subtract(indicator(R((0, 1))), indicator(R((1, 2))))
    assert mds_check([(0, coarse), (1, haar(S(0, 0)))])


def test_mds_failure_kinds():
    r = mds_check([(0, indicator(R((0, 1))))])
    assert r.condition == "zero_mean" and r.witness == (0,)
    # a finer member that straddles a coarse breakpoint
    r = mds_check([(0, haar(S(0, 0))), (1, haar(S(1, 0)).translate(F(1, 4)))])
    assert r.condition == "conditional_mean" and r.witness == (1,)
    assert r.cell == (0, F(1, 2))


def test_haar_window_is_mds():
    w = WindowSpec(-2, 2, -1, 4)
    fam = [(I.scale, haar(I)) for I in w.intervals()]
    assert mds_check(fam)
    rep = orthogonality_report([f for _, f in fam])
    assert rep.ok and rep.norm_of_sum == rep.sum_of_norms == sum(I.measure for I in w.intervals())


intervals = st.builds(lambda g, j, k: g(j, k), st.sampled_from([S, H]), st.integers(0, 3), st.integers(-3, 3))


@st.composite
def haar_families(draw):
    out = []
    for _ in range(draw(st.integers(1, 5))):
        terms = draw(st.lists(st.tuples(st.integers(-2, 2), intervals), min_size=1, max_size=2))
        f = linear_combination((c, haar(I)) for c, I in terms)
        out.append((draw(st.integers(0, 2)), f))
    return out


@settings(max_examples=300)
@given(haar_families())
def test_mds_matches_direct_check(fam):
    assert bool(mds_check(fam)) == oracles.mds_oracle([(g, list(f.pieces())) for g, f in fam])


@settings(max_examples=200)
@given(haar_families())
def test_mds_implies_pythagoras(fam):
    if mds_check(fam):
        rep = orthogonality_report([f for _, f in fam])
        assert rep.ok and rep.norm_of_sum == rep.sum_of_norms


def test_orthogonality_reports_pair():
    rep = orthogonality_report([haar(S(0, 0)), indicator(R((0, F(1, 2)))), haar(S(3, 40))])
    assert not rep.ok and rep.pair == (0, 1) and rep.inner == F(1, 2)
