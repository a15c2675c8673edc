import math
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from haarlab.grid import GridInterval, RatSet, WindowSpec
from haarlab.partition import (
    PartitionLabel,
    all_labels,
    check_shifted_inclusion,
    classify,
    enumerate_collection,
    filtration_atoms,
    lambda_of,
    partition_window,
    verify_shift_lemma,
)

from . import oracles

S = GridInterval.standard
L = PartitionLabel


@pytest.mark.parametrize("m, lam, K", [(1, 4, 7), (2, 4, 7), (3, 4, 7), (5, 5, 9), (8, 6, 11), (-5, 5, 9), (64, 9, 17)])
def test_lambda_of(m, lam, K):
    p = lambda_of(m)
    assert (p.lam, p.L, p.K) == (lam, lam - 1, K)


def test_lambda_of_zero():
    with pytest.raises(ValueError):
        lambda_of(0)


@pytest.mark.parametrize("m", list(range(2, 70)))
def test_label_count_bound(m):
    assert lambda_of(m).K <= 7 + 2 * math.log2(m)


@pytest.mark.parametrize(
    "m, iv, label",
    [(1, S(4, 0), L(0, 0)), (1, S(4, 15), L(4, 1, 1)), (5, S(5, 0), L(0, 0)), (1, S(0, 0), L(0, 0))],
)
def test_classify_examples(m, iv, label):
    assert classify(m, iv) == label


@given(st.integers(1, 40), st.integers(-3, 9), st.integers(-200, 200))
def test_classify_matches_containment_tests(m, j, k):
    got = classify(m, S(j, k))
    assert (got.i, got.delta, got.eps) == oracles.classify(m, j, k)


def test_classify_negative_m_reflects():
    # m=-1 on [-1/16, 0) mirrors m=1 on [0, 1/16)
    assert classify(-1, S(4, -1)) == classify(1, S(4, 0))
    with pytest.raises(ValueError):
        classify(1, GridInterval.shifted(0, 0))


def test_label_text_roundtrip():
    for lab in all_labels(5):
        assert L.parse(str(lab)) == lab
    assert str(L(4, 1, 1)) == "4:1:1" and str(L(0, 0)) == "0:0"
    assert L(4, 1).matches(L(4, 1, 0)) and not L(4, 1, 1).matches(L(4, 1, 0))


def test_enumerate_collection_examples():
    w = WindowSpec(0, 1, 0, 4)
    zero = enumerate_collection(1, L(0, 0), w)
    assert S(0, 0) in zero and S(4, 0) in zero
    assert S(4, 15) in enumerate_collection(1, L(4, 1, 1), w)
    shifted = enumerate_collection(1, L(4, 1, 1), w, shifted=True)
    assert GridInterval.shifted(4, 15) in shifted


@pytest.mark.parametrize("m", [1, 3, -2, 7])
def test_labels_partition_window(m):
    w = WindowSpec(-2, 6, -1, 6)
    groups = partition_window(m, w)
    members = [I for v in groups.values() for I in v]
    assert len(members) == len(set(members)) == len(w)
    assert set(groups) <= set(all_labels(m))


@pytest.mark.parametrize("m, window", [(1, WindowSpec(0, 16, 0, 8)), (5, WindowSpec(0, 64, 0, 10))])
def test_shift_lemma_holds(m, window):
    report = verify_shift_lemma(m, window)
    assert report.ok, report.violations[:3]
    checks = {r.check for r in report.records}
    assert {"labels_partition", "K_bound", "disjoint_translate", "strong_containment", "nested"} <= checks


def test_fault_injection_is_caught():
    report = verify_shift_lemma(1, WindowSpec(0, 16, 0, 8), fault_inject=True)
    kinds = {r.check for r in report.violations}
    assert "nested" in kinds
    assert all(r.witness for r in report.violations if r.check == "nested")


def test_shift_lemma_rejects_nonpositive_m():
    with pytest.raises(ValueError):
        verify_shift_lemma(-1, WindowSpec(0, 1, 0, 1))


@pytest.mark.parametrize(
    "m, i, iv, window",
    [(1, 0, S(0, 0), WindowSpec(0, 1, 0, 4)), (5, 0, S(0, 0), WindowSpec(0, 1, 0, 5)), (1, 1, S(1, 0), WindowSpec(0, 1, 0, 5))],
)
def test_shifted_inclusion(m, i, iv, window):
    assert check_shifted_inclusion(m, i, iv, window).ok


def test_shifted_inclusion_even_scale_literal():
    # the only straddling child of [0,1) is J=[15/16,1); sigma(J) and its translate sit in [1/3,4/3)
    rep = check_shifted_inclusion(1, 0, S(0, 0), WindowSpec(0, 1, 0, 4), literal=True)
    assert rep.ok and rep.records[0].detail == "1 children"


def test_shifted_inclusion_odd_scale_literal_fails():
    # at odd scales sigma moves left, so sigma(I) loses the right edge the translate needs
    rep = check_shifted_inclusion(1, 1, S(1, 0), WindowSpec(0, 1, 0, 5), literal=True)
    assert not rep.ok
    assert rep.violations[0].witness == (("shifted", 5, 15), ("shifted", 1, 0))


def test_shifted_inclusion_vacuous_and_bad_class():
    assert check_shifted_inclusion(1, 0, S(0, 0), WindowSpec(0, 1, 0, 2)).ok
    with pytest.raises(ValueError):
        check_shifted_inclusion(1, 1, S(0, 0), WindowSpec(0, 1, 0, 4))


def test_filtration_atoms():
    w = WindowSpec(0, 16, 0, 8)
    cells = filtration_atoms(1, L(0, 0), 0, w)
    assert RatSet([(F(0), F(2))]) in cells
    assert sum(c.measure for c in cells) == 16
    assert filtration_atoms(1, L(0, 0), -1, w) == [RatSet([(F(0), F(16))])]


@pytest.mark.parametrize("label", [L(0, 0), L(4, 1, 1), L(1, 1, 0), L(5, 0)])
def test_filtration_atoms_partition_hull(label):
    cells = filtration_atoms(1, label, 6, WindowSpec(0, 8, 0, 6))
    pieces = sorted(p for c in cells for p in c)
    assert all(a[1] <= b[0] for a, b in zip(pieces, pieces[1:]))
    assert sum(c.measure for c in cells) == pieces[-1][1] - pieces[0][0]
