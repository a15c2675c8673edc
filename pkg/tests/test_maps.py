from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from haarlab.grid import GridInterval, RatSet, distance_to_complement, endpoints
from haarlab.maps import (
    omega,
    sigma,
    sigma_inv,
    support_sets,
    tau,
    unilateral_omega,
    unilateral_sigma,
)

from . import oracles

S = GridInterval.standard
H = GridInterval.shifted

std_intervals = st.builds(S, st.integers(-4, 9), st.integers(-60, 60))


@pytest.mark.parametrize(
    "iv, expected",
    [
        (S(0, 0), (F(1, 3), F(4, 3))),
        (S(1, 0), (F(-1, 6), F(1, 3))),
        (S(2, 1), (F(1, 3), F(7, 12))),
    ],
)
def test_sigma(iv, expected):
    assert endpoints(sigma(iv)) == expected
    assert sigma_inv(sigma(iv)) == iv


def test_sigma_rejects_wrong_grid():
    with pytest.raises(ValueError):
        sigma(H(0, 0))
    with pytest.raises(ValueError):
        sigma_inv(S(0, 0))


def test_omega_examples():
    assert endpoints(omega(S(0, 0))) == (F(1, 3), F(5, 6))
    assert endpoints(omega(S(1, 0))) == (F(1, 12), F(1, 3))
    assert distance_to_complement(omega(S(1, 0)), S(1, 0)) == F(1, 12)


@given(std_intervals)
def test_omega_matches_search(iv):
    w = omega(iv)
    assert (w.scale, w.index) == oracles.omega(iv.scale, iv.index)


@pytest.mark.parametrize(
    "eps, iv, expected",
    [
        (0, S(0, 0), (F(-2, 3), F(1, 3))),
        (1, S(0, 0), (F(1, 3), F(4, 3))),
        (0, S(1, 0), (F(-1, 6), F(1, 3))),
    ],
)
def test_unilateral_sigma(eps, iv, expected):
    assert endpoints(unilateral_sigma(eps, iv)) == expected


@given(std_intervals, st.sampled_from([0, 1]))
def test_unilateral_sigma_matches_search(iv, eps):
    got = unilateral_sigma(eps, iv)
    assert (got.scale, got.index) == oracles.sigma_eps(eps, iv.scale, iv.index)


def test_unilateral_omega_examples():
    assert endpoints(unilateral_omega(0, S(0, 0))) == (F(1, 12), F(1, 3))
    assert endpoints(unilateral_omega(1, S(0, 0))) == (F(1, 3), F(7, 12))


@given(std_intervals, st.sampled_from([0, 1]))
def test_unilateral_omega_properties(iv, eps):
    w, s = unilateral_omega(eps, iv), unilateral_sigma(eps, iv)
    assert w.measure * 4 == iv.measure
    assert s.inf <= w.inf and w.sup <= s.sup
    if eps == 0:
        assert w.sup == s.sup
    else:
        assert w.inf == s.inf


def test_tau():
    assert tau(5, S(2, 3)) == S(2, 8)
    assert endpoints(tau(5, S(2, 3))) == (2, F(9, 4))
    assert tau(0, H(3, 1)) == H(3, 1)
    assert tau(-1, tau(1, H(3, 1))) == H(3, 1)


def test_support_sets_examples():
    s = support_sets(S(0, 0))
    assert s.beta0 == RatSet([(F(-2, 3), F(0))]) and s.beta1 == RatSet([(F(1, 3), F(1))])
    assert s.beta0.measure == s.beta1.measure == F(2, 3)
    assert s.gamma == RatSet([(F(-1), F(1))])
    s = support_sets(S(1, 0))
    assert s.alpha0 == sigma(S(1, 0))
    assert s.beta0 == RatSet([(F(-1, 6), F(0))]) and s.beta1 == RatSet([(F(1, 3), F(1, 2))])
    assert s.beta == s.beta0 | s.beta1


@given(std_intervals)
def test_beta_halves_balance(iv):
    s = support_sets(iv)
    assert s.beta0.measure == s.beta1.measure
    assert (s.beta0 | s.beta1).measure <= s.gamma.measure
