import random
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from haarlab.grid import GridInterval, RatSet, WindowSpec
from haarlab.maps import tau
from haarlab.operators import (
    HaarExpansion,
    a_fn,
    apply_Am,
    apply_B,
    apply_Bm,
    apply_S,
    apply_S_inv,
    apply_T,
    apply_U,
    apply_unilateral_S,
    b_fn,
    bm_fn,
    commute_check,
    cross_eps_family,
    identity_check,
    mds_families,
    project,
    u_fn,
)
from haarlab.partition import PartitionLabel, all_labels, classify
from haarlab.stepfn import haar, indicator, integral, lp_norm, mds_check, subtract

S = GridInterval.standard
H = GridInterval.shifted
L = PartitionLabel


def R(*pairs):
    return RatSet((F(a), F(b)) for a, b in pairs)


def one(a, b):
    return indicator(R((a, b)))


def random_expansion(window, seed, density=0.5):
    rng = random.Random(seed)
    return HaarExpansion(
        {I: F(rng.randint(-9, 9), rng.randint(1, 5)) for I in window.intervals() if rng.random() < density}
    )


def test_expansion_basics():
    u = HaarExpansion({S(0, 0): 2, S(1, 0): 0, S(1, 1): F(1, 2)})
    assert len(u) == 2 and S(1, 0) not in u
    assert u - u == HaarExpansion()
    assert u.to_step() == 2 * haar(S(0, 0)) + F(1, 2) * haar(S(1, 1))
    assert u.l2_squared() == 4 + F(1, 4) * F(1, 2)
    assert HaarExpansion.from_normalized(u.to_normalized()) == u
    assert u.to_normalized()[S(1, 1)] == F(1, 4)


def test_T_examples():
    assert apply_T(5, HaarExpansion.basis(S(2, 3))) == HaarExpansion.basis(S(2, 8))
    u = HaarExpansion({S(1, 0): 3, H(2, 1): -1})
    assert apply_T(0, u) == u
    assert apply_T(-4, apply_T(4, u)) == u


def test_S_examples():
    assert apply_S(HaarExpansion.basis(S(0, 0))) == HaarExpansion.basis(H(0, 0))
    assert apply_unilateral_S(0, HaarExpansion.basis(S(0, 0))) == HaarExpansion.basis(H(0, -1))
    u = HaarExpansion({S(0, 0): 1, S(3, -2): F(2, 3)})
    assert apply_S_inv(apply_S(u)) == u
    with pytest.raises(ValueError, match="sD"):
        apply_S(HaarExpansion.basis(H(0, 0)))
    with pytest.raises(ValueError):
        apply_S_inv(u)


@pytest.mark.parametrize("seed", range(4))
def test_S_preserves_l2(seed):
    u = random_expansion(WindowSpec(-2, 2, -1, 4), seed)
    assert apply_S(u).l2_squared() == u.l2_squared()
    for eps in (0, 1):
        assert apply_unilateral_S(eps, u).l2_squared() == u.l2_squared()
    assert lp_norm(apply_S(u).to_step(), 2).pth_power == lp_norm(u.to_step(), 2).pth_power


def test_U_examples():
    assert u_fn(1, S(0, 0)) == subtract(one(1, 2), one(0, 1))
    assert apply_U(1, HaarExpansion.basis(S(0, 0))) == u_fn(1, S(0, 0))


@given(st.integers(-4, 6), st.integers(-30, 30), st.integers(-9, 9).filter(bool))
def test_U_mean_and_norm(j, k, m):
    f = u_fn(m, S(j, k))
    assert integral(f) == 0
    assert lp_norm(f, 4).pth_power == 2 * S(j, k).measure


def test_a_b_examples():
    I = S(0, 0)
    assert a_fn(0, 1, I) == subtract(one(F(1, 3), F(4, 3)), one(F(-2, 3), F(1, 3)))
    assert b_fn(0, I) == subtract(one(F(-2, 3), 0), one(F(1, 3), 1))
    # the eps=1 b function swaps which side lies outside I
    assert b_fn(1, I) == subtract(one(1, F(4, 3)), one(0, F(1, 3)))
    assert integral(b_fn(1, I)) == 0


@given(st.integers(-3, 6), st.integers(-30, 30), st.sampled_from([0, 1]), st.integers(1, 9))
def test_a_b_have_zero_mean(j, k, eps, m):
    I = S(j, k)
    assert integral(a_fn(eps, m, I)) == 0
    assert integral(b_fn(eps, I)) == 0
    assert integral(bm_fn(eps, m, I)) == 0


def test_errors():
    with pytest.raises(ValueError):
        a_fn(2, 1, S(0, 0))
    with pytest.raises(ValueError):
        a_fn(0, 0, S(0, 0))
    with pytest.raises(ValueError):
        bm_fn(0, 0, S(0, 0))
    with pytest.raises(ValueError):
        mds_families(0, L(0, 0), WindowSpec(0, 1, 0, 1))


@pytest.mark.parametrize("eps", [0, 1])
def test_identity_single(eps):
    assert identity_check(1, eps, S(0, 0))
    assert a_fn(eps, 1, S(0, 0)) + bm_fn(eps, 1, S(0, 0)) == subtract(one(1, 2), one(0, 1))


@given(st.integers(-3, 6), st.integers(-30, 30), st.sampled_from([0, 1]), st.integers(-12, 12).filter(bool))
def test_identity_everywhere(j, k, eps, m):
    assert identity_check(m, eps, S(j, k))


@pytest.mark.parametrize("eps", [0, 1])
@pytest.mark.parametrize("m", [1, 3, -2])
def test_operator_identity_on_expansion(m, eps):
    u = random_expansion(WindowSpec(0, 4, 0, 4), seed=m + 10 * eps)
    mir = m < 0
    lhs = apply_U(m, u)
    rhs = apply_Am(eps, m, u) + apply_B(eps, u, mir) - apply_B(eps, apply_T(m, u), mir)
    assert lhs == rhs
    assert apply_Bm(eps, m, u) == apply_B(eps, u, mir) - apply_B(eps, apply_T(m, u), mir)


def test_commutation():
    assert commute_check(1, S(0, 0))
    assert commute_check(0, S(3, 7))
    w = WindowSpec(-4, 4, -2, 6)
    assert all(commute_check(m, I) for m in range(-3, 9) for I in w.intervals())


def test_project_examples():
    u = HaarExpansion({S(4, 0): 1, S(3, 0): 1})
    assert project(1, L(0, 0), u) == HaarExpansion.basis(S(4, 0))
    assert project(1, L(None, 0), u) == u


@pytest.mark.parametrize("m", [1, 5, -3])
def test_projections_sum_to_identity(m):
    u = random_expansion(WindowSpec(0, 8, 0, 5), seed=abs(m))
    parts = [project(m, lab, u) for lab in all_labels(m)]
    total = HaarExpansion()
    for lab, p in zip(all_labels(m), parts):
        total = total + p
        assert project(m, lab, p) == p
    assert total == u
    assert sum(len(p) for p in parts) == len(u)


def test_decomposition_total():
    m, w = 2, WindowSpec(0, 8, 0, 5)
    u = random_expansion(w, seed=7)
    rhs = apply_U(m, project(m, L(None, 0), u))
    for eps in (0, 1):
        v = project(m, L(None, 1, eps), u)
        rhs = rhs + apply_Am(eps, m, v) + apply_Bm(eps, m, v)
    assert rhs == apply_U(m, u)


def test_negative_m_mirrors():
    I = S(2, 3)
    assert u_fn(-1, I) == u_fn(1, S(2, -4)).reflect()
    assert a_fn(0, -2, I) == a_fn(0, 2, S(2, -4)).reflect()


def test_mds_families_shape():
    w = WindowSpec(0, 16, 0, 8)
    fam = mds_families(1, L(0, 0), w)
    assert set(fam) == {"U"}
    gens = [g for g, _ in fam["U"]]
    assert gens == sorted(gens)
    fam = mds_families(1, L(4, 1, 1), w)
    assert set(fam) == {"A", "Bm", "Bpair"}
    assert len(fam["Bpair"]) == 2 * len(fam["A"])
    with pytest.raises(ValueError):
        mds_families(1, L(4, 1), w)


def test_shift_family_is_mds():
    # coarser U h_[0,1) is constant on the support of finer members
    w = WindowSpec(0, 16, 0, 8)
    assert mds_check(mds_families(1, L(0, 0), w)["U"])


@pytest.mark.parametrize("m", [1, 2, 3, 8])
def test_a_families_are_mds(m):
    w = WindowSpec(0, 16, 0, 6)
    for lab in all_labels(m):
        if lab.delta == 1:
            assert mds_check(mds_families(m, lab, w)["A"]), lab


def test_b_pair_overlap_witness():
    # neighbours in one eps=0 class share beta_1 of the left and beta_0 of the right
    I, J = S(4, 30), S(4, 31)
    assert classify(3, I) == classify(3, J) == L(0, 1, 0)
    assert tau(1, I) == J
    overlap = b_fn(0, I).support & b_fn(0, J).support
    assert overlap == R((F(91, 48), F(31, 16)))
    assert b_fn(0, I)(F(91, 48)) == -1 and b_fn(0, J)(F(91, 48)) == 1
    res = mds_check(mds_families(3, L(0, 1, 0), WindowSpec(0, 16, 0, 8))["Bm"])
    assert not res.ok and res.condition == "disjoint"


def test_cross_eps_family():
    fam = cross_eps_family(1, 4, 0, WindowSpec(0, 4, 0, 4))
    assert fam and all(integral(f) == 0 for _, f in fam)
    assert cross_eps_family(1, 4, 0, WindowSpec(0, 1, 0, 0)) == []
