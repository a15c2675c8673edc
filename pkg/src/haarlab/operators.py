"""Operators on finite Haar expansions and their martingale decompositions.

An expansion stores plain coefficients, ``u = sum c_I h_I``.  Coefficient
transport operators (``T_m``, ``S``, ``S_0``, ``S_1``) return expansions; the
operators whose images leave the Haar system (``U_m`` and its pieces
``A_m``, ``B``, ``B_m``) return exact step functions.

For ``m >= 1`` and ``eps`` in ``{0, 1}``::

    a_I = 1[alpha_eps(tau_m I)] - 1[alpha_eps(I)]
    b_I = 1[alpha_eps(I) \\ I]   - 1[I \\ alpha_eps(I)]

so that ``U_m h_I = a_I + b_I - b_{tau_m I}``.  For ``eps = 0`` the ``b``
function is ``1[beta_0] - 1[beta_1]``.  Negative ``m`` conjugates everything
with the reflection ``x -> -x``.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Mapping

from .grid import Grid, GridInterval, WindowSpec, as_ratset, reflect_interval
from .maps import sigma, sigma_inv, support_sets, tau, unilateral_sigma
from .partition import PartitionLabel, classify, enumerate_collection
from .stepfn import StepFunction, indicator, linear_combination


class HaarExpansion(Mapping[GridInterval, Fraction]):
    """Finite ``{interval: coefficient}`` table with zero coefficients dropped."""

    __slots__ = ("_coef",)

    def __init__(self, coefficients: Mapping[GridInterval, object] | Iterable = ()):
        items = coefficients.items() if isinstance(coefficients, Mapping) else coefficients
        coef: dict[GridInterval, Fraction] = {}
        for key, c in items:
            if not isinstance(key, GridInterval):
                key = GridInterval(*key)
            total = coef.get(key, 0) + Fraction(c)
            if total:
                coef[key] = total
            else:
                coef.pop(key, None)
        self._coef = coef

    @classmethod
    def basis(cls, interval: GridInterval) -> "HaarExpansion":
        return cls({interval: 1})

    @classmethod
    def from_normalized(cls, coefficients: Mapping[GridInterval, object]) -> "HaarExpansion":
        """From ``u = sum u_I h_I / |I|`` (coefficients scaled by inverse length)."""
        return cls({I: Fraction(c) / I.measure for I, c in coefficients.items()})

    def to_normalized(self) -> dict[GridInterval, Fraction]:
        return {I: c * I.measure for I, c in self._coef.items()}

    def __getitem__(self, key: GridInterval) -> Fraction:
        return self._coef[key]

    def __iter__(self) -> Iterator[GridInterval]:
        return iter(self._coef)

    def __len__(self) -> int:
        return len(self._coef)

    def __eq__(self, other) -> bool:
        if isinstance(other, HaarExpansion):
            return self._coef == other._coef
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self._coef.items()))

    def __repr__(self) -> str:
        body = ", ".join(f"{I!r}: {c}" for I, c in sorted(self._coef.items()))
        return f"HaarExpansion({{{body}}})"

    def __add__(self, other: "HaarExpansion") -> "HaarExpansion":
        return HaarExpansion(list(self.items()) + list(other.items()))

    def __sub__(self, other: "HaarExpansion") -> "HaarExpansion":
        return self + other.scaled(-1)

    def scaled(self, c) -> "HaarExpansion":
        return HaarExpansion({I: c * v for I, v in self.items()})

    def to_step(self) -> StepFunction:
        from .stepfn import haar

        return linear_combination((c, haar(I)) for I, c in self.items())

    def l2_squared(self) -> Fraction:
        """``||u||_2^2``; the Haar functions are orthogonal with ``||h_I||_2^2 = |I|``."""
        return sum((c * c * I.measure for I, c in self.items()), Fraction(0))


def _transport(u: Mapping, fn) -> HaarExpansion:
    return HaarExpansion({fn(I): c for I, c in u.items()})


def _require_grid(u: Mapping, grid: Grid, name: str) -> None:
    for I in u:
        if I.grid != grid:
            raise ValueError(f"{name}: key {I!r} is not on the {grid.name.lower()} grid")


def apply_T(m: int, u: Mapping) -> HaarExpansion:
    return _transport(u, lambda I: tau(m, I))


def apply_S(u: Mapping) -> HaarExpansion:
    _require_grid(u, Grid.STANDARD, "apply_S")
    return _transport(u, sigma)


def apply_S_inv(u: Mapping) -> HaarExpansion:
    _require_grid(u, Grid.SHIFTED, "apply_S_inv")
    return _transport(u, sigma_inv)


def apply_unilateral_S(eps: int, u: Mapping) -> HaarExpansion:
    _require_grid(u, Grid.STANDARD, "apply_unilateral_S")
    return _transport(u, lambda I: unilateral_sigma(eps, I))


def u_fn(m: int, interval: GridInterval) -> StepFunction:
    """``U_m h_I = 1[tau_m I] - 1[I]``."""
    return linear_combination(((1, indicator(tau(m, interval))), (-1, indicator(interval))))


def apply_U(m: int, u: Mapping) -> StepFunction:
    return linear_combination((c, u_fn(m, I)) for I, c in u.items())


# ---------------------------------------------------------------------------
# a and b functions
# ---------------------------------------------------------------------------


def _check_eps(eps: int) -> None:
    if eps not in (0, 1):
        raise ValueError(f"eps must be 0 or 1, got {eps}")


def a_fn(eps: int, m: int, interval: GridInterval) -> StepFunction:
    """``1[alpha_eps(tau_m I)] - 1[alpha_eps(I)]``; negative ``m`` by reflection."""
    _check_eps(eps)
    if m == 0:
        raise ValueError("m must be nonzero")
    if m < 0:
        return a_fn(eps, -m, reflect_interval(interval)).reflect()
    return linear_combination(
        (
            (1, indicator(unilateral_sigma(eps, tau(m, interval)))),
            (-1, indicator(unilateral_sigma(eps, interval))),
        )
    )


@lru_cache(maxsize=1 << 16)
def b_fn(eps: int, interval: GridInterval, mirrored: bool = False) -> StepFunction:
    """``1[alpha_eps(I) \\ I] - 1[I \\ alpha_eps(I)]``.

    ``mirrored`` gives the version used for negative shifts, ``R b(R I)``.
    """
    _check_eps(eps)
    if mirrored:
        return b_fn(eps, reflect_interval(interval)).reflect()
    s = support_sets(interval)
    own = as_ratset(interval)
    assoc = s.alpha0 if eps == 0 else s.alpha1
    outside = as_ratset(assoc) - own
    inside = own - as_ratset(assoc)
    return linear_combination(((1, indicator(outside)), (-1, indicator(inside))))


def bm_fn(eps: int, m: int, interval: GridInterval) -> StepFunction:
    """``b_I - b_{tau_m I}``."""
    if m == 0:
        raise ValueError("m must be nonzero")
    mir = m < 0
    return linear_combination(
        ((1, b_fn(eps, interval, mir)), (-1, b_fn(eps, tau(m, interval), mir)))
    )


def apply_Am(eps: int, m: int, u: Mapping) -> StepFunction:
    _require_grid(u, Grid.STANDARD, "apply_Am")
    return linear_combination((c, a_fn(eps, m, I)) for I, c in u.items())


def apply_B(eps: int, u: Mapping, mirrored: bool = False) -> StepFunction:
    _require_grid(u, Grid.STANDARD, "apply_B")
    return linear_combination((c, b_fn(eps, I, mirrored)) for I, c in u.items())


def apply_Bm(eps: int, m: int, u: Mapping) -> StepFunction:
    _require_grid(u, Grid.STANDARD, "apply_Bm")
    return linear_combination((c, bm_fn(eps, m, I)) for I, c in u.items())


# ---------------------------------------------------------------------------
# Projections
# ---------------------------------------------------------------------------


def project(m: int, label: PartitionLabel, u: Mapping) -> HaarExpansion:
    """Keep the coefficients whose interval falls under ``label``.

    A label without ``eps`` keeps both ``eps`` classes; ``label.i = None``
    (built as ``PartitionLabel(None, delta, eps)``) keeps every ``i``.
    """
    _require_grid(u, Grid.STANDARD, "project")
    out = {}
    for I, c in u.items():
        full = classify(m, I)
        if label.i is not None and label.i != full.i:
            continue
        if label.delta != full.delta or (label.eps is not None and label.eps != full.eps):
            continue
        out[I] = c
    return HaarExpansion(out)


# ---------------------------------------------------------------------------
# Exact identities
# ---------------------------------------------------------------------------


def identity_check(m: int, eps: int, interval: GridInterval) -> bool:
    """``a_I + b_I - b_{tau_m I} == 1[tau_m I] - 1[I]`` as step functions."""
    return a_fn(eps, m, interval) + bm_fn(eps, m, interval) == u_fn(m, interval)


def commute_check(m: int, interval: GridInterval) -> bool:
    """``sigma`` and both one-sided variants commute with ``tau_m`` at ``interval``."""
    if sigma(tau(m, interval)) != tau(m, sigma(interval)):
        return False
    return all(
        unilateral_sigma(e, tau(m, interval)) == tau(m, unilateral_sigma(e, interval))
        for e in (0, 1)
    )


# ---------------------------------------------------------------------------
# Families of the decomposition
# ---------------------------------------------------------------------------

FamilyMap = dict[str, list[tuple[int, StepFunction]]]


def mds_families(m: int, label: PartitionLabel, window: WindowSpec) -> FamilyMap:
    """Families that should be martingale difference sequences for ``label``.

    Generations are the scales of the source intervals.  For ``delta = 0``
    the family is ``{U_m h_I}`` (key ``"U"``).  For ``(i, 1, eps)`` the keys are
    ``"A"`` (``a_I``), ``"Bm"`` (``b_I - b_{tau_m I}``) and ``"Bpair"`` (``b_I``
    and ``b_{tau_m I}`` as separate members of the same generation).
    """
    if m < 1:
        raise ValueError("mds_families requires m >= 1")
    members = family_members(m, label, window)
    if label.delta == 0:
        return {"U": [(I.scale, u_fn(m, I)) for I in members]}
    if label.eps is None:
        raise ValueError("a delta=1 label needs eps for the decomposition families")
    eps = label.eps
    pair: list[tuple[int, StepFunction]] = []
    for I in members:
        pair.append((I.scale, b_fn(eps, I)))
        pair.append((I.scale, b_fn(eps, tau(m, I))))
    return {
        "A": [(I.scale, a_fn(eps, m, I)) for I in members],
        "Bm": [(I.scale, bm_fn(eps, m, I)) for I in members],
        "Bpair": pair,
    }


def family_members(m: int, label: PartitionLabel, window: WindowSpec) -> list[GridInterval]:
    """Source intervals of the families, ordered by scale then index."""
    return enumerate_collection(m, label, window)


def member_source(family: str, n: int, members: list[GridInterval], m: int) -> GridInterval:
    """Interval behind entry ``n`` of a family; the pair family holds ``b_I`` then ``b_{tau I}``."""
    if family == "Bpair":
        I = members[n // 2]
        return I if n % 2 == 0 else tau(m, I)
    return members[n]


def cross_eps_family(m: int, i: int, a_eps: int, window: WindowSpec) -> list[tuple[int, StepFunction]]:
    """The ``a`` family for ``a_eps`` over the *other* eps class (a negative control)."""
    members = family_members(m, PartitionLabel(i, 1, 1 - a_eps), window)
    return [(I.scale, a_fn(a_eps, m, I)) for I in members]
