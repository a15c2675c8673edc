"""Interval-to-interval maps between the standard and the shifted grid.

``omega``, ``unilateral_sigma`` and ``unilateral_omega`` are found by testing
the (at most three) shifted candidates near the obvious index and keeping the
ones with the defining property.  Exactly one candidate must survive; anything
else is an arithmetic bug and raises.
"""

from __future__ import annotations

from typing import NamedTuple

from .grid import Grid, GridInterval, RatSet, as_ratset


def _require_standard(interval: GridInterval, name: str) -> None:
    if interval.grid != Grid.STANDARD:
        raise ValueError(f"{name} expects a standard interval, got {interval!r}")


def _unique(cands: list[GridInterval], what: str, interval: GridInterval) -> GridInterval:
    if len(cands) != 1:
        raise AssertionError(f"{what}({interval!r}) has {len(cands)} candidates: {cands}")
    return cands[0]


def sigma(interval: GridInterval) -> GridInterval:
    """Shift a standard interval onto the shifted grid (same scale and index)."""
    _require_standard(interval, "sigma")
    return GridInterval(Grid.SHIFTED, interval.scale, interval.index)


def sigma_inv(interval: GridInterval) -> GridInterval:
    if interval.grid != Grid.SHIFTED:
        raise ValueError(f"sigma_inv expects a shifted interval, got {interval!r}")
    return GridInterval(Grid.STANDARD, interval.scale, interval.index)


def omega(interval: GridInterval) -> GridInterval:
    """The shifted interval of half the length lying inside ``interval``."""
    _require_standard(interval, "omega")
    j, k = interval.scale, interval.index
    a, b = interval.units(j + 1)
    cands = []
    for c in (2 * k - 1, 2 * k, 2 * k + 1):
        cand = GridInterval(Grid.SHIFTED, j + 1, c)
        x, y = cand.units(j + 1)
        if a <= x and y <= b:
            cands.append(cand)
    return _unique(cands, "omega", interval)


def unilateral_sigma(eps: int, interval: GridInterval) -> GridInterval:
    """Equal-length shifted interval whose sup (``eps=0``) or inf (``eps=1``) lies in ``interval``."""
    _require_standard(interval, "unilateral_sigma")
    if eps not in (0, 1):
        raise ValueError(f"eps must be 0 or 1, got {eps}")
    j, k = interval.scale, interval.index
    a, b = interval.units(j)
    cands = []
    for c in (k - 1, k, k + 1):
        cand = GridInterval(Grid.SHIFTED, j, c)
        x, y = cand.units(j)
        point = y if eps == 0 else x
        if a <= point < b:
            cands.append(cand)
    return _unique(cands, f"sigma_{eps}", interval)


def unilateral_omega(eps: int, interval: GridInterval) -> GridInterval:
    """Quarter-length shifted interval sharing the sup of sigma_0 (``eps=0``) or the inf of sigma_1."""
    outer = unilateral_sigma(eps, interval)
    j = interval.scale
    x, y = outer.units(j + 2)
    cands = []
    for c in range(4 * outer.index - 1, 4 * outer.index + 5):
        cand = GridInterval(Grid.SHIFTED, j + 2, c)
        u, v = cand.units(j + 2)
        if (eps == 0 and v == y) or (eps == 1 and u == x):
            cands.append(cand)
    return _unique(cands, f"omega_{eps}", interval)


def tau(m: int, interval: GridInterval) -> GridInterval:
    """Translate by ``m`` lengths; works on both grids."""
    return GridInterval(interval.grid, interval.scale, interval.index + m)


class SupportSets(NamedTuple):
    alpha0: GridInterval
    alpha1: GridInterval
    beta0: RatSet
    beta1: RatSet
    beta: RatSet
    gamma0: RatSet
    gamma1: RatSet
    gamma: RatSet


def support_sets(interval: GridInterval) -> SupportSets:
    """The left/right associates of a standard interval and the sets built from them."""
    _require_standard(interval, "support_sets")
    alpha0 = unilateral_sigma(0, interval)
    alpha1 = unilateral_sigma(1, interval)
    own = as_ratset(interval)
    beta0 = as_ratset(alpha0) - own
    beta1 = as_ratset(alpha1) & own
    gamma0 = as_ratset(tau(-1, interval))
    return SupportSets(
        alpha0=alpha0,
        alpha1=alpha1,
        beta0=beta0,
        beta1=beta1,
        beta=beta0 | beta1,
        gamma0=gamma0,
        gamma1=own,
        gamma=gamma0 | own,
    )
