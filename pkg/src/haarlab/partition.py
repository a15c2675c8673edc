"""Splitting the dyadic intervals into collections on which a shift by ``m`` behaves.

For ``m >= 1`` every standard interval gets a label ``(i, delta, eps)``:

* ``i`` mixes the level class ``scale mod lam`` with the parity of
  ``index // m`` (odd blocks are offset by ``L + 1``);
* ``delta = 0`` when ``I`` and its translate share the ``lam``-fold
  standard ancestor, ``delta = 1`` when they do not (those collections become
  nested only after moving to the shifted grid);
* ``eps`` refines ``delta = 1`` by whether the translate sits at the left edge
  of its own ``lam``-fold ancestor.

Negative ``m`` is handled by reflecting ``x -> -x``.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple

from .grid import (
    Grid,
    GridInterval,
    RatSet,
    WindowSpec,
    atoms_of_nested_family,
    laminar_parents,
    pred_in_grid,
    reflect_interval,
)
from .maps import sigma, tau
from .report import CheckRecord, Report


@dataclass(frozen=True)
class LambdaParams:
    m: int
    lam: int
    L: int
    K: int


def lambda_of(m: int) -> LambdaParams:
    if m == 0:
        raise ValueError("m must be nonzero")
    a = abs(m)
    lam = 4 if a <= 2 else a.bit_length() + 2
    return LambdaParams(m=m, lam=lam, L=lam - 1, K=2 * lam - 1)


class PartitionLabel(NamedTuple):
    i: int
    delta: int
    eps: int | None = None

    def __str__(self) -> str:
        if self.eps is None:
            return f"{self.i}:{self.delta}"
        return f"{self.i}:{self.delta}:{self.eps}"

    @property
    def coarse(self) -> "PartitionLabel":
        return PartitionLabel(self.i, self.delta)

    def matches(self, other: "PartitionLabel") -> bool:
        """True if ``other`` (a full label) falls under this label; a missing eps matches both."""
        return (
            self.i == other.i
            and self.delta == other.delta
            and (self.eps is None or self.eps == other.eps)
        )

    @classmethod
    def parse(cls, text: str) -> "PartitionLabel":
        parts = [int(x) for x in text.replace(",", ":").split(":")]
        if len(parts) == 2:
            return cls(parts[0], parts[1])
        if len(parts) == 3:
            return cls(*parts)
        raise ValueError(f"bad label {text!r}")


def all_labels(m: int, split_eps: bool = True) -> list[PartitionLabel]:
    K = lambda_of(m).K
    out = []
    for i in range(K + 1):
        out.append(PartitionLabel(i, 0))
        if split_eps:
            out += [PartitionLabel(i, 1, 0), PartitionLabel(i, 1, 1)]
        else:
            out.append(PartitionLabel(i, 1))
    return out


def _classify_index(m: int, lam: int, L: int, j: int, k: int) -> PartitionLabel:
    i = j % lam
    if (k // m) % 2:
        i += L + 1
    km = k + m
    if (km >> lam) == (k >> lam):
        return PartitionLabel(i, 0)
    return PartitionLabel(i, 1, 1 if km & ((1 << lam) - 1) == 0 else 0)


def classify(m: int, interval: GridInterval) -> PartitionLabel:
    """Label of a standard interval for the shift by ``m``."""
    if interval.grid != Grid.STANDARD:
        raise ValueError(f"classify expects a standard interval, got {interval!r}")
    p = lambda_of(m)
    if m < 0:
        interval = reflect_interval(interval)
    return _classify_index(abs(m), p.lam, p.L, interval.scale, interval.index)


def partition_window(m: int, window: WindowSpec) -> dict[PartitionLabel, list[GridInterval]]:
    """All window intervals grouped by their full label (deterministic order)."""
    p = lambda_of(m)
    a = abs(m)
    groups: dict[PartitionLabel, list[GridInterval]] = defaultdict(list)
    for j in range(window.j_min, window.j_max + 1):
        for k in window.indices(j):
            kk = -k - 1 if m < 0 else k
            groups[_classify_index(a, p.lam, p.L, j, kk)].append(GridInterval(Grid.STANDARD, j, k))
    return dict(groups)


def enumerate_collection(
    m: int, label: PartitionLabel, window: WindowSpec, shifted: bool = False
) -> list[GridInterval]:
    """Window intervals carrying ``label``; with ``shifted`` the delta=1 ones are moved by sigma."""
    out = []
    for full, members in partition_window(m, window).items():
        if label.matches(full):
            out.extend(members)
    out.sort(key=lambda I: (I.scale, I.index))
    if shifted and label.delta == 1:
        out = [sigma(I) for I in out]
    return out


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------


def _coarse_groups(m: int, window: WindowSpec, fault_inject: bool) -> dict[PartitionLabel, list[GridInterval]]:
    groups: dict[PartitionLabel, list[GridInterval]] = defaultdict(list)
    for full, members in partition_window(m, window).items():
        key = full.coarse
        if fault_inject and key.delta == 1:
            key = PartitionLabel(key.i, 0)
        groups[key].extend(members)
    return dict(sorted(groups.items()))


def _check_label_family(
    m: int, lam: int, label: PartitionLabel, members: list[GridInterval], top: int
) -> list[CheckRecord]:
    tag = str(label)
    shifted = label.delta == 1
    ivs = [sigma(J) if shifted else J for J in members]
    out: list[CheckRecord] = []

    # disjoint from its own translate
    keys = {(J.scale, J.index) for J in members}
    clash = next((J for J in members if (J.scale, J.index + m) in keys), None)
    if clash is None:
        out.append(CheckRecord.ok("disjoint_translate", tag))
    else:
        out.append(CheckRecord.fail("disjoint_translate", tag, (clash, tau(m, clash))))

    # strong containment in the lam-fold predecessor of the own grid
    bad = None
    for J in ivs:
        a, b = J.units(top)
        d = m * (b - a)
        P = pred_in_grid(J, lam)
        c, e = P.units(top)
        if not (c <= min(a, a + d) and max(b, b + d) <= e):
            bad = (J, P)
            break
    if bad is None:
        out.append(CheckRecord.ok("strong_containment", tag))
    else:
        out.append(CheckRecord.fail("strong_containment", tag, bad))

    # nestedness of {J, tau J, J u tau J}
    sets, owners = [], []
    for J in ivs:
        a, b = J.units(top)
        d = m * (b - a)
        lo, hi = (a, a + d) if d > 0 else (a + d, a)
        union = ((lo, hi + (b - a)),) if abs(d) == b - a else tuple(sorted(((a, b), (a + d, b + d))))
        sets += [((a, b),), ((a + d, b + d),), union]
        owners += [(J,), (tau(m, J),), (J, tau(m, J))]
    _, witness = laminar_parents(sets)
    if witness is None:
        out.append(CheckRecord.ok("nested", tag, detail=f"{len(ivs)} intervals"))
    else:
        out.append(
            CheckRecord.fail(
                "nested",
                tag,
                owners[witness[0]] + owners[witness[1]],
                detail=f"members {'+'.join(map(repr, owners[witness[0]]))} and "
                f"{'+'.join(map(repr, owners[witness[1]]))} overlap without inclusion",
            )
        )
    return out


def verify_shift_lemma(m: int, window: WindowSpec, fault_inject: bool = False) -> Report:
    """Exhaustively check the shift lemma for ``m >= 1`` on a window.

    Per coarse label ``(i, delta)``: the collection is disjoint from its own
    translate, every ``J u tau_m J`` sits inside the ``lam``-fold predecessor
    of ``J`` in its own grid, and ``{J, tau_m J, J u tau_m J}`` is nested.
    Also checks that the labels partition the window and the bound on ``K``.
    ``fault_inject`` deliberately files every delta=1 interval under delta=0.
    """
    if m < 1:
        raise ValueError("verify_shift_lemma requires m >= 1")
    p = lambda_of(m)
    report = Report()

    groups = _coarse_groups(m, window, fault_inject)
    total = sum(len(v) for v in groups.values())
    distinct = len({I for v in groups.values() for I in v})
    bad_label = [lab for lab in groups if not 0 <= lab.i <= p.K]
    if total == len(window) == distinct and not bad_label:
        report.add(CheckRecord.ok("labels_partition", "all", f"{total} intervals"))
    else:
        report.add(
            CheckRecord.fail("labels_partition", "all", detail=f"{total} labelled, {distinct} distinct, {len(window)} in window")
        )

    bound_ok = p.K == 2 * p.L + 1 and (p.K == 7 if m == 1 else p.K <= 7 + 2 * math.log2(m))
    rec = CheckRecord.ok if bound_ok else CheckRecord.fail
    report.add(rec("K_bound", "all", detail=f"K={p.K}"))

    top = window.j_max
    for label, members in groups.items():
        report.extend(_check_label_family(m, p.lam, label, members, top))
    return report


def check_shifted_inclusion(
    m: int, i: int, interval: GridInterval, window: WindowSpec, literal: bool = False
) -> Report:
    """Shifted images of the straddling children of ``interval``.

    The children are the window intervals ``J`` of scale ``scale + lam`` inside
    ``interval`` whose translate leaves it.  ``sigma(J)`` and its translate are
    checked to lie in the ``lam``-fold shifted predecessor of ``sigma(J)``.
    With ``literal`` the container is ``sigma(interval)`` instead, which only
    holds at scales where the shift points right (even scales).
    """
    if m < 1:
        raise ValueError("check_shifted_inclusion requires m >= 1")
    lam = lambda_of(m).lam
    if interval.scale % lam != i % lam:
        raise ValueError(f"{interval!r} is not on level class {i} for lam={lam}")
    report = Report()
    tag = f"{i}:{interval!r}"
    j = interval.scale + lam
    if not window.j_min <= j <= window.j_max:
        report.add(CheckRecord.ok("shifted_inclusion", tag, "no children in window"))
        return report
    top = j
    a, b = interval.units(top)
    target = sigma(interval)
    checked = 0
    for k in range(interval.index << lam, (interval.index + 1) << lam):
        J = GridInterval(Grid.STANDARD, j, k)
        if J not in window:
            continue
        x, y = J.units(top)
        if a <= x + 3 * m and y + 3 * m <= b:
            continue  # translate stays inside: not a straddling child
        sJ = sigma(J)
        container = target if literal else pred_in_grid(sJ, lam)
        c, e = container.units(top)
        u, v = sJ.units(top)
        checked += 1
        if not (c <= u and v + 3 * m <= e):
            report.add(CheckRecord.fail("shifted_inclusion", tag, (sJ, container)))
    if report.ok:
        report.add(CheckRecord.ok("shifted_inclusion", tag, f"{checked} children"))
    return report


def filtration_atoms(m: int, label: PartitionLabel, scale: int, window: WindowSpec) -> list[RatSet]:
    """Cells generated by ``{J u tau_m J}`` over the labelled collection up to ``scale``.

    The region is the smallest interval containing the window region and all
    members (translates and shifts can leave the window region).
    """
    members = [
        J
        for J in enumerate_collection(m, label, window, shifted=True)
        if J.scale <= scale
    ]
    family = []
    for J in members:
        family.append(RatSet(((J.inf, J.sup), (tau(m, J).inf, tau(m, J).sup))))
    lo = min([Fraction(window.start)] + [s.inf for s in family])
    hi = max([Fraction(window.stop)] + [s.sup for s in family])
    return atoms_of_nested_family(family, RatSet.interval(lo, hi))


def shift_lemma_suite(m_values: Iterable[int], window: WindowSpec, fault_inject: bool = False) -> Report:
    report = Report()
    for m in m_values:
        sub = verify_shift_lemma(m, window, fault_inject=fault_inject)
        report.extend(
            CheckRecord(r.check, f"m={m} {r.label}", r.passed, r.witness, r.detail) for r in sub.records
        )
    return report
