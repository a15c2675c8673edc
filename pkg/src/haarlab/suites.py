"""Exhaustive verification suites over a window.

Each suite returns a :class:`~haarlab.report.Report`; a suite passes when the
report has no failed records.  Suites are independent per ``m`` and can be
fanned out over a process pool.
"""

from __future__ import annotations

import random
from collections import defaultdict
from fractions import Fraction
from typing import Iterable, Sequence

from .grid import WindowSpec, distance_to_complement, laminar_parents
from .maps import omega, sigma, support_sets, unilateral_omega, unilateral_sigma
from .operators import (
    HaarExpansion,
    apply_Am,
    apply_B,
    apply_Bm,
    apply_T,
    apply_U,
    commute_check,
    cross_eps_family,
    family_members,
    identity_check,
    mds_families,
    member_source,
    project,
)
from .partition import (
    PartitionLabel,
    all_labels,
    check_shifted_inclusion,
    lambda_of,
    verify_shift_lemma,
)
from .report import CheckRecord, Report
from .normest import pythagoras_record
from .stepfn import mds_check

SUITES = ("lemma3", "lemma4", "mds", "identity")


def _first_fail(check: str, label: str, items: Iterable, predicate, describe=lambda x: (x,)) -> CheckRecord:
    n = 0
    for x in items:
        n += 1
        if not predicate(x):
            return CheckRecord.fail(check, label, describe(x))
    return CheckRecord.ok(check, label, f"{n} cases")


def lemma3_suite(window: WindowSpec) -> Report:
    """Properties of the shifted grid and of the maps omega / sigma_eps / omega_eps."""
    report = Report()
    ivs = list(window.intervals())
    top = window.j_max + 2
    shifted = [sigma(I) for I in ivs]

    # (i) nested, and no shifted interval is a standard one
    _, witness = laminar_parents([(J.units(top),) for J in shifted])
    if witness is None:
        report.add(CheckRecord.ok("shifted_nested", "all", f"{len(shifted)} intervals"))
    else:
        report.add(CheckRecord.fail("shifted_nested", "all", (shifted[witness[0]], shifted[witness[1]])))
    standard = {I.units(top) for I in ivs}
    report.add(
        _first_fail("grids_disjoint", "all", shifted, lambda J: J.units(top) not in standard)
    )

    om = {I: omega(I) for I in ivs}
    # (ii) injective
    if len(set(om.values())) == len(om):
        report.add(CheckRecord.ok("omega_injective", "all", f"{len(om)} intervals"))
    else:
        seen: dict = {}
        dup = next((I, seen[w]) for I, w in om.items() if seen.setdefault(w, I) != I)
        report.add(CheckRecord.fail("omega_injective", "all", dup))

    def inside(I):
        a, b = I.units(top)
        c, d = om[I].units(top)
        return a <= c and d <= b

    report.add(_first_fail("omega_inside", "all", ivs, inside))
    report.add(
        _first_fail(
            "omega_margin",
            "all",
            ivs,
            lambda I: distance_to_complement(om[I], I) == I.measure / 6,
        )
    )

    # (v) same-scale separation: the closest pair is a pair of neighbours
    by_scale = defaultdict(list)
    for I in ivs:
        by_scale[I.scale].append(om[I].units(top))
    sep_bad = None
    for j, spans in sorted(by_scale.items()):
        spans.sort()
        length = spans[0][1] - spans[0][0]
        for (a, b), (c, d) in zip(spans, spans[1:]):
            if c - b < length:
                sep_bad = (j, a, c)
                break
        if sep_bad:
            break
    if sep_bad is None:
        report.add(CheckRecord.ok("omega_separated", "all"))
    else:
        report.add(CheckRecord.fail("omega_separated", "all", detail=f"scale {sep_bad[0]}"))

    # (vi) sigma(I) is omega(I) plus its neighbour towards the shift
    def halves(I):
        a, b = om[I].units(top)
        s = 1 if I.scale % 2 == 0 else -1
        d = s * (b - a)
        lo, hi = min(a, a + d), max(b, b + d)
        return sigma(I).units(top) == (lo, hi)

    report.add(_first_fail("sigma_two_omegas", "all", ivs, halves))

    # one-sided maps
    def one_sided(I):
        s0, s1 = unilateral_sigma(0, I), unilateral_sigma(1, I)
        if (s0 == sigma(I)) == (s1 == sigma(I)):
            return False
        a, b = I.units(top)
        for s in (s0, s1):
            c, d = s.units(top)
            if 3 * (min(b, d) - max(a, c)) < b - a:
                return False
        for e, s in ((0, s0), (1, s1)):
            c, d = s.units(top)
            x, y = unilateral_omega(e, I).units(top)
            if not (c <= x and y <= d):
                return False
        return True

    report.add(_first_fail("one_sided_maps", "all", ivs, one_sided))

    def balanced(I):
        s = support_sets(I)
        return s.beta0.measure == s.beta1.measure

    report.add(_first_fail("beta_balanced", "all", ivs, balanced))
    return report


def lemma4_suite(m_values: Sequence[int], window: WindowSpec, fault_inject: bool = False) -> Report:
    """Shift lemma per ``m`` plus the shifted inclusion of straddling children."""
    report = Report()
    for m in m_values:
        sub = verify_shift_lemma(m, window, fault_inject=fault_inject)
        report.extend(_tag(sub, m))
        lam = lambda_of(m).lam
        bad = []
        count = 0
        for I in window.intervals():
            if I.scale + lam > window.j_max:
                continue
            count += 1
            r = check_shifted_inclusion(m, I.scale % lam, I, window)
            bad += r.violations
        if bad:
            report.extend(_tag(Report(bad[:1]), m))
        else:
            report.add(CheckRecord.ok("shifted_inclusion", f"m={m}", f"{count} parents"))
    return report


def _tag(report: Report, m: int) -> list[CheckRecord]:
    return [CheckRecord(r.check, f"m={m} {r.label}", r.passed, r.witness, r.detail) for r in report.records]


def mds_suite(m_values: Sequence[int], window: WindowSpec, pythagoras: bool = True) -> Report:
    """MDS and (optionally) exact Pythagoras for every family and label."""
    report = Report()
    for m in m_values:
        for label in all_labels(m):
            members = family_members(m, label, window)
            for name, fam in mds_families(m, label, window).items():
                tag = f"m={m} {label} {name}"
                if not fam:
                    report.add(CheckRecord.ok("mds", tag, "empty family"))
                elif (res := mds_check(fam)).ok:
                    report.add(CheckRecord.ok("mds", tag, f"{len(fam)} members"))
                else:
                    wit = tuple(member_source(name, n, members, m) for n in res.witness)
                    detail = f"{res.condition}: {res.detail}"
                    if res.cell is not None:
                        detail += f"; cell [{res.cell[0]}, {res.cell[1]})"
                    report.add(CheckRecord.fail("mds", tag, wit, detail))
                if pythagoras:
                    report.add(pythagoras_record(tag, name, fam, members, m))
        # negative control, recorded only
        hits = []
        for i in range(lambda_of(m).K + 1):
            for e in (0, 1):
                fam = cross_eps_family(m, i, e, window)
                if fam and not mds_check(fam):
                    hits.append(f"{i}:1:{1 - e} with a^({e})")
        report.add(
            CheckRecord.ok(
                "wrong_eps_control",
                f"m={m}",
                "violations under " + ", ".join(hits) if hits else "no violations observed",
            )
        )
    return report


def _sample_expansion(window: WindowSpec, seed: int) -> HaarExpansion:
    rng = random.Random(seed)
    return HaarExpansion({I: Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for I in window.intervals()})


def identity_suite(m_values: Sequence[int], window: WindowSpec, seed: int = 0) -> Report:
    """Decomposition identity per interval, commutation, and totality on a sample expansion."""
    report = Report()
    ivs = list(window.intervals())
    u = _sample_expansion(window, seed)
    for m in m_values:
        for eps in (0, 1):
            report.add(
                _first_fail(
                    "decomposition_identity", f"m={m} eps={eps}", ivs, lambda I: identity_check(m, eps, I)
                )
            )
            lhs = apply_U(m, u)
            rhs = apply_Am(eps, m, u) + apply_B(eps, u, m < 0) - apply_B(eps, apply_T(m, u), m < 0)
            rec = CheckRecord.ok if lhs == rhs else CheckRecord.fail
            report.add(rec("operator_identity", f"m={m} eps={eps}", detail=f"{len(u)} coefficients"))
        report.add(_first_fail("commutation", f"m={m}", ivs, lambda I: commute_check(m, I)))
        if m >= 1:
            total = apply_U(m, project(m, PartitionLabel(None, 0), u))
            for eps in (0, 1):
                part = project(m, PartitionLabel(None, 1, eps), u)
                total = total + apply_Am(eps, m, part) + apply_Bm(eps, m, part)
            rec = CheckRecord.ok if total == apply_U(m, u) else CheckRecord.fail
            report.add(rec("decomposition_total", f"m={m}"))
    return report


def run_suite(name: str, m_values: Sequence[int], window: WindowSpec, fault_inject: bool = False, seed: int = 0) -> Report:
    if name == "lemma3":
        return lemma3_suite(window)
    if name == "lemma4":
        return lemma4_suite(m_values, window, fault_inject)
    if name == "mds":
        return mds_suite(m_values, window)
    if name == "identity":
        return identity_suite(m_values, window, seed)
    raise ValueError(f"unknown suite {name!r}")
