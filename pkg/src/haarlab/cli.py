"""``haarlab`` command line.

Exit codes: 0 success, 1 verification violation, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import Sequence

from .grid import Grid, GridInterval, WindowSpec
from .maps import tau
from .normest import (
    CSV_COLUMNS,
    DEFAULT_EXPONENT,
    LpConfig,
    OPERATORS,
    _fmt,
    norm_l2,
    norm_lp_lower,
    reference_curve,
    rows_to_csv,
    sweep,
)
from .operators import a_fn, b_fn, identity_check, u_fn
from .parallel import pool
from .partition import PartitionLabel, partition_window
from .report import Report
from .suites import SUITES, run_suite

DEFAULT_REGION = (0, 16)
DEFAULT_SCALES = (0, 8)
DEFAULT_M = list(range(1, 9))


class UsageError(Exception):
    pass


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--m", type=int, nargs="+", help="shift parameter(s)")
    common.add_argument("--m-range", type=int, nargs=2, metavar=("LO", "HI"), help="inclusive range of m")
    common.add_argument("--region", type=int, nargs=2, metavar=("A", "B"), help="window region [A, B)")
    common.add_argument("--scales", type=int, nargs=2, metavar=("JMIN", "JMAX"), help="window scale range")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--seed", type=int, default=0)

    parser = argparse.ArgumentParser(prog="haarlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("partition", parents=[common], help="label every window interval")

    p = sub.add_parser("verify", parents=[common], help="run exhaustive verification suites")
    p.add_argument("--suite", choices=SUITES + ("all",), default="all")
    p.add_argument("--fault-inject", action="store_true", help="file delta=1 intervals under delta=0")

    p = sub.add_parser("decompose", parents=[common], help="dump U_m h_I = a + b - b o tau per interval")
    p.add_argument("--eps", type=int, choices=(0, 1), default=0)
    p.add_argument("--interval", nargs=2, metavar=("INF", "SUP"), help="a single standard interval")
    p.add_argument("--reflect", action="store_true", help="allow m <= -1 via reflection")

    for name, help_ in (("norm", "one norm probe"), ("sweep", "norm probes over m and labels")):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("--op", choices=OPERATORS, default="U")
        p.add_argument("--p", type=float, default=4.0)
        p.add_argument("--eps", type=int, choices=(0, 1), default=0)
        p.add_argument("--max-iter", type=int, default=LpConfig.max_iter)
        p.add_argument("--tol", type=float, default=LpConfig.tol)
        p.add_argument("--exponent", type=float, default=None, help="exponent of the reference curve")
        if name == "norm":
            p.add_argument("--label", nargs="+", type=int, metavar="N", help="i delta [eps]")
        else:
            p.add_argument("--per-label", action="store_true", help="add one row per label next to full")
            p.add_argument("--per-label-only", action="store_true", help="label rows without the full row")
    return parser


def _m_values(args, default=None, allow_negative: bool = True) -> list[int]:
    values: list[int] = []
    if args.m:
        values += args.m
    if args.m_range:
        lo, hi = args.m_range
        if lo > hi:
            raise UsageError(f"empty m range {lo}..{hi}")
        values += list(range(lo, hi + 1))
    if not values:
        if default is None:
            raise UsageError("--m or --m-range is required")
        values = list(default)
    if 0 in values:
        raise UsageError("m must be nonzero")
    if not allow_negative and any(m < 0 for m in values):
        raise UsageError("this command needs m >= 1")
    return values


def _window(args, region=DEFAULT_REGION, scales=DEFAULT_SCALES) -> WindowSpec:
    a, b = args.region or region
    j0, j1 = args.scales or scales
    try:
        return WindowSpec(a, b, j0, j1)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _parse_interval(tokens: Sequence[str]) -> GridInterval:
    try:
        a, b = (Fraction(t) for t in tokens)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad interval {' '.join(tokens)}") from None
    length = b - a
    if length <= 0 or length.numerator & (length.numerator - 1) or length.denominator & (length.denominator - 1):
        raise UsageError(f"[{a}, {b}) is not a dyadic interval")
    if length.numerator != 1 and length.denominator != 1:
        raise UsageError(f"[{a}, {b}) is not a dyadic interval")
    scale = length.denominator.bit_length() - 1 - (length.numerator.bit_length() - 1)
    k = a / length
    if k.denominator != 1:
        raise UsageError(f"[{a}, {b}) is not on the dyadic grid")
    return GridInterval(Grid.STANDARD, scale, int(k))


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _rows_text(rows: list[dict], fmt: str, columns: Sequence[str]) -> str:
    if fmt == "json":
        return "".join(json.dumps(r, sort_keys=False) + "\n" for r in rows)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_partition(args) -> int:
    ms = _m_values(args)
    window = _window(args)
    rows = []
    for m in ms:
        groups = partition_window(m, window)
        labelled = sorted(
            ((I, lab) for lab, ivs in groups.items() for I in ivs), key=lambda t: (t[0].scale, t[0].index)
        )
        for I, lab in labelled:
            rows.append(
                {
                    "m": m,
                    "scale": I.scale,
                    "index": I.index,
                    "inf": str(I.inf),
                    "sup": str(I.sup),
                    "i": lab.i,
                    "delta": lab.delta,
                    "eps": "" if lab.eps is None else lab.eps,
                }
            )
    cols = ("m", "scale", "index", "inf", "sup", "i", "delta", "eps")
    _emit(_rows_text(rows, args.format or "csv", cols), args.out)
    return 0


def _suite_job(job) -> Report:
    name, ms, window, fault, seed = job
    return run_suite(name, ms, window, fault, seed)


def cmd_verify(args) -> int:
    names = SUITES if args.suite == "all" else (args.suite,)
    ms = _m_values(args, default=DEFAULT_M, allow_negative=False)
    window = _window(args)
    jobs = []
    for name in names:
        if name == "lemma3":
            jobs.append((name, [], window, False, args.seed))
        else:
            jobs += [(name, [m], window, args.fault_inject, args.seed) for m in ms]
    report = Report()
    with pool() as ex:
        mapper = ex.map if ex is not None else map
        for sub in mapper(_suite_job, jobs):
            report.extend(sub.records)
    text = report.to_csv() if args.format == "csv" else report.to_jsonl()
    _emit(text, args.out)
    bad = len(report.violations)
    print(f"{len(report)} checks, {bad} violations", file=sys.stderr)
    return 1 if bad else 0


def cmd_decompose(args) -> int:
    ms = _m_values(args, default=[1])
    if any(m < 0 for m in ms) and not args.reflect:
        raise UsageError("m <= -1 needs --reflect")
    if args.interval:
        intervals = [_parse_interval(args.interval)]
    else:
        intervals = list(_window(args, scales=(0, 4)).intervals())
    eps = args.eps
    lines = []
    rows = []
    for m in ms:
        mir = m < 0
        for I in intervals:
            ok = identity_check(m, eps, I)
            rec = {
                "m": m,
                "eps": eps,
                "I": {"scale": I.scale, "index": I.index, "inf": str(I.inf), "sup": str(I.sup)},
                "U": u_fn(m, I).to_json(),
                "a": a_fn(eps, m, I).to_json(),
                "b_I": b_fn(eps, I, mir).to_json(),
                "b_tau_I": b_fn(eps, tau(m, I), mir).to_json(),
                "identity_ok": ok,
            }
            lines.append(json.dumps(rec) + "\n")
            rows.append({"m": m, "eps": eps, "scale": I.scale, "index": I.index, "identity_ok": int(ok)})
    if args.format == "csv":
        _emit(_rows_text(rows, "csv", ("m", "eps", "scale", "index", "identity_ok")), args.out)
    else:
        _emit("".join(lines), args.out)
    return 0 if all(r["identity_ok"] for r in rows) else 1


def _check_p(p: float) -> None:
    if p <= 1:
        raise UsageError("p must be > 1")


def cmd_norm(args) -> int:
    ms = _m_values(args)
    _check_p(args.p)
    window = _window(args, scales=(0, 4))
    label = None
    if args.label:
        if len(args.label) not in (2, 3):
            raise UsageError("--label takes i delta [eps]")
        label = PartitionLabel(*args.label)
    exponent = args.exponent if args.exponent is not None else DEFAULT_EXPONENT.get(args.op, 0.25)
    config = LpConfig(max_iter=args.max_iter, tol=args.tol, seed=args.seed)
    rows = []
    for m in ms:
        if args.p == 2:
            rep = norm_l2(args.op, m, window, args.eps, label)
        else:
            rep = norm_lp_lower(args.op, m, window, args.p, args.eps, label, config)
        rows.append(
            {
                "op": args.op,
                "m": m,
                "p": _fmt(args.p),
                "label": rep.label,
                "lower_bound": _fmt(rep.lower_bound),
                "ref_curve": _fmt(reference_curve(m, exponent)),
                "iterations": rep.iterations,
                "converged": int(rep.converged),
            }
        )
    _emit(_rows_text(rows, args.format or "csv", CSV_COLUMNS), args.out)
    return 0


def cmd_sweep(args) -> int:
    ms = _m_values(args, default=[1, 2, 4, 8, 16, 32, 64])
    _check_p(args.p)
    window = _window(args, scales=(0, 6))
    mode = "per_label" if args.per_label_only else ("both" if args.per_label else "full")
    config = LpConfig(max_iter=args.max_iter, tol=args.tol, seed=args.seed)
    with pool() as ex:
        rows = sweep(args.op, ms, args.p, window, mode, args.eps, args.exponent, config, ex)
    text = rows_to_csv(rows) if (args.format or "csv") == "csv" else _rows_text(rows, "json", CSV_COLUMNS)
    _emit(text, args.out)
    return 0


COMMANDS = {
    "partition": cmd_partition,
    "verify": cmd_verify,
    "decompose": cmd_decompose,
    "norm": cmd_norm,
    "sweep": cmd_sweep,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"haarlab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
