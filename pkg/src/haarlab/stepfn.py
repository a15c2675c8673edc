"""Exact piecewise-constant functions on the line.

A :class:`StepFunction` holds breakpoints ``b0 < ... < bn`` and values
``v1 .. vn`` (``v_t`` on ``[b_{t-1}, b_t)``), zero outside.  Canonical form has
no zero-width pieces, no equal neighbours and no leading/trailing zero pieces,
so structural equality is function equality.

Bulk checks (:func:`mds_check`, :func:`orthogonality_report`) rescale a whole
family to one integer grid first and then run on plain ``int`` arithmetic.
"""

from __future__ import annotations

import bisect
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, NamedTuple, Sequence

from .grid import GridInterval, RatSet, as_ratset


class StepFunction:
    __slots__ = ("breakpoints", "values")

    def __init__(self, breakpoints: Sequence = (), values: Sequence = ()):
        bps, vals = list(breakpoints), list(values)
        if vals and len(bps) != len(vals) + 1:
            raise ValueError("need len(breakpoints) == len(values) + 1")
        if not vals and len(bps) > 1:
            raise ValueError("breakpoints without values")
        if any(a >= b for a, b in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        jumps: dict = defaultdict(int)
        prev = 0
        for x, v in zip(bps, vals + [0]):
            jumps[x] += v - prev
            prev = v
        self.breakpoints, self.values = _from_jumps(jumps)

    @classmethod
    def _raw(cls, breakpoints: tuple, values: tuple) -> "StepFunction":
        obj = cls.__new__(cls)
        obj.breakpoints = breakpoints
        obj.values = values
        return obj

    @classmethod
    def from_jumps(cls, jumps: Mapping) -> "StepFunction":
        """Build from ``{x: f(x+) - f(x-)}``; the jumps must sum to zero."""
        return cls._raw(*_from_jumps(jumps))

    def jumps(self) -> dict:
        out = {}
        prev = 0
        for x, v in zip(self.breakpoints, self.values + (0,)):
            out[x] = v - prev
            prev = v
        return out

    # -- protocol ---------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, StepFunction):
            return NotImplemented
        return self.breakpoints == other.breakpoints and self.values == other.values

    def __hash__(self) -> int:
        return hash((self.breakpoints, self.values))

    def __bool__(self) -> bool:
        return bool(self.values)

    def __repr__(self) -> str:
        if not self.values:
            return "StepFunction(0)"
        parts = [
            f"{v}@[{a},{b})"
            for a, b, v in zip(self.breakpoints, self.breakpoints[1:], self.values)
        ]
        return "StepFunction(" + " ".join(parts) + ")"

    def __add__(self, other: "StepFunction") -> "StepFunction":
        return add(self, other)

    def __sub__(self, other: "StepFunction") -> "StepFunction":
        return subtract(self, other)

    def __neg__(self) -> "StepFunction":
        return scale_by(-1, self)

    def __mul__(self, other):
        if isinstance(other, StepFunction):
            return multiply(self, other)
        return scale_by(other, self)

    __rmul__ = __mul__

    def __call__(self, x):
        i = bisect.bisect_right(self.breakpoints, x) - 1
        if 0 <= i < len(self.values):
            return self.values[i]
        return 0

    # -- geometry ----------------------------------------------------------

    def pieces(self):
        """``(a, b, v)`` triples, including interior zero pieces."""
        return zip(self.breakpoints, self.breakpoints[1:], self.values)

    @property
    def support(self) -> RatSet:
        return RatSet((a, b) for a, b, v in self.pieces() if v != 0)

    @property
    def hull(self) -> tuple | None:
        if not self.values:
            return None
        return self.breakpoints[0], self.breakpoints[-1]

    def translate(self, d) -> "StepFunction":
        return StepFunction._raw(tuple(x + d for x in self.breakpoints), self.values)

    def reflect(self) -> "StepFunction":
        """``x -> f(-x)`` (exact up to the endpoint convention of half-open pieces)."""
        return StepFunction._raw(
            tuple(-x for x in reversed(self.breakpoints)), tuple(reversed(self.values))
        )

    # -- serialization -------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "breakpoints": [_frac_pair(x) for x in self.breakpoints],
            "values": [_frac_pair(v) for v in self.values],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "StepFunction":
        bps = [Fraction(n, d) for n, d in data["breakpoints"]]
        vals = [Fraction(n, d) for n, d in data["values"]]
        return cls(bps, vals)


def _frac_pair(x) -> list[int]:
    f = Fraction(x)
    return [f.numerator, f.denominator]


def _from_jumps(jumps: Mapping) -> tuple[tuple, tuple]:
    xs = sorted(x for x, d in jumps.items() if d != 0)
    if not xs:
        return (), ()
    bps = [xs[0]]
    vals = []
    cur = jumps[xs[0]]
    for x in xs[1:]:
        vals.append(cur)
        bps.append(x)
        cur += jumps[x]
    if cur != 0:
        raise ValueError("jumps do not return to zero")
    return tuple(bps), tuple(_normalize(v) for v in vals)


def _normalize(v):
    if isinstance(v, Fraction) and v.denominator == 1:
        return int(v)
    return v


ZERO = StepFunction._raw((), ())


# ---------------------------------------------------------------------------
# Constructors and algebra
# ---------------------------------------------------------------------------


def indicator(A) -> StepFunction:
    jumps: dict = defaultdict(int)
    for a, b in as_ratset(A):
        jumps[a] += 1
        jumps[b] -= 1
    return StepFunction.from_jumps(jumps)


def haar(interval: GridInterval) -> StepFunction:
    """``+1`` on the left half of the interval, ``-1`` on the right half."""
    a, b = interval.inf, interval.sup
    return StepFunction._raw((a, (a + b) / 2, b), (1, -1))


def add(f: StepFunction, g: StepFunction) -> StepFunction:
    return linear_combination(((1, f), (1, g)))


def subtract(f: StepFunction, g: StepFunction) -> StepFunction:
    return linear_combination(((1, f), (-1, g)))


def scale_by(c, f: StepFunction) -> StepFunction:
    if c == 0:
        return ZERO
    return StepFunction._raw(f.breakpoints, tuple(_normalize(c * v) for v in f.values))


def linear_combination(terms: Iterable[tuple]) -> StepFunction:
    """``sum c * f`` over ``(c, f)`` pairs, in one pass."""
    jumps: dict = defaultdict(int)
    for c, f in terms:
        if c == 0:
            continue
        prev = 0
        for x, v in zip(f.breakpoints, f.values + (0,)):
            jumps[x] += c * (v - prev)
            prev = v
    return StepFunction.from_jumps(jumps)


def multiply(f: StepFunction, g: StepFunction) -> StepFunction:
    if not f or not g:
        return ZERO
    lo = max(f.breakpoints[0], g.breakpoints[0])
    hi = min(f.breakpoints[-1], g.breakpoints[-1])
    if lo >= hi:
        return ZERO
    xs = sorted({x for x in f.breakpoints + g.breakpoints if lo <= x <= hi})
    vals = [f(x) * g(x) for x in xs[:-1]]
    return StepFunction(xs, vals)


# ---------------------------------------------------------------------------
# Integrals and norms
# ---------------------------------------------------------------------------


def integral(f: StepFunction, over=None):
    if over is None:
        return sum(((b - a) * v for a, b, v in f.pieces()), Fraction(0))
    return integral(multiply(f, indicator(over)))


def inner_product(f: StepFunction, g: StepFunction):
    return integral(multiply(f, g))


class LpNorm(NamedTuple):
    pth_power: Fraction | None
    value: float


def lp_norm(f: StepFunction, p) -> LpNorm:
    """``||f||_p``; the p-th power is exact when ``p`` is an even positive integer."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if float(p).is_integer() and int(p) % 2 == 0:
        q = int(p)
        power = sum(((b - a) * Fraction(v) ** q for a, b, v in f.pieces()), Fraction(0))
        return LpNorm(power, float(power) ** (1.0 / q))
    total = math.fsum(float(b - a) * abs(float(v)) ** p for a, b, v in f.pieces())
    return LpNorm(None, total ** (1.0 / p))


def cond_exp(f: StepFunction, cells: Sequence) -> StepFunction:
    """Average of ``f`` over each cell (cells: disjoint sets covering a region)."""
    cells = [as_ratset(c) for c in cells]
    region = RatSet(p for c in cells for p in c)
    if f and not _within(f.support, region):
        raise ValueError("support of f escapes the region covered by the cells")
    terms = []
    for c in cells:
        m = c.measure
        avg = integral(f, c) / m
        if avg:
            terms.append((avg, indicator(c)))
    return linear_combination(terms)


def _within(inner: RatSet, outer: RatSet) -> bool:
    return not (inner - outer)


# ---------------------------------------------------------------------------
# Haar expansions to step functions
# ---------------------------------------------------------------------------


def level_slice(u: Mapping[GridInterval, object], scale: int) -> StepFunction:
    """Sum of ``c * h_I`` over the scale-``scale`` members of an expansion."""
    return linear_combination((c, haar(I)) for I, c in u.items() if I.scale == scale)


def indicator_slice(u: Mapping[GridInterval, object], scale: int) -> StepFunction:
    """Same as :func:`level_slice` with each Haar function replaced by the indicator."""
    return linear_combination((c, indicator(I)) for I, c in u.items() if I.scale == scale)


# ---------------------------------------------------------------------------
# Family checks on a common integer grid
# ---------------------------------------------------------------------------


class _IntFn(NamedTuple):
    xs: tuple  # integer breakpoints
    vs: tuple  # integer values


def _to_int_grid(fns: Sequence[StepFunction]) -> tuple[list[_IntFn], int, int]:
    """Rescale breakpoints by ``D`` and values by ``V`` so everything is integral."""
    D = V = 1
    for f in fns:
        for x in f.breakpoints:
            d = x.denominator if isinstance(x, Rational) else Fraction(x).denominator
            D = D * d // math.gcd(D, d)
        for v in f.values:
            d = v.denominator if isinstance(v, Rational) else Fraction(v).denominator
            V = V * d // math.gcd(V, d)
    out = []
    for f in fns:
        xs = tuple(int(x * D) for x in f.breakpoints)
        vs = tuple(int(v * V) for v in f.values)
        out.append(_IntFn(xs, vs))
    return out, D, V


def _int_total(g: _IntFn) -> int:
    return sum((b - a) * v for a, b, v in zip(g.xs, g.xs[1:], g.vs))


def _int_support(g: _IntFn) -> list[tuple[int, int]]:
    out: list[list[int]] = []
    for a, b, v in zip(g.xs, g.xs[1:], g.vs):
        if v == 0:
            continue
        if out and out[-1][1] == a:
            out[-1][1] = b
        else:
            out.append([a, b])
    return [(a, b) for a, b in out]


@dataclass(frozen=True)
class MdsResult:
    ok: bool
    condition: str | None = None  # "zero_mean", "disjoint", "conditional_mean"
    witness: tuple = ()  # member positions in the input family
    cell: tuple | None = None  # exact (a, b) cell for conditional_mean failures
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def mds_check(family: Sequence[tuple[int, StepFunction]]) -> MdsResult:
    """Whether the family is a martingale difference sequence.

    ``family`` is a sequence of ``(generation, f)``; smaller generations are
    coarser.  Requires (a) every member integrates to zero, (b) members of one
    generation have disjoint supports, (c) every member integrates to zero on
    each cell cut out by the breakpoints of all strictly coarser members.
    Zero functions are vacuous members.  Witness indices refer to ``family``.
    """
    gens = [g for g, _ in family]
    fns, D, V = _to_int_grid([f for _, f in family])
    scale = Fraction(1, D * V)

    for n, g in enumerate(fns):
        if g.vs and _int_total(g) != 0:
            return MdsResult(False, "zero_mean", (n,), detail=f"integral {_int_total(g) * scale}")

    by_gen: dict[int, list[int]] = defaultdict(list)
    for n, gen in enumerate(gens):
        if fns[n].vs:
            by_gen[gen].append(n)

    for gen in sorted(by_gen):
        pieces = sorted((a, b, n) for n in by_gen[gen] for a, b in _int_support(fns[n]))
        max_end, owner = None, None
        for a, b, n in pieces:
            if max_end is not None and a < max_end and owner != n:
                return MdsResult(False, "disjoint", (owner, n), detail=f"generation {gen}")
            if max_end is None or b > max_end:
                max_end, owner = b, n

    coarse: list[int] = []  # sorted breakpoints of all strictly coarser members
    for gen in sorted(by_gen):
        for n in by_gen[gen]:
            g = fns[n]
            lo, hi = g.xs[0], g.xs[-1]
            i = bisect.bisect_right(coarse, lo)
            j = bisect.bisect_left(coarse, hi)
            if i >= j:
                continue
            # prefix integral of g at each interior coarse breakpoint
            t, acc = 0, 0
            prev_cut = coarse[i - 1] if i > 0 else lo
            for x in coarse[i:j]:
                while t < len(g.vs) and g.xs[t + 1] <= x:
                    acc += (g.xs[t + 1] - g.xs[t]) * g.vs[t]
                    t += 1
                val = acc + ((x - g.xs[t]) * g.vs[t] if t < len(g.vs) else 0)
                if val != 0:
                    return MdsResult(
                        False,
                        "conditional_mean",
                        (n,),
                        cell=(Fraction(prev_cut, D), Fraction(x, D)),
                        detail=f"generation {gen}: integral up to {Fraction(x, D)} is {val * scale}",
                    )
                prev_cut = x
        new = {x for n in by_gen[gen] for x in fns[n].xs}
        coarse = sorted(set(coarse) | new)
    return MdsResult(True)


@dataclass(frozen=True)
class OrthogonalityReport:
    ok: bool
    norm_of_sum: Fraction  # ||sum f||_2^2
    sum_of_norms: Fraction  # sum ||f||_2^2
    pair: tuple | None = None  # first pair with nonzero inner product
    inner: Fraction | None = None

    def __bool__(self) -> bool:
        return self.ok


def orthogonality_report(fns: Sequence[StepFunction]) -> OrthogonalityReport:
    """Exact Pythagoras identity and pairwise orthogonality for a family."""
    ints, D, V = _to_int_grid(fns)
    scale = Fraction(1, D * V * V)

    sq_sum = sum(sum((b - a) * v * v for a, b, v in zip(g.xs, g.xs[1:], g.vs)) for g in ints)

    jumps: dict[int, int] = defaultdict(int)
    for g in ints:
        prev = 0
        for x, v in zip(g.xs, g.vs + (0,)):
            jumps[x] += v - prev
            prev = v
    total = 0
    cur = 0
    xs = sorted(jumps)
    for x, y in zip(xs, xs[1:]):
        cur += jumps[x]
        total += (y - x) * cur * cur

    pair, inner = None, None
    order = sorted((g.xs[0], g.xs[-1], n) for n, g in enumerate(ints) if g.vs)
    active: list[tuple[int, int]] = []  # (end, n)
    for a, b, n in order:
        active = [(e, k) for e, k in active if e > a]
        for _, k in active:
            ip = _int_inner(ints[k], ints[n])
            if ip != 0:
                pair, inner = (min(k, n), max(k, n)), ip * scale
                break
        if pair is not None:
            break
        active.append((b, n))

    ok = pair is None and total == sq_sum
    return OrthogonalityReport(ok, total * scale, sq_sum * scale, pair, inner)


def _int_inner(f: _IntFn, g: _IntFn) -> int:
    i = j = 0
    out = 0
    while i < len(f.vs) and j < len(g.vs):
        a = max(f.xs[i], g.xs[j])
        b = min(f.xs[i + 1], g.xs[j + 1])
        if a < b:
            out += (b - a) * f.vs[i] * g.vs[j]
        if f.xs[i + 1] < g.xs[j + 1]:
            i += 1
        else:
            j += 1
    return out
