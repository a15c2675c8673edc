"""Standard and one-third-shifted dyadic intervals.

An interval is identified by ``(grid, scale, index)``; endpoints are derived,
never stored.  For the standard grid ``[k 2^-j, (k+1) 2^-j)``; the shifted grid
translates every level-``j`` interval by ``s_j = (-1)^j 2^-j / 3``.

Inside one computation all endpoints share the denominator ``3 * 2^J`` where
``J`` bounds the scales involved, so most hot paths compare plain integers.
:class:`fractions.Fraction` is the exact rational type at the API boundary.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction
from typing import Iterable, Iterator, NamedTuple, Sequence, Union

Rat = Fraction


class Grid(IntEnum):
    STANDARD = 0
    SHIFTED = 1


class NotNestedError(ValueError):
    """Raised when a family expected to be nested has two overlapping,
    incomparable members.  ``pair`` holds the offending members."""

    def __init__(self, pair, message: str = "family is not nested"):
        super().__init__(f"{message}: {pair[0]!r} vs {pair[1]!r}")
        self.pair = pair


def shift_sign(scale: int) -> int:
    """Sign of the one-third shift at ``scale`` (Euclidean parity)."""
    return 1 if scale % 2 == 0 else -1


class GridInterval(NamedTuple):
    grid: Grid
    scale: int
    index: int

    @classmethod
    def standard(cls, scale: int, index: int) -> "GridInterval":
        return cls(Grid.STANDARD, scale, index)

    @classmethod
    def shifted(cls, scale: int, index: int) -> "GridInterval":
        return cls(Grid.SHIFTED, scale, index)

    @property
    def offset(self) -> int:
        """``3 * 2^scale * inf - 3 * index``: 0 on the standard grid, +-1 shifted."""
        return 0 if self.grid == Grid.STANDARD else shift_sign(self.scale)

    def units(self, top: int) -> tuple[int, int]:
        """Endpoints as integers in units of ``2^-top / 3`` (requires ``top >= scale``)."""
        f = 1 << (top - self.scale)
        a = (3 * self.index + self.offset) * f
        return a, a + 3 * f

    @property
    def inf(self) -> Fraction:
        return _to_rat(3 * self.index + self.offset, self.scale)

    @property
    def sup(self) -> Fraction:
        return _to_rat(3 * self.index + 3 + self.offset, self.scale)

    @property
    def measure(self) -> Fraction:
        return _to_rat(3, self.scale)

    def __repr__(self) -> str:
        g = "D" if self.grid == Grid.STANDARD else "sD"
        return f"{g}({self.scale},{self.index})"

    def as_triple(self) -> tuple[str, int, int]:
        return (self.grid.name.lower(), self.scale, self.index)


def _to_rat(n: int, scale: int) -> Fraction:
    # n in units of 2^-scale / 3
    if scale >= 0:
        return Fraction(n, 3 << scale)
    return Fraction(n << -scale, 3)


def endpoints(interval: GridInterval) -> tuple[Fraction, Fraction]:
    return interval.inf, interval.sup


def reflect_interval(interval: GridInterval) -> GridInterval:
    """Image of a standard interval under ``x -> -x`` (up to endpoints)."""
    if interval.grid != Grid.STANDARD:
        raise ValueError(f"only standard intervals reflect onto the grid, got {interval!r}")
    return GridInterval(Grid.STANDARD, interval.scale, -interval.index - 1)


# ---------------------------------------------------------------------------
# Finite unions of half-open intervals
# ---------------------------------------------------------------------------


class RatSet:
    """Finite disjoint union of half-open intervals ``[a, b)`` in canonical form.

    Pieces are sorted, non-degenerate, and touching pieces are merged, so two
    sets are equal iff their piece tuples are equal.
    """

    __slots__ = ("pieces",)

    def __init__(self, pieces: Iterable[tuple] = ()):
        self.pieces: tuple[tuple, ...] = _canonical(pieces)

    @classmethod
    def interval(cls, a, b) -> "RatSet":
        return cls(((a, b),))

    @classmethod
    def _raw(cls, pieces: tuple) -> "RatSet":
        obj = cls.__new__(cls)
        obj.pieces = pieces
        return obj

    def __iter__(self) -> Iterator[tuple]:
        return iter(self.pieces)

    def __len__(self) -> int:
        return len(self.pieces)

    def __bool__(self) -> bool:
        return bool(self.pieces)

    def __eq__(self, other) -> bool:
        if isinstance(other, GridInterval):
            other = as_ratset(other)
        if not isinstance(other, RatSet):
            return NotImplemented
        return self.pieces == other.pieces

    def __hash__(self) -> int:
        return hash(self.pieces)

    def __repr__(self) -> str:
        if not self.pieces:
            return "RatSet(∅)"
        return "RatSet(" + " ∪ ".join(f"[{a},{b})" for a, b in self.pieces) + ")"

    @property
    def inf(self):
        if not self.pieces:
            raise ValueError("empty set has no infimum")
        return self.pieces[0][0]

    @property
    def sup(self):
        if not self.pieces:
            raise ValueError("empty set has no supremum")
        return self.pieces[-1][1]

    @property
    def measure(self):
        return sum((b - a for a, b in self.pieces), Fraction(0))

    def union(self, other: "RatSet") -> "RatSet":
        return RatSet(self.pieces + as_ratset(other).pieces)

    __or__ = union

    def intersection(self, other: "RatSet") -> "RatSet":
        other = as_ratset(other)
        out = []
        i = j = 0
        p, q = self.pieces, other.pieces
        while i < len(p) and j < len(q):
            a = max(p[i][0], q[j][0])
            b = min(p[i][1], q[j][1])
            if a < b:
                out.append((a, b))
            if p[i][1] < q[j][1]:
                i += 1
            else:
                j += 1
        return RatSet._raw(tuple(out))

    __and__ = intersection

    def difference(self, other: "RatSet") -> "RatSet":
        other = as_ratset(other)
        out = []
        q = other.pieces
        j = 0
        for a, b in self.pieces:
            while j < len(q) and q[j][1] <= a:
                j += 1
            cur = a
            k = j
            while k < len(q) and q[k][0] < b:
                if q[k][0] > cur:
                    out.append((cur, q[k][0]))
                cur = max(cur, q[k][1])
                k += 1
            if cur < b:
                out.append((cur, b))
        return RatSet._raw(tuple(out))

    __sub__ = difference

    def translate(self, d) -> "RatSet":
        return RatSet._raw(tuple((a + d, b + d) for a, b in self.pieces))

    def reflect(self) -> "RatSet":
        return RatSet._raw(tuple((-b, -a) for a, b in reversed(self.pieces)))

    def contains_point(self, x) -> bool:
        i = bisect.bisect_right(self.pieces, (x, _INF)) - 1
        return i >= 0 and self.pieces[i][0] <= x < self.pieces[i][1]


class _Inf:
    def __lt__(self, other):
        return False

    def __gt__(self, other):
        return True


_INF = _Inf()


def _canonical(pieces: Iterable[tuple]) -> tuple:
    ps = sorted((a, b) for a, b in pieces if a < b)
    out: list[list] = []
    for a, b in ps:
        if out and a <= out[-1][1]:
            if b > out[-1][1]:
                out[-1][1] = b
        else:
            out.append([a, b])
    return tuple((a, b) for a, b in out)


SetLike = Union[RatSet, GridInterval]


def as_ratset(x: SetLike) -> RatSet:
    if isinstance(x, RatSet):
        return x
    if isinstance(x, GridInterval):
        return RatSet._raw(((x.inf, x.sup),))
    return RatSet(x)


def contains(outer: SetLike, inner: SetLike) -> bool:
    """True iff ``inner`` is a subset of ``outer``."""
    return _pieces_subset(as_ratset(inner).pieces, as_ratset(outer).pieces)


def _pieces_subset(inner: Sequence[tuple], outer: Sequence[tuple]) -> bool:
    for a, b in inner:
        i = bisect.bisect_right(outer, (a, _INF)) - 1
        if i < 0 or b > outer[i][1] or a < outer[i][0]:
            return False
    return True


def distance(a: SetLike, b: SetLike) -> Fraction:
    """``inf |x - y|`` over ``x in a``, ``y in b``; zero when they touch or meet."""
    pa, pb = as_ratset(a).pieces, as_ratset(b).pieces
    if not pa or not pb:
        raise ValueError("distance of an empty set is undefined")
    best = None
    for x0, x1 in pa:
        i = bisect.bisect_left(pb, (x0, x0))
        for j in (i - 1, i):
            if 0 <= j < len(pb):
                y0, y1 = pb[j]
                gap = max(y0 - x1, x0 - y1, 0)
                if best is None or gap < best:
                    best = gap
    return Fraction(best)


def distance_to_complement(a: SetLike, container: SetLike) -> Fraction:
    """Distance from ``a`` to the complement of ``container`` (``a`` must lie inside it)."""
    pa, pc = as_ratset(a).pieces, as_ratset(container).pieces
    if not pa:
        raise ValueError("distance of an empty set is undefined")
    if not _pieces_subset(pa, pc):
        return Fraction(0)
    best = None
    for x0, x1 in pa:
        i = bisect.bisect_right(pc, (x0, _INF)) - 1
        c0, c1 = pc[i]
        gap = min(x0 - c0, c1 - x1)
        if best is None or gap < best:
            best = gap
    return Fraction(best)


# ---------------------------------------------------------------------------
# Predecessors
# ---------------------------------------------------------------------------


def pred_in_grid(interval: GridInterval, levels: int) -> GridInterval:
    """The interval of the same grid ``levels`` scales coarser that contains ``interval``."""
    if levels < 1:
        raise ValueError("levels must be >= 1")
    grid, j, k = interval
    t = j - levels
    if grid == Grid.STANDARD:
        return GridInterval(grid, t, k >> levels)
    # inf in units of 2^-t / 3 is (3k + e_j) / 2^levels; the shifted level-t
    # interval holding that point is the only candidate (the grid is nested).
    e_j, e_t = shift_sign(j), shift_sign(t)
    num = 3 * k + e_j - (e_t << levels)
    cand = GridInterval(grid, t, num // (3 << levels))
    a, b = interval.units(j)
    c, d = cand.units(j)
    if not (c <= a and b <= d):
        raise AssertionError(f"shifted grid not nested at {interval!r}")
    return cand


def pred_in_collection(k: SetLike, family: Sequence[SetLike]):
    """Smallest member of ``family`` strictly containing ``k``, or ``None``.

    Raises :class:`NotNestedError` if two members containing ``k`` are
    incomparable.
    """
    target = as_ratset(k)
    holders = []
    for member in family:
        s = as_ratset(member)
        if s != target and _pieces_subset(target.pieces, s.pieces):
            holders.append((s.measure, s, member))
    if not holders:
        return None
    holders.sort(key=lambda t: t[0])
    for (_, small, m_small), (_, big, m_big) in zip(holders, holders[1:]):
        if not _pieces_subset(small.pieces, big.pieces):
            raise NotNestedError((m_small, m_big))
    return holders[0][2]


# ---------------------------------------------------------------------------
# Nested (laminar) families
# ---------------------------------------------------------------------------


def _piece_measure(pieces) -> object:
    return sum(b - a for a, b in pieces)


def laminar_parents(sets: Sequence[tuple]) -> tuple[list, tuple | None]:
    """Parent map of a family given as canonical piece tuples.

    Returns ``(parents, witness)``: ``parents[i]`` is the index of the smallest
    member strictly containing member ``i`` (or -1); identical members share a
    representative and point at it.  ``witness`` is ``None`` when the family is
    nested, else a pair of indices of overlapping, incomparable members (and
    ``parents`` is then incomplete).
    """
    n = len(sets)
    parents = [-1] * n
    first: dict[tuple, int] = {}
    uniq = []
    for i, s in enumerate(sets):
        r = first.setdefault(s, i)
        if r != i:
            parents[i] = r
        else:
            uniq.append(i)

    meas = {i: _piece_measure(sets[i]) for i in uniq}
    events = []
    for i in uniq:
        negm = -meas[i]
        for a, b in sets[i]:
            events.append((a, -b, negm, i))
    events.sort()

    checked: set[tuple[int, int]] = set()
    stack: list[tuple] = []  # (end, owner)
    for a, negb, _, i in events:
        b = -negb
        while stack and stack[-1][0] <= a:
            stack.pop()
        if stack:
            top_end, owner = stack[-1]
            if top_end < b:
                return parents, (owner, i)
            if owner != i and (i, owner) not in checked:
                checked.add((i, owner))
                if not _pieces_subset(sets[i], sets[owner]):
                    return parents, (owner, i)
                if parents[i] == -1 or meas[owner] < meas[parents[i]]:
                    parents[i] = owner
        stack.append((b, i))
    return parents, None


def is_nested(family: Sequence[SetLike]) -> tuple[bool, tuple | None]:
    """Whether every two members are disjoint or comparable by inclusion.

    Returns ``(True, None)`` or ``(False, (x, y))`` with one violating pair.
    """
    sets = [as_ratset(x).pieces for x in family]
    _, witness = laminar_parents(sets)
    if witness is None:
        return True, None
    return False, (family[witness[0]], family[witness[1]])


def atoms_of_nested_family(family: Sequence[SetLike], region: SetLike) -> list[RatSet]:
    """Cells of the finest partition of ``region`` generated by a nested family.

    Every member contributes itself minus its maximal proper sub-members, and
    the region contributes what no member covers.  Empty cells are dropped.
    """
    region = as_ratset(region)
    sets = [as_ratset(x).pieces for x in family]
    parents, witness = laminar_parents(sets)
    if witness is not None:
        raise NotNestedError((family[witness[0]], family[witness[1]]))
    for s in sets:
        if not _pieces_subset(s, region.pieces):
            raise ValueError(f"member {RatSet._raw(s)!r} is not inside the region")

    reps = [i for i in range(len(sets)) if parents[i] == -1 or sets[parents[i]] != sets[i]]
    children: dict[int, list[int]] = {i: [] for i in reps}
    roots = []
    for i in reps:
        (children[parents[i]] if parents[i] != -1 else roots).append(i)

    cells = []
    for i in reps:
        covered = RatSet(p for c in children[i] for p in sets[c])
        cell = RatSet._raw(sets[i]) - covered
        if cell:
            cells.append(cell)
    rest = region - RatSet(p for r in roots for p in sets[r])
    if rest:
        cells.append(rest)
    return cells


# ---------------------------------------------------------------------------
# Windows
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WindowSpec:
    """Standard intervals ``I ⊆ [start, stop)`` with ``j_min <= scale <= j_max``."""

    start: int
    stop: int
    j_min: int
    j_max: int

    def __post_init__(self):
        if not self.start < self.stop:
            raise ValueError(f"empty region [{self.start}, {self.stop})")
        if self.j_min > self.j_max:
            raise ValueError(f"empty scale range {self.j_min}..{self.j_max}")

    @property
    def region(self) -> RatSet:
        return RatSet.interval(Fraction(self.start), Fraction(self.stop))

    def indices(self, scale: int) -> range:
        if scale >= 0:
            lo, hi = self.start << scale, self.stop << scale
        else:
            d = 1 << -scale
            lo, hi = -(-self.start // d), self.stop // d
        return range(lo, hi)

    def intervals(self) -> Iterator[GridInterval]:
        for j in range(self.j_min, self.j_max + 1):
            for k in self.indices(j):
                yield GridInterval(Grid.STANDARD, j, k)

    def __len__(self) -> int:
        return sum(len(self.indices(j)) for j in range(self.j_min, self.j_max + 1))

    def __contains__(self, interval: GridInterval) -> bool:
        return (
            interval.grid == Grid.STANDARD
            and self.j_min <= interval.scale <= self.j_max
            and interval.index in self.indices(interval.scale)
        )
