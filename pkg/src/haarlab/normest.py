"""Norm probes on finite windows.

Only the input space is truncated: every image ``op h_I`` is an exact global
step function.  Two estimators:

* ``norm_l2``: power iteration on the exact Gram matrix of the
  L2-normalized images;
* ``norm_lp_lower``: a nonlinear power method for the ``p -> p`` norm on the
  window span, working on cell discretizations that are exact because all
  images and inputs are constant on the cells of their common breakpoints.

Every ``lp`` bound is the ratio ``||A u||_p / ||u||_p`` of a concrete witness
``u`` and :func:`certify` re-evaluates it in integer arithmetic.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import sparse

from .grid import GridInterval, WindowSpec
from .maps import sigma, tau, unilateral_sigma
from .operators import a_fn, b_fn, bm_fn, family_members, mds_families, member_source, u_fn
from .partition import PartitionLabel, all_labels, classify
from .report import CheckRecord, Report
from .stepfn import StepFunction, _int_inner, _to_int_grid, haar, orthogonality_report

OPERATORS = ("T", "U", "S", "S0", "S1", "A", "B", "Bm")


def image_fn(op: str, m: int = 0, eps: int = 0) -> Callable[[GridInterval], StepFunction]:
    """``I -> op h_I`` as an exact step function."""
    if op == "T":
        return lambda I: haar(tau(m, I))
    if op == "S":
        return lambda I: haar(sigma(I))
    if op in ("S0", "S1"):
        e = int(op[1])
        return lambda I: haar(unilateral_sigma(e, I))
    if op == "U":
        return lambda I: u_fn(m, I)
    if op == "A":
        return lambda I: a_fn(eps, m, I)
    if op == "B":
        return lambda I: b_fn(eps, I)
    if op == "Bm":
        return lambda I: bm_fn(eps, m, I)
    raise ValueError(f"unknown operator {op!r}; expected one of {', '.join(OPERATORS)}")


def restricted_basis(window: WindowSpec, m: int, label: PartitionLabel | None) -> list[GridInterval]:
    basis = list(window.intervals())
    if label is None:
        return basis
    return [I for I in basis if label.matches(classify(m, I))]


# ---------------------------------------------------------------------------
# Gram matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GramMatrix:
    """Sparse symmetric matrix of ``<op e_I, op e_J>`` with ``e_I = h_I / |I|^(1/2)``.

    Each stored entry is ``(r, root2)`` meaning ``r * sqrt(2)`` when ``root2``
    else ``r``; ``r`` is an exact fraction.
    """

    basis: tuple[GridInterval, ...]
    entries: dict[tuple[int, int], tuple[Fraction, bool]]

    @property
    def size(self) -> int:
        return len(self.basis)

    def value(self, i: int, j: int) -> float:
        r, root2 = self.entries.get((i, j), (Fraction(0), False))
        return float(r) * (math.sqrt(2) if root2 else 1.0)

    def to_sparse(self) -> sparse.csr_matrix:
        n = self.size
        if not self.entries:
            return sparse.csr_matrix((n, n))
        rows, cols, vals = [], [], []
        for (i, j), (r, root2) in self.entries.items():
            rows.append(i)
            cols.append(j)
            vals.append(float(r) * (math.sqrt(2) if root2 else 1.0))
        return sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()

    def row_bounds(self) -> list[tuple[Fraction, Fraction]]:
        """Per row ``(A, B)`` with absolute row sum ``A + B sqrt(2)``."""
        out = [(Fraction(0), Fraction(0)) for _ in range(self.size)]
        for (i, _), (r, root2) in self.entries.items():
            a, b = out[i]
            out[i] = (a, b + abs(r)) if root2 else (a + abs(r), b)
        return out


def _overlapping_pairs(hulls: Sequence[tuple[int, int]]) -> Iterable[tuple[int, int]]:
    """Index pairs ``(i, j)``, ``i <= j``, whose hulls intersect."""
    order = sorted(range(len(hulls)), key=lambda n: hulls[n])
    active: list[int] = []
    for n in order:
        a, b = hulls[n]
        active = [k for k in active if hulls[k][1] > a]
        yield (n, n)
        for k in active:
            yield (min(k, n), max(k, n))
        active.append(n)


def gram_matrix(
    op: str, m: int, window: WindowSpec, eps: int = 0, label: PartitionLabel | None = None
) -> GramMatrix:
    basis = restricted_basis(window, m, label)
    img = image_fn(op, m, eps)
    fns = [img(I) for I in basis]
    ints, D, V = _to_int_grid(fns)
    unit = Fraction(1, D * V * V)
    hulls = [(g.xs[0], g.xs[-1]) if g.vs else (0, 0) for g in ints]
    entries: dict[tuple[int, int], tuple[Fraction, bool]] = {}
    for i, j in _overlapping_pairs(hulls):
        if not ints[i].vs or not ints[j].vs:
            continue
        raw = _int_inner(ints[i], ints[j])
        if raw == 0:
            continue
        e = basis[i].scale + basis[j].scale
        r = raw * unit * _pow2(e // 2)
        val = (r, e % 2 == 1)
        entries[(i, j)] = val
        entries[(j, i)] = val
    return GramMatrix(tuple(basis), entries)


def _pow2(e: int) -> Fraction:
    return Fraction(1 << e) if e >= 0 else Fraction(1, 1 << -e)


# ---------------------------------------------------------------------------
# L2 norm
# ---------------------------------------------------------------------------


@dataclass
class NormReport:
    op: str
    m: int
    p: float
    window: tuple[int, int, int, int]
    label: str
    lower_bound: float
    iterations: int
    converged: bool
    residual: float
    witness: dict[GridInterval, float] = field(default_factory=dict, repr=False)
    certified: bool | None = None

    def row(self) -> dict:
        d = asdict(self)
        d.pop("witness")
        d["window"] = list(self.window)
        return d


def _window_tuple(w: WindowSpec) -> tuple[int, int, int, int]:
    return (w.start, w.stop, w.j_min, w.j_max)


def _label_text(label: PartitionLabel | None) -> str:
    return "full" if label is None else str(label)


def power_iteration(G, tol: float = 1e-10, max_iter: int = 10_000, start: np.ndarray | None = None):
    """Largest eigenvalue of a symmetric PSD matrix; returns ``(value, iters, converged, first_iterate)``."""
    n = G.shape[0]
    x = np.ones(n) if start is None else np.asarray(start, dtype=float)
    x = x / np.linalg.norm(x)
    lam = float(x @ (G @ x))
    first = None
    for it in range(1, max_iter + 1):
        y = G @ x
        ny = np.linalg.norm(y)
        if ny == 0:
            return 0.0, it, True, x
        x = y / ny
        if first is None:
            first = x.copy()
        new = float(x @ (G @ x))
        if abs(new - lam) <= tol * max(1.0, abs(new)):
            return new, it, True, first
        lam = new
    return lam, max_iter, False, first


def norm_l2(
    op: str,
    m: int,
    window: WindowSpec,
    eps: int = 0,
    label: PartitionLabel | None = None,
    tol: float = 1e-10,
    max_iter: int = 10_000,
) -> NormReport:
    """Largest singular value of ``op`` on the window span (L2-normalized basis)."""
    gram = gram_matrix(op, m, window, eps, label)
    base = dict(op=op, m=m, p=2, window=_window_tuple(window), label=_label_text(label))
    if gram.size == 0:
        return NormReport(**base, lower_bound=0.0, iterations=0, converged=True, residual=0.0)
    G = gram.to_sparse()
    lam, iters, conv, first = power_iteration(G, tol, max_iter)
    start = np.zeros(gram.size)
    start[int(np.argmax(np.abs(first)))] = 1.0
    lam2, iters2, conv2, _ = power_iteration(G, tol, max_iter, start)
    if lam2 > lam:
        lam, conv = lam2, conv2
    iters += iters2
    return NormReport(
        **base,
        lower_bound=math.sqrt(max(lam, 0.0)),
        iterations=iters,
        converged=conv,
        residual=0.0,
    )


def gershgorin_bound(gram: GramMatrix) -> float:
    return max((float(a) + float(b) * math.sqrt(2) for a, b in gram.row_bounds()), default=0.0)


def gershgorin_check(gram: GramMatrix, estimate: float) -> bool:
    """Exact test ``estimate <= max_i (A_i + B_i sqrt 2)``."""
    lam = Fraction(estimate)
    for a, b in gram.row_bounds():
        d = lam - a
        if d <= 0 or d * d <= 2 * b * b:
            return True
    return False


# ---------------------------------------------------------------------------
# Lp lower bounds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LpConfig:
    max_iter: int = 500
    tol: float = 1e-10
    seed: int = 0
    random_starts: int = 1


@dataclass
class Discretization:
    """Exact cell matrices: ``M`` (image cells x basis) and ``H`` (input cells x basis)."""

    basis: list[GridInterval]
    M: sparse.csr_matrix
    H: sparse.csr_matrix
    image_len: np.ndarray
    input_len: np.ndarray
    # exact data for certification
    M_int: list[list[tuple[int, int]]]  # per image cell: (basis idx, integer value)
    H_int: list[list[tuple[int, int]]]
    image_len_int: list[int]
    input_len_int: list[int]
    D_img: int
    V_img: int
    D_in: int


def _cells(fns: Sequence[StepFunction]):
    ints, D, V = _to_int_grid(fns)
    xs = sorted({x for g in ints for x in g.xs})
    pos = {x: n for n, x in enumerate(xs)}
    rows: list[list[tuple[int, int]]] = [[] for _ in range(max(len(xs) - 1, 0))]
    for col, g in enumerate(ints):
        for a, b, v in zip(g.xs, g.xs[1:], g.vs):
            if v == 0:
                continue
            for c in range(pos[a], pos[b]):
                rows[c].append((col, v))
    lens = [y - x for x, y in zip(xs, xs[1:])]
    return rows, lens, D, V


def _to_csr(rows, ncols, V):
    indptr, indices, data = [0], [], []
    for r in rows:
        for col, v in r:
            indices.append(col)
            data.append(v / V)
        indptr.append(len(indices))
    return sparse.csr_matrix((data, indices, indptr), shape=(len(rows), ncols))


def discretize(op: str, m: int, window: WindowSpec, eps: int = 0, label: PartitionLabel | None = None) -> Discretization:
    basis = restricted_basis(window, m, label)
    img = image_fn(op, m, eps)
    M_rows, M_len, D_img, V_img = _cells([img(I) for I in basis])
    H_rows, H_len, D_in, V_in = _cells([haar(I) for I in basis])
    assert V_in == 1
    n = len(basis)
    return Discretization(
        basis=basis,
        M=_to_csr(M_rows, n, V_img),
        H=_to_csr(H_rows, n, 1),
        image_len=np.array(M_len, dtype=float) / D_img,
        input_len=np.array(H_len, dtype=float) / D_in,
        M_int=M_rows,
        H_int=H_rows,
        image_len_int=M_len,
        input_len_int=H_len,
        D_img=D_img,
        V_img=V_img,
        D_in=D_in,
    )


def _lp(v: np.ndarray, lens: np.ndarray, p: float) -> float:
    return float(np.sum(lens * np.abs(v) ** p)) ** (1.0 / p)


def norm_lp_lower(
    op: str,
    m: int,
    window: WindowSpec,
    p: float,
    eps: int = 0,
    label: PartitionLabel | None = None,
    config: LpConfig = LpConfig(),
    disc: Discretization | None = None,
) -> NormReport:
    """Certified lower bound for ``||op||_{p -> p}`` on the window span.

    Iterates ``v = A c``; ``w = |v|^(p-1) sign v``; ``g = A* w`` read off
    against the basis; the representing function ``sum g_I h_I / |I|`` goes
    through the dual map ``|.|^(p'-1) sign`` and is projected back onto the
    span.  The best ratio over all starts is reported.
    """
    if p <= 1:
        raise ValueError(f"p must be > 1, got {p}")
    if disc is None:
        disc = discretize(op, m, window, eps, label)
    base = dict(op=op, m=m, p=p, window=_window_tuple(window), label=_label_text(label))
    n = len(disc.basis)
    if n == 0:
        return NormReport(**base, lower_bound=0.0, iterations=0, converged=True, residual=0.0)

    q = p / (p - 1)
    size = np.array([float(I.measure) for I in disc.basis])
    M, H, lm, lh = disc.M, disc.H, disc.image_len, disc.input_len
    MT, HT = M.T.tocsr(), H.T.tocsr()

    def ratio(c):
        den = _lp(H @ c, lh, p)
        return _lp(M @ c, lm, p) / den if den > 0 else 0.0

    def run(c):
        best_c, best = c, ratio(c)
        prev = best
        for it in range(1, config.max_iter + 1):
            v = M @ c
            w = lm * np.abs(v) ** (p - 1) * np.sign(v)
            g = MT @ w
            r = H @ (g / size)
            u = np.abs(r) ** (q - 1) * np.sign(r)
            c_new = (HT @ (lh * u)) / size
            nrm = _lp(H @ c_new, lh, p)
            if nrm == 0 or not np.isfinite(nrm):
                return best_c, best, it, True
            c = c_new / nrm
            cur = ratio(c)
            if cur > best:
                best_c, best = c, cur
            if abs(cur - prev) <= config.tol * max(1.0, cur):
                return best_c, best, it, True
            prev = cur
        return best_c, best, config.max_iter, False

    starts = [np.ones(n)]
    rng = np.random.default_rng(config.seed)
    results = []
    c0, r0, it0, conv0 = run(starts[0] / _lp(H @ starts[0], lh, p))
    results.append((r0, c0, it0, conv0))
    e = np.zeros(n)
    e[int(np.argmax(np.abs(c0)))] = 1.0
    starts = [e] + [rng.standard_normal(n) for _ in range(config.random_starts)]
    for s in starts:
        c, r, it, conv = run(s / _lp(H @ s, lh, p))
        results.append((r, c, it, conv))

    best_r, best_c, _, _ = max(results, key=lambda t: t[0])
    iters = sum(t[2] for t in results)
    converged = all(t[3] for t in results)
    residual = abs(results[0][0] - best_r)
    witness = {I: float(x) for I, x in zip(disc.basis, best_c) if x != 0}
    return NormReport(
        **base,
        lower_bound=float(best_r),
        iterations=iters,
        converged=converged,
        residual=float(residual),
        witness=witness,
    )


def exact_ratio_power(disc: Discretization, coefficients: Sequence[float], p: int) -> Fraction:
    """``(||A u|| / ||u||)^p`` exactly for the float coefficients given (``p`` even)."""
    if p <= 0 or p % 2:
        raise ValueError("exact evaluation needs an even positive integer p")
    fr = [Fraction(float(c)) for c in coefficients]
    den = 1
    for f in fr:
        den = den * f.denominator // math.gcd(den, f.denominator)
    N = [int(f * den) for f in fr]

    def power(rows, lens):
        total = 0
        for row, ln in zip(rows, lens):
            s = sum(N[col] * v for col, v in row)
            total += ln * s**p
        return total

    num = Fraction(power(disc.M_int, disc.image_len_int), disc.D_img * disc.V_img**p)
    dnm = Fraction(power(disc.H_int, disc.input_len_int), disc.D_in)
    return num / dnm


def certify(report: NormReport, disc: Discretization, rel_tol: float = 1e-9) -> bool:
    """Re-evaluate the witness ratio exactly; ``True`` if it matches within ``rel_tol``."""
    p = report.p
    if not float(p).is_integer() or int(p) % 2:
        raise ValueError("certification is exact only for even integer p")
    coeffs = [report.witness.get(I, 0.0) for I in disc.basis]
    exact = exact_ratio_power(disc, coeffs, int(p))
    exact_root = float(exact) ** (1.0 / p)
    ok = abs(report.lower_bound - exact_root) <= rel_tol * exact_root
    report.certified = ok
    return ok


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

CSV_COLUMNS = ("op", "m", "p", "label", "lower_bound", "ref_curve", "iterations", "converged")
DEFAULT_EXPONENT = {"U": 0.75}  # everything else defaults to 0.25


def reference_curve(m: int, exponent: float) -> float:
    return math.log2(2 + abs(m)) ** exponent


def sweep(
    op: str,
    m_values: Sequence[int],
    p: float,
    window: WindowSpec,
    mode: str = "full",
    eps: int = 0,
    exponent: float | None = None,
    config: LpConfig = LpConfig(),
    pool=None,
) -> list[dict]:
    """Rows of the CSV schema, in ``m`` then label order.

    ``mode`` is ``full``, ``per_label`` or ``both``.  ``pool`` is an optional
    executor with a ``map`` method; results keep submission order.
    """
    if mode not in ("full", "per_label", "both"):
        raise ValueError(f"bad mode {mode!r}")
    if exponent is None:
        exponent = DEFAULT_EXPONENT.get(op, 0.25)
    jobs = []
    for m in m_values:
        labels: list[PartitionLabel | None] = []
        if mode in ("full", "both"):
            labels.append(None)
        if mode in ("per_label", "both"):
            labels += all_labels(m)
        jobs += [(op, m, p, window, eps, lab, config) for lab in labels]
    mapper = pool.map if pool is not None else map
    rows = []
    for job, rep in zip(jobs, mapper(_sweep_job, jobs)):
        if rep is None:
            continue
        rows.append(
            {
                "op": op,
                "m": job[1],
                "p": _fmt(p),
                "label": _label_csv(job[5]),
                "lower_bound": _fmt(rep.lower_bound),
                "ref_curve": _fmt(reference_curve(job[1], exponent)),
                "iterations": rep.iterations,
                "converged": int(rep.converged),
            }
        )
    return rows


def _sweep_job(job) -> NormReport | None:
    op, m, p, window, eps, label, config = job
    disc = discretize(op, m, window, eps, label)
    if not disc.basis:
        return None
    if p == 2:
        return norm_l2(op, m, window, eps, label)
    return norm_lp_lower(op, m, window, p, eps, label, config, disc)


def _label_csv(label: PartitionLabel | None) -> str:
    return "full" if label is None else str(label)


def _fmt(x) -> str:
    return f"{float(x):.12g}"


def rows_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Pythagoras
# ---------------------------------------------------------------------------


def pythagoras_check(m: int, label: PartitionLabel, window: WindowSpec) -> Report:
    """Exact ``||sum f||^2 == sum ||f||^2`` and pairwise orthogonality per family."""
    report = Report()
    members = family_members(m, label, window)
    for name, fam in mds_families(m, label, window).items():
        report.add(pythagoras_record(f"m={m} {label} {name}", name, fam, members, m))
    return report


def pythagoras_record(
    tag: str, name: str, fam: Sequence[tuple[int, StepFunction]], members: Sequence[GridInterval], m: int
) -> CheckRecord:
    """One check record for a family; a failure names the two source intervals."""
    if not fam:
        return CheckRecord.ok("pythagoras", tag, "empty family")
    res = orthogonality_report([f for _, f in fam])
    if res.ok:
        return CheckRecord.ok("pythagoras", tag, f"{len(fam)} members, ||sum||^2={res.norm_of_sum}")
    detail = f"||sum||^2={res.norm_of_sum} vs sum||f||^2={res.sum_of_norms}"
    witness: tuple = ()
    if res.pair is not None:
        witness = tuple(member_source(name, n, members, m) for n in res.pair)
        detail += f"; inner product {res.inner}"
    return CheckRecord.fail("pythagoras", tag, witness, detail)
