"""Exact lattice algebra and convex-lattice (CL) subsets.

Everything here works with Python integers and Fractions. numpy is used only as
a vectorized int64 engine for enumerating candidate points, never for
floating-point geometry.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Sequence

import numpy as np

IntVec = tuple[int, ...]
RatVec = tuple[Fraction, ...]

ENUM_LIMIT = 10**7
EXACT_DP_LIMIT = 200_000


# ---------------------------------------------------------------------------
# Hermite normal form and lattices


def hnf(rows: Iterable[Sequence[int]], ncols: int) -> list[list[int]]:
    """Row-style Hermite normal form; zero rows are dropped."""
    a = [list(map(int, r)) for r in rows]
    for r in a:
        if len(r) != ncols:
            raise ValueError("vectors must share ambient rank")
    pr = 0
    for col in range(ncols):
        while True:
            nz = [i for i in range(pr, len(a)) if a[i][col] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(a[i][col]))
            a[pr], a[piv] = a[piv], a[pr]
            done = True
            for i in range(pr + 1, len(a)):
                if a[i][col]:
                    q = a[i][col] // a[pr][col]
                    a[i] = [x - q * y for x, y in zip(a[i], a[pr])]
                    if a[i][col]:
                        done = False
            if done:
                break
        if pr < len(a) and a[pr][col] != 0:
            if a[pr][col] < 0:
                a[pr] = [-x for x in a[pr]]
            p = a[pr][col]
            for i in range(pr):
                q = a[i][col] // p
                if q:
                    a[i] = [x - q * y for x, y in zip(a[i], a[pr])]
            pr += 1
    return [r for r in a[:pr]]


@dataclass(frozen=True)
class Lattice:
    """Sublattice of Z^r stored by its canonical HNF basis."""

    ambient: int
    basis: tuple[IntVec, ...]

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def pivots(self) -> list[int]:
        return [next(j for j, x in enumerate(b) if x) for b in self.basis]

    def coords(self, v: Sequence[int]) -> Optional[list[int]]:
        """Integer coordinates of v in the basis, or None if v is not in the lattice."""
        r = [Fraction(x) for x in v]
        out = []
        for b, c in zip(self.basis, self.pivots):
            z = r[c] / b[c]
            if z.denominator != 1:
                return None
            z = int(z)
            out.append(z)
            if z:
                r = [x - z * y for x, y in zip(r, b)]
        if any(r):
            return None
        return out

    def __contains__(self, v) -> bool:
        return self.coords(v) is not None

    def index(self) -> int:
        """Index in Z^r (full rank only)."""
        if self.rank != self.ambient:
            raise ValueError("index is defined for full-rank lattices only")
        return math.prod(b[c] for b, c in zip(self.basis, self.pivots))

    def covolume_squared(self) -> Fraction:
        """Gram determinant of the basis (squared covolume in its own span)."""
        if self.rank == 0:
            return Fraction(1)
        g = [[Fraction(sum(x * y for x, y in zip(a, b))) for b in self.basis] for a in self.basis]
        return det(g)


def lattice_span(vectors: Iterable[Sequence[int]], ambient: Optional[int] = None) -> Lattice:
    vecs = [tuple(int(x) for x in v) for v in vectors]
    if ambient is None:
        if not vecs:
            return Lattice(0, ())
        ambient = len(vecs[0])
    return Lattice(ambient, tuple(tuple(r) for r in hnf(vecs, ambient)))


def standard_lattice(r: int) -> Lattice:
    return Lattice(r, tuple(tuple(int(i == j) for j in range(r)) for i in range(r)))


# ---------------------------------------------------------------------------
# small exact linear algebra


def det(m: list[list[Fraction]]) -> Fraction:
    a = [list(map(Fraction, r)) for r in m]
    n = len(a)
    d = Fraction(1)
    for i in range(n):
        piv = next((k for k in range(i, n) if a[k][i] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != i:
            a[i], a[piv] = a[piv], a[i]
            d = -d
        d *= a[i][i]
        for k in range(i + 1, n):
            f = a[k][i] / a[i][i]
            if f:
                a[k] = [x - f * y for x, y in zip(a[k], a[i])]
    return d


def nullspace(rows: list[Sequence[Fraction]], ncols: int) -> list[list[Fraction]]:
    """Basis of {x : row . x = 0 for all rows} over Q."""
    a = [list(map(Fraction, r)) for r in rows]
    pivcols = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivcols.append(c)
        r += 1
    free = [c for c in range(ncols) if c not in pivcols]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivcols):
            v[pc] = -a[i][fc]
        basis.append(v)
    return basis


def _primitive(v: Sequence[Fraction]) -> tuple[tuple[int, ...], Fraction]:
    den = math.lcm(*[Fraction(x).denominator for x in v])
    iv = [int(Fraction(x) * den) for x in v]
    g = math.gcd(*iv) or 1
    return tuple(x // g for x in iv), Fraction(den, g)


# ---------------------------------------------------------------------------
# convex bodies


@dataclass(frozen=True)
class Halfspaces:
    """Integer normals; equalities e.x = f and inequalities a.x <= b."""

    equalities: tuple[tuple[tuple[int, ...], Fraction], ...]
    inequalities: tuple[tuple[tuple[int, ...], Fraction], ...]


class ConvexBody:
    """Convex hull of finitely many rational points, optionally plus recession rays.

    The H-representation is computed on demand by exact facet enumeration, which is
    intended for the small vertex sets used in this package.
    """

    def __init__(self, points: Iterable[Sequence], rays: Iterable[Sequence] = ()):
        pts = sorted({tuple(Fraction(x) for x in p) for p in points})
        if not pts:
            raise ValueError("a convex body needs at least one point")
        self.dim_ambient = len(pts[0])
        self.points: tuple[RatVec, ...] = tuple(pts)
        self.rays: tuple[RatVec, ...] = tuple(tuple(Fraction(x) for x in r) for r in rays)
        self._h: Optional[Halfspaces] = None

    @property
    def bounded(self) -> bool:
        return not any(any(r) for r in self.rays)

    def scaled(self, a) -> "ConvexBody":
        a = Fraction(a)
        return ConvexBody([tuple(a * x for x in p) for p in self.points], self.rays)

    def is_symmetric(self) -> bool:
        return all(self.contains(tuple(-x for x in p)) for p in self.points)

    def bounding_box(self) -> tuple[list[Fraction], list[Fraction]]:
        if not self.bounded:
            raise ValueError("unbounded CL-subset")
        lo = [min(p[i] for p in self.points) for i in range(self.dim_ambient)]
        hi = [max(p[i] for p in self.points) for i in range(self.dim_ambient)]
        return lo, hi

    def hrep(self) -> Halfspaces:
        if self._h is None:
            if not self.bounded:
                raise ValueError("H-representation is only computed for bounded bodies")
            self._h = _facets(self.points)
        return self._h

    def contains(self, x: Sequence) -> bool:
        h = self.hrep()
        x = [Fraction(v) for v in x]
        for e, f in h.equalities:
            if sum(a * b for a, b in zip(e, x)) != f:
                return False
        for a, b in h.inequalities:
            if sum(p * q for p, q in zip(a, x)) > b:
                return False
        return True

    def contains_array(self, xs: np.ndarray, scale: Fraction = Fraction(1)) -> np.ndarray:
        """Vectorized exact membership of integer points in scale * body."""
        h = self.hrep()
        ok = np.ones(len(xs), dtype=bool)
        u, v = scale.numerator, scale.denominator
        for e, f in h.equalities:
            # v * e.x == u * f, integers after clearing f's denominator
            lhs = xs @ (np.array(e, dtype=np.int64) * (v * f.denominator))
            ok &= lhs == u * f.numerator
        for a, b in h.inequalities:
            lhs = xs @ (np.array(a, dtype=np.int64) * (v * b.denominator))
            ok &= lhs <= u * b.numerator
        return ok


def _affine_data(points: Sequence[RatVec]):
    p0 = points[0]
    r = len(p0)
    diffs = [[a - b for a, b in zip(p, p0)] for p in points[1:]]
    normals = nullspace(diffs, r) if diffs else [
        [Fraction(int(i == j)) for j in range(r)] for i in range(r)
    ]
    k = r - len(normals)
    return p0, normals, k


def _facets(points: Sequence[RatVec]) -> Halfspaces:
    p0, normals, k = _affine_data(points)
    eqs = set()
    for n in normals:
        iv, _ = _primitive(n)
        f = sum(Fraction(a) * b for a, b in zip(iv, p0))
        eqs.add((iv, f))
    ineqs = set()
    if k > 0:
        for combo in itertools.combinations(points, k):
            diffs = [[a - b for a, b in zip(p, combo[0])] for p in combo[1:]]
            ns = nullspace(diffs + [list(n) for n in normals], len(p0))
            if len(ns) != 1:
                continue
            n = ns[0]
            vals = [sum(a * b for a, b in zip(n, p)) for p in points]
            h = vals[points.index(combo[0])]
            if all(v <= h for v in vals):
                sgn = 1
            elif all(v >= h for v in vals):
                sgn = -1
            else:
                continue
            iv, s = _primitive([sgn * x for x in n])
            ineqs.add((iv, sgn * h * s))
    return Halfspaces(tuple(sorted(eqs)), tuple(sorted(ineqs)))


@dataclass(frozen=True)
class L1Body:
    """Weighted l1 body {x : sum |x_i| / R_i < 1} (or <= 1 when not strict)."""

    radii: tuple[Fraction, ...]
    strict: bool = True

    def contains(self, k: Sequence[int]) -> bool:
        s = sum(Fraction(abs(x)) / r for x, r in zip(k, self.radii) if x)
        return s < 1 if self.strict else s <= 1

    def is_symmetric(self) -> bool:
        return True


# ---------------------------------------------------------------------------
# enumeration


def lattice_points_in_box(lat: Lattice, lo: Sequence[int], hi: Sequence[int],
                          limit: int = ENUM_LIMIT) -> np.ndarray:
    """All lattice points x with lo <= x <= hi (inclusive), as an int64 array."""
    r = lat.ambient
    lo = np.array([int(v) for v in lo], dtype=np.int64)
    hi = np.array([int(v) for v in hi], dtype=np.int64)
    pts = np.zeros((1, r), dtype=np.int64)
    for b, c in zip(lat.basis, lat.pivots):
        p = b[c]
        zlo = -((pts[:, c] - lo[c]) // p)  # ceil((lo - x)/p)
        zhi = (hi[c] - pts[:, c]) // p
        cnt = np.maximum(zhi - zlo + 1, 0)
        total = int(cnt.sum())
        if total > limit:
            raise ValueError("instance too large for exact enumeration")
        if total == 0:
            return np.zeros((0, r), dtype=np.int64)
        rep = np.repeat(pts, cnt, axis=0)
        starts = np.repeat(np.cumsum(cnt) - cnt, cnt)
        z = np.arange(total, dtype=np.int64) - starts + np.repeat(zlo, cnt)
        pts = rep + z[:, None] * np.array(b, dtype=np.int64)[None, :]
    inside = np.all((pts >= lo) & (pts <= hi), axis=1)
    return pts[inside]


def _int_box(body: ConvexBody, scale: Fraction = Fraction(1)):
    lo, hi = body.bounding_box()
    return ([math.floor(scale * x) for x in lo], [math.ceil(scale * x) for x in hi])


def _box_size(lo, hi) -> int:
    return math.prod(max(0, h - l + 1) for l, h in zip(lo, hi))


# ---------------------------------------------------------------------------
# weighted l1 counting


def l1_sphere(n: int, t: int) -> int:
    """#{k in Z^n : sum |k_i| = t}."""
    if t == 0:
        return 1
    return sum(2**j * math.comb(n, j) * math.comb(t - 1, j - 1) for j in range(1, min(n, t) + 1))


def l1_ball(n: int, K: int) -> int:
    """#{k in Z^n : sum |k_i| <= K} = sum_j 2^j C(n,j) C(K,j)."""
    if K < 0:
        return 0
    return sum(2**j * math.comb(n, j) * math.comb(K, j) for j in range(0, min(n, K) + 1))


def _max_t(budget: Fraction, R: Fraction, strict: bool) -> int:
    """Largest integer t >= 0 with t/R < budget (strict) or <= budget; -1 if none."""
    x = budget * R
    if strict:
        return math.ceil(x) - 1
    return math.floor(x)


@dataclass(frozen=True)
class CountResult:
    exact: Optional[int]
    log_lo: float
    log_hi: float
    method: str

    @property
    def log_mid(self) -> float:
        return 0.5 * (self.log_lo + self.log_hi)


def _exact_result(n: int, method: str) -> CountResult:
    v = math.log(n)
    return CountResult(n, v, v, method)


def count_l1(radii: Sequence[Fraction], strict: bool = True,
             dp_limit: int = EXACT_DP_LIMIT) -> CountResult:
    """Count integer points of a weighted l1 body, exactly when affordable."""
    radii = [Fraction(r) for r in radii]
    active = [r for r in radii if (r > 1 if strict else r >= 1)]
    if not active:
        return _exact_result(1, "exact")
    groups: dict[Fraction, int] = {}
    for r in active:
        groups[r] = groups.get(r, 0) + 1
    order = sorted(groups)
    kmax = {r: _max_t(Fraction(1), r, strict) for r in order}
    cost = math.prod(kmax[r] + 1 for r in order[:-1])
    if cost <= dp_limit:
        return _exact_result(_grouped_dp(order, groups, strict), "exact")
    return _l1_interval(active, strict, kmax)


def _grouped_dp(order, groups, strict) -> int:
    last = len(order) - 1

    @lru_cache(maxsize=None)
    def f(i: int, budget: Fraction) -> int:
        R = order[i]
        K = _max_t(budget, R, strict)
        if K < 0:
            return 0
        n = groups[R]
        if i == last:
            return l1_ball(n, K)
        return sum(l1_sphere(n, t) * f(i + 1, budget - Fraction(t) / R) for t in range(K + 1))

    return f(0, Fraction(1))


def _l1_interval(active: list[Fraction], strict: bool, kmax) -> CountResult:
    N = len(active)
    # product bodies
    hi_box = sum(math.log(2 * kmax[r] + 1) for r in active)
    inner = [_max_t(Fraction(1, N), r, strict) for r in active]
    lo_box = sum(math.log(2 * max(k, 0) + 1) for k in inner)
    lo, hi = lo_box, hi_box
    # volume sandwich on the large-radius coordinates
    T = max(4 * N, 2)
    small = [r for r in active if r < T]
    large = [r for r in active if r >= T]
    if large:
        nL = len(large)
        s = sum(1 / (2 * float(r)) for r in large)
        logvol = nL * math.log(2) + sum(_log_frac(r) for r in large) - math.lgamma(nL + 1)
        small_box = sum(math.log(2 * kmax[r] + 1) for r in small)
        hi = min(hi, small_box + logvol + nL * math.log1p(s))
        if s < 1:
            lo = max(lo, logvol + nL * math.log1p(-s))
    pad = 1e-9 * (1 + abs(hi))
    return CountResult(None, max(lo - pad, 0.0), hi + pad, "interval")


def _log_frac(r: Fraction) -> float:
    return math.log(r.numerator) - math.log(r.denominator)


def enumerate_l1(radii: Sequence[Fraction], strict: bool = True,
                 limit: int = ENUM_LIMIT) -> list[IntVec]:
    """Brute-force list of the integer points of a weighted l1 body."""
    radii = [Fraction(r) for r in radii]
    ks = [_max_t(Fraction(1), r, strict) for r in radii]
    if _box_size([-k for k in ks], ks) > limit:
        raise ValueError("instance too large for exact enumeration")
    out: list[IntVec] = []

    def rec(i: int, budget: Fraction, acc: list[int]):
        if i == len(radii):
            out.append(tuple(acc))
            return
        K = _max_t(budget, radii[i], strict)
        for t in range(-K, K + 1) if K >= 0 else []:
            rec(i + 1, budget - Fraction(abs(t)) / radii[i], acc + [t])

    rec(0, Fraction(1), [])
    return out


# ---------------------------------------------------------------------------
# CL-subsets


@dataclass
class CLSubset:
    """Lattice intersected with a convex body (a ConvexBody or a weighted l1 body)."""

    lattice: Lattice
    body: object
    _elements: Optional[frozenset] = field(default=None, repr=False)

    def contains(self, v: Sequence[int]) -> bool:
        return v in self.lattice and self.body.contains(v)

    def elements(self, limit: int = ENUM_LIMIT) -> frozenset:
        if self._elements is None:
            if isinstance(self.body, L1Body):
                pts = [p for p in enumerate_l1(self.body.radii, self.body.strict, limit)
                       if p in self.lattice]
                self._elements = frozenset(pts)
            else:
                if not self.body.bounded:
                    raise ValueError("unbounded CL-subset")
                lo, hi = _int_box(self.body)
                cand = lattice_points_in_box(self.lattice, lo, hi, limit)
                mask = self.body.contains_array(cand)
                self._elements = frozenset(tuple(int(x) for x in p) for p in cand[mask])
        return self._elements

    def count(self) -> CountResult:
        return cl_count(self)


def cl_hull(S: Iterable[Sequence[int]]) -> CLSubset:
    pts = [tuple(int(x) for x in s) for s in S]
    if not pts:
        raise ValueError("cl_hull needs a nonempty set")
    lat = lattice_span(pts, len(pts[0]))
    return CLSubset(lat, ConvexBody(pts))


def cl_count(G: CLSubset) -> CountResult:
    body = G.body
    if isinstance(body, L1Body):
        if G.lattice.rank == G.lattice.ambient and G.lattice.index() == 1:
            return count_l1(body.radii, body.strict)
        return _exact_result(len(G.elements()), "enumeration")
    if not body.bounded:
        raise ValueError("unbounded CL-subset")
    return _exact_result(len(G.elements()), "enumeration")


def star_sum(m: int, S: Iterable) -> set:
    """m-fold sums {s_1 + ... + s_m : s_i in S}."""
    if m < 1:
        raise ValueError("m must be positive")
    base = list(set(S))
    scalar = bool(base) and not isinstance(base[0], tuple)

    def add(a, b):
        return a + b if scalar else tuple(x + y for x, y in zip(a, b))

    cur = set(base)
    for _ in range(m - 1):
        cur = {add(a, b) for a in cur for b in base}
    return cur


def dilate_count(M: Lattice, body: ConvexBody, a, limit: int = ENUM_LIMIT) -> tuple[int, int]:
    """(#(M cap body), #(M cap a*body)) by exact enumeration."""
    a = Fraction(a)
    if a < 1:
        raise ValueError("dilation factor must be >= 1")
    if not body.bounded:
        raise ValueError("unbounded CL-subset")
    lo, hi = _int_box(body, a)
    if _box_size(lo, hi) > limit:
        raise ValueError("instance too large for exact enumeration")
    cand = lattice_points_in_box(M, lo, hi, limit)
    return int(body.contains_array(cand).sum()), int(body.contains_array(cand, a).sum())
