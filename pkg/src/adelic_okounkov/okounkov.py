"""Okounkov semigroups of restricted strictly small sections and volume estimators."""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .flags import GoodFlag, center_avoids, valuation_vector
from .lattice import CountResult, enumerate_l1, hnf
from .model import (
    DiagonalModel,
    Face,
    GradedSmallSections,
    Section,
    normalize_face,
    restrict_to_face,
    vp,
)

NEG_INF = -math.inf
REPRESENTATIVE_ENUM_LIMIT = 200_000


# ---------------------------------------------------------------------------
# count cache


class CountCache:
    """Directory of memoized per-(model, face, level) counts keyed by content digest."""

    def __init__(self, root: str | os.PathLike):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def from_env() -> Optional["CountCache"]:
        d = os.environ.get("ADELIC_OKOUNKOV_CACHE")
        return CountCache(d) if d else None

    def _path(self, key: str) -> Path:
        return self.root / f"{key}.json"

    @staticmethod
    def key(gss: GradedSmallSections) -> str:
        payload = json.dumps([[str(r) for r in gss.radii], gss.strict], separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()

    def get(self, gss: GradedSmallSections) -> Optional[CountResult]:
        p = self._path(self.key(gss))
        if not p.exists():
            return None
        d = json.loads(p.read_text())
        ex = int(d["exact"]) if d["exact"] is not None else None
        return CountResult(ex, d["log_lo"], d["log_hi"], d["method"])

    def put(self, gss: GradedSmallSections, res: CountResult) -> None:
        d = {"exact": str(res.exact) if res.exact is not None else None,
             "log_lo": res.log_lo, "log_hi": res.log_hi, "method": res.method}
        tmp = self._path(self.key(gss)).with_suffix(".tmp")
        tmp.write_text(json.dumps(d))
        tmp.replace(self._path(self.key(gss)))


def level_count(gss: GradedSmallSections, cache: Optional[CountCache] = None) -> CountResult:
    if cache is not None:
        hit = cache.get(gss)
        if hit is not None:
            return hit
    res = gss.count()
    if cache is not None:
        cache.put(gss, res)
    return res


# ---------------------------------------------------------------------------
# valuation images per level


def level_image(gss: GradedSmallSections, flag: GoodFlag) -> tuple[frozenset, str]:
    """Valuation image of gss minus zero, and how it was obtained.

    With the center at the origin of the chart the image is the union of the
    images of single terms p^t * step * x^beta: the content and the leading
    monomial of any section are already realized by one of its terms, which is
    itself in the set because the body is coordinate-wise downward closed.
    """
    act = gss.active()
    if not any(flag.center):
        out = set()
        for i in act:
            beta, q, R = gss.monomials[i], gss.steps[i], gss.radii[i]
            tail = tuple(beta[j] for j in flag.order)
            base = vp(q, flag.p)
            t = 0
            while (flag.p**t < R) if gss.strict else (flag.p**t <= R):
                out.add((base + t,) + tail)
                t += 1
        return frozenset(out), "exact"
    try:
        secs = gss.sections(REPRESENTATIVE_ENUM_LIMIT)
        return frozenset(valuation_vector(s, flag) for s in secs if not s.is_zero()), "exact"
    except ValueError:
        return frozenset(_representatives(gss, flag)), "representatives"


def _representatives(gss: GradedSmallSections, flag: GoodFlag) -> set:
    """Images of single- and two-term sections with small p-adic digits (a subset of the image)."""
    p = flag.p
    act = gss.active()
    half = max(1, (p - 1) // 2)
    digits = [u for u in range(-half, half + 1) if u % p]
    out = set()
    for i in act:
        for t in range(0, 64):
            c = p**t
            if not (c / gss.radii[i] < 1 if gss.strict else c / gss.radii[i] <= 1):
                break
            out.add(valuation_vector(Section.make(gss.m, {gss.monomials[i]: gss.steps[i] * c}), flag))
            for j in act:
                if j <= i:
                    continue
                for u1 in digits:
                    for u2 in digits:
                        norm = Fraction(abs(u1) * c) / gss.radii[i] + Fraction(abs(u2) * c) / gss.radii[j]
                        if norm < 1 if gss.strict else norm <= 1:
                            s = Section.make(gss.m, {gss.monomials[i]: gss.steps[i] * u1 * c,
                                                     gss.monomials[j]: gss.steps[j] * u2 * c})
                            out.add(valuation_vector(s, flag))
    return out


def flag_is_good(model: DiagonalModel, face: Face, flag: GoodFlag, m_max: int) -> bool:
    """Some restricted strictly small monomial of level <= m_max survives at the center."""
    for m in range(1, m_max + 1):
        gss = restrict_to_face(model, m, face).hull
        for i in gss.active():
            if center_avoids(flag, Section.make(m, {gss.monomials[i]: 1})):
                return True
    return False


# ---------------------------------------------------------------------------
# semigroups


@dataclass
class SemigroupSample:
    face: Face
    flag: GoodFlag
    levels: dict[int, frozenset]
    methods: dict[int, str]

    @property
    def n_hat(self) -> list[int]:
        return sorted(m for m, img in self.levels.items() if img)

    def pairs(self) -> list[tuple[int, ...]]:
        return [(m,) + w for m in sorted(self.levels) for w in sorted(self.levels[m])]

    def span_hnf(self) -> list[list[int]]:
        pr = self.pairs()
        return hnf(pr, len(self.face) + 1) if pr else []

    @property
    def rank(self) -> int:
        return len(self.span_hnf())

    def index(self) -> int:
        """|S|: index of the slice lattice <S> cap {m = 0} in Z^(dim Y + 1), or 0 if not full rank."""
        H = self.span_hnf()
        full = len(self.face) + 1
        if len(H) < full:
            return 0
        # rows after the first have a zero first entry and span the slice
        return math.prod(r[next(j for j, x in enumerate(r) if x)] for r in H[1:])

    def generates(self) -> bool:
        """Does S generate Z x Z^(dim Y + 1)?"""
        H = self.span_hnf()
        full = len(self.face) + 1
        return len(H) == full and all(H[i][i] == 1 for i in range(full))

    def base_points(self) -> list[tuple[Fraction, ...]]:
        return sorted({tuple(Fraction(x, m) for x in w) for m, img in self.levels.items() for w in img})


def build_semigroup(model: DiagonalModel, face, flag: GoodFlag, m_max: int,
                    m_min: int = 1) -> SemigroupSample:
    face = normalize_face(model, face)
    if tuple(flag.face) != face:
        raise ValueError("flag/face mismatch")
    levels, methods = {}, {}
    for m in range(m_min, m_max + 1):
        gss = restrict_to_face(model, m, face).hull
        levels[m], methods[m] = level_image(gss, flag)
    return SemigroupSample(face, flag, levels, methods)


def kappa_hat(model: DiagonalModel, face, m_max: int) -> float | int:
    """dim(face) if some level <= m_max has a nonzero restricted small section, else -inf."""
    face = normalize_face(model, face)
    for m in range(1, m_max + 1):
        if not restrict_to_face(model, m, face).hull.is_trivial():
            return len(face) - 1
    return NEG_INF


def kappa_from_rank(sample: SemigroupSample) -> float | int:
    return sample.rank - 2 if sample.rank else NEG_INF


# ---------------------------------------------------------------------------
# volume estimates


@dataclass
class LevelRow:
    m: int
    count_lo: float
    count_hi: float
    normalized_lo: float
    normalized_hi: float
    exact: bool


@dataclass
class VolumeReport:
    face: Face
    kappa: float | int
    rows: list[LevelRow]
    raw: float
    raw_interval: tuple[float, float]
    extrapolated: Optional[float]
    extrapolated_interval: Optional[tuple[float, float]]
    e_hat: Optional[float]
    generation: Optional[bool]
    oscillation: Optional[float]
    first_level: Optional[int]

    @property
    def estimate(self) -> float:
        return self.extrapolated if self.extrapolated is not None else self.raw

    @property
    def estimate_interval(self) -> tuple[float, float]:
        return self.extrapolated_interval if self.extrapolated_interval is not None else self.raw_interval

    def to_json(self) -> dict:
        d = asdict(self)
        d["kappa"] = "-inf" if self.kappa == NEG_INF else self.kappa
        return d


def _norm(k: int, m: int) -> float:
    return math.factorial(k + 1) / float(m) ** (k + 1)


def _extrapolate(ms: Sequence[int], ys: Sequence[float]) -> float:
    """Fit c0 + c1 * log(m)/m through the two largest levels and return c0."""
    (m1, y1), (m2, y2) = sorted(zip(ms, ys))[-2:]
    x1, x2 = math.log(m1) / m1, math.log(m2) / m2
    c1 = (y1 - y2) / (x1 - x2)
    return y2 - c1 * x2


def volume_estimate(model: DiagonalModel, face, m_range: Iterable[int], extrapolate: bool = True,
                    flag: Optional[GoodFlag] = None, cache: Optional[CountCache] = None,
                    kappa_m_max: Optional[int] = None) -> VolumeReport:
    face = normalize_face(model, face)
    ms = sorted(set(int(m) for m in m_range))
    if not ms or ms[0] < 1:
        raise ValueError("m_range must be a nonempty set of positive integers")
    dimY = len(face) - 1
    kap = kappa_hat(model, face, kappa_m_max or ms[-1])
    rows = []
    for m in ms:
        gss = restrict_to_face(model, m, face).hull
        res = level_count(gss, cache)
        f = _norm(dimY, m)
        rows.append(LevelRow(m, res.log_lo, res.log_hi, res.log_lo * f, res.log_hi * f,
                             res.exact is not None))
    last = rows[-1]
    raw = 0.5 * (last.normalized_lo + last.normalized_hi)
    ext = ext_iv = None
    nonzero = [r for r in rows if r.count_hi > 0]
    if extrapolate and len(nonzero) >= 2:
        mm = [r.m for r in nonzero]
        ext = _extrapolate(mm, [0.5 * (r.normalized_lo + r.normalized_hi) for r in nonzero])
        ext_iv = (_extrapolate(mm, [r.normalized_lo for r in nonzero]),
                  _extrapolate(mm, [r.normalized_hi for r in nonzero]))
    e_hat = None
    if kap != NEG_INF:
        k = int(kap)
        e_hat = 0.5 * (last.count_lo + last.count_hi) * _norm(k, last.m)
        if ext is not None and k == dimY:
            e_hat = ext
    gen = None
    if flag is not None:
        gen = build_semigroup(model, face, flag, ms[-1]).generates()
    osc = None
    if len(rows) >= 3:
        mids = [0.5 * (r.normalized_lo + r.normalized_hi) for r in rows[-3:]]
        osc = max(mids) - min(mids)
    first = next((r.m for r in rows if r.count_hi > 0), None)
    return VolumeReport(face, kap, rows, raw, (last.normalized_lo, last.normalized_hi), ext, ext_iv,
                        e_hat, gen, osc, first)


def geometric_mult_estimate(model: DiagonalModel, face, m_range: Iterable[int]) -> float:
    """e(R) from the number of restricted small monomials, normalized by m^kappa / kappa!."""
    face = normalize_face(model, face)
    ms = sorted(set(m_range))
    kap = kappa_hat(model, face, ms[-1])
    if kap == NEG_INF:
        raise ValueError("no restricted strictly small sections in range")
    k = int(kap)
    m = ms[-1]
    dims = len(restrict_to_face(model, m, face).hull.active())
    return dims * math.factorial(k) / float(m) ** k


# ---------------------------------------------------------------------------
# hull volumes


def _hull2d(pts: list[tuple[Fraction, Fraction]]) -> list[tuple[Fraction, Fraction]]:
    pts = sorted(set(pts))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def hull_volume(pts: Sequence[Sequence[Fraction]]) -> float:
    if not pts:
        return 0.0
    d = len(pts[0])
    if d == 1:
        xs = [p[0] for p in pts]
        return float(max(xs) - min(xs))
    if d == 2:
        h = _hull2d([tuple(p) for p in pts])
        if len(h) < 3:
            return 0.0
        a = sum(h[i][0] * h[(i + 1) % len(h)][1] - h[(i + 1) % len(h)][0] * h[i][1] for i in range(len(h)))
        return float(abs(a) / 2)
    import numpy as np
    from scipy.spatial import ConvexHull

    P = np.array([[float(x) for x in p] for p in pts])
    try:
        return float(ConvexHull(P).volume)
    except Exception:
        return 0.0


@dataclass
class KKOkResult:
    count_estimate: float
    hull_volume: float
    semigroup_index: int
    generates: bool
    kappa: int
    rel_diff: float
    methods: dict = field(default_factory=dict)


def kkok_cross_check(model: DiagonalModel, face, flag: GoodFlag, m_range: Iterable[int]) -> KKOkResult:
    face = normalize_face(model, face)
    ms = sorted(set(m_range))
    kap = kappa_hat(model, face, ms[-1])
    if kap == NEG_INF:
        raise ValueError("kappa is -inf: no restricted strictly small sections")
    if not flag_is_good(model, face, flag, ms[-1]):
        raise ValueError("flag not good for the restricted series")
    sample = build_semigroup(model, face, flag, ms[-1], ms[0])
    k = int(kap)
    m = ms[-1]
    count_est = len(sample.levels[m]) / float(m) ** (k + 1)
    idx = sample.index() or 1
    vol = hull_volume(sample.base_points()) / idx
    rel = abs(count_est - vol) / max(abs(vol), 1e-300)
    return KKOkResult(count_est, vol, sample.index(), sample.generates(), k, rel,
                      {str(m): meth for m, meth in sample.methods.items()})
