"""Diagonal adelic monomial models on P^n over Q.

A model is the line bundle O(d) on P^n together with one concave piecewise-linear
weight per place.  A weight is a minimum of affine functions of the barycentric
coordinate u in P = d * simplex (u has n+1 entries summing to d).  At degree m the
monomial x^alpha gets the floor exponents

    v_inf(alpha, m) = floor(m * phi_inf(alpha/m) / log 2)
    e_p(alpha, m)   = floor(m * phi_p(alpha/m) / log p)

and sections are normed coefficient-wise: sup over alpha of |c|_p * p^-e_p at a
prime, and the weighted l1 sum of |c| * 2^-v_inf at infinity.  Concavity plus
superadditivity of floors makes these norms submultiplicative.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Sequence

from .lattice import CLSubset, CountResult, L1Body, count_l1, enumerate_l1, standard_lattice
from .logq import LogQ, factorize, is_prime

Face = tuple[int, ...]


# ---------------------------------------------------------------------------
# places and weights


@dataclass(frozen=True, order=True)
class Place:
    p: int  # 0 encodes the archimedean place

    @staticmethod
    def inf() -> "Place":
        return Place(0)

    @staticmethod
    def finite(p: int) -> "Place":
        if not is_prime(p):
            raise ValueError(f"{p} is not a prime")
        return Place(p)

    @property
    def is_inf(self) -> bool:
        return self.p == 0

    @property
    def log_base(self) -> int:
        return 2 if self.is_inf else self.p

    def label(self) -> str:
        return "inf" if self.is_inf else str(self.p)

    def abs(self, a: Fraction) -> Fraction:
        a = Fraction(a)
        if self.is_inf:
            return abs(a)
        if a == 0:
            return Fraction(0)
        return Fraction(self.p) ** (-vp(a, self.p))


INF = Place.inf()


def vp(a: Fraction, p: int) -> int:
    """p-adic valuation of a nonzero rational."""
    a = Fraction(a)
    if a == 0:
        raise ValueError("valuation of zero")
    v = 0
    n, d = a.numerator, a.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


@dataclass(frozen=True)
class AffinePiece:
    gradient: tuple[LogQ, ...]
    offset: LogQ

    def scaled_value(self, alpha: Sequence[int], m: int) -> LogQ:
        """m * (<g, alpha/m> + c)."""
        acc = self.offset * m
        for g, a in zip(self.gradient, alpha):
            if a:
                acc = acc + g * int(a)
        return acc

    def floats(self) -> tuple[list[float], float]:
        return [float(g) for g in self.gradient], float(self.offset)


@dataclass(frozen=True)
class WeightFunction:
    """phi(u) = min over pieces of <g, u> + c."""

    pieces: tuple[AffinePiece, ...]

    def scaled_value(self, alpha: Sequence[int], m: int) -> LogQ:
        vals = [pc.scaled_value(alpha, m) for pc in self.pieces]
        best = vals[0]
        for v in vals[1:]:
            if v < best:
                best = v
        return best

    def at(self, u: Sequence[Fraction]) -> LogQ:
        """Value at a rational barycentric point (pass alpha=u, m=1)."""
        vals = [pc.offset + sum((g * Fraction(x) for g, x in zip(pc.gradient, u) if x), LogQ(0))
                for pc in self.pieces]
        best = vals[0]
        for v in vals[1:]:
            if v < best:
                best = v
        return best

    def shifted(self, c: LogQ) -> "WeightFunction":
        return WeightFunction(tuple(AffinePiece(pc.gradient, pc.offset + c) for pc in self.pieces))

    @staticmethod
    def constant(c: LogQ, n: int) -> "WeightFunction":
        return WeightFunction((AffinePiece(tuple(LogQ(0) for _ in range(n + 1)), LogQ.coerce(c)),))


# ---------------------------------------------------------------------------
# the model


@dataclass(frozen=True)
class DiagonalModel:
    dim: int
    degree: int
    weights: tuple[tuple[Place, WeightFunction], ...]
    max_family: Optional[tuple[tuple[Place, tuple[Fraction, ...]], ...]] = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.degree < 0:
            raise ValueError("degree must be >= 0")
        places = [pl for pl, _ in self.weights]
        if len(set(places)) != len(places):
            raise ValueError("duplicate place")
        for _, w in self.weights:
            for pc in w.pieces:
                if len(pc.gradient) != self.dim + 1:
                    raise ValueError("gradient length must be dim + 1")
        object.__setattr__(self, "weights", tuple(sorted(self.weights, key=lambda t: t[0])))

    # accessors
    def weight(self, place: Place) -> Optional[WeightFunction]:
        for pl, w in self.weights:
            if pl == place:
                return w
        return None

    @property
    def places(self) -> list[Place]:
        return [pl for pl, _ in self.weights]

    def family(self, place: Place) -> Optional[tuple[Fraction, ...]]:
        if self.max_family is None:
            return None
        for pl, a in self.max_family:
            if pl == place:
                return a
        return None

    def full_face(self) -> Face:
        return tuple(range(self.dim + 1))

    def combined_pieces(self) -> list[AffinePiece]:
        """Pieces of Phi = sum_v phi_v (all sums of one piece per place)."""
        if not self.weights:
            return [AffinePiece(tuple(LogQ(0) for _ in range(self.dim + 1)), LogQ(0))]
        out = []
        for combo in itertools.product(*[w.pieces for _, w in self.weights]):
            g = tuple(sum((pc.gradient[j] for pc in combo), LogQ(0)) for j in range(self.dim + 1))
            c = sum((pc.offset for pc in combo), LogQ(0))
            out.append(AffinePiece(g, c))
        return out

    def combined_at(self, u: Sequence[Fraction]) -> LogQ:
        return sum((w.at(u) for _, w in self.weights), LogQ(0))

    def vertices(self, face: Optional[Face] = None) -> list[tuple[int, ...]]:
        face = self.full_face() if face is None else face
        return [tuple(self.degree if i == j else 0 for i in range(self.dim + 1)) for j in face]

    def exponents(self, m: int, face: Optional[Face] = None) -> list[tuple[int, ...]]:
        face = self.full_face() if face is None else tuple(face)
        return _exponents(self.dim, m * self.degree, face)


@lru_cache(maxsize=256)
def _exponents(n: int, total: int, face: Face) -> list[tuple[int, ...]]:
    out = []
    k = len(face)
    for combo in itertools.combinations_with_replacement(range(k), total):
        a = [0] * (n + 1)
        for i in combo:
            a[face[i]] += 1
        out.append(tuple(a))
    out.sort(reverse=True)
    return out


# ---------------------------------------------------------------------------
# per-monomial data


@dataclass(frozen=True)
class MonomialData:
    """Floor exponents of one monomial at one level."""

    alpha: tuple[int, ...]
    v_inf: int
    e: tuple[tuple[int, int], ...]  # (prime, e_p)

    @property
    def step(self) -> Fraction:
        """Generator q of the admissible coefficients q*Z."""
        q = Fraction(1)
        for p, ep in self.e:
            q *= Fraction(p) ** (-ep)
        return q

    @property
    def radius(self) -> Fraction:
        """|k| / radius is the l1 contribution of the coefficient c = step * k."""
        return Fraction(2) ** self.v_inf / self.step


@lru_cache(maxsize=200_000)
def monomial_data(model: DiagonalModel, alpha: tuple[int, ...], m: int) -> MonomialData:
    v = 0
    es = []
    for pl, w in model.weights:
        val = w.scaled_value(alpha, m)
        f = val.floor_div_log(pl.log_base)
        if pl.is_inf:
            v = f
        else:
            es.append((pl.p, f))
    return MonomialData(alpha, v, tuple(es))


# ---------------------------------------------------------------------------
# sections and norms


@dataclass(frozen=True)
class Section:
    m: int
    coeffs: tuple[tuple[tuple[int, ...], Fraction], ...]

    @staticmethod
    def make(m: int, coeffs: dict) -> "Section":
        items = tuple(sorted((tuple(a), Fraction(c)) for a, c in coeffs.items() if c != 0))
        return Section(m, items)

    @staticmethod
    def monomial(m: int, alpha: Sequence[int], c=1) -> "Section":
        return Section.make(m, {tuple(alpha): c})

    def as_dict(self) -> dict:
        return dict(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __mul__(self, other: "Section") -> "Section":
        acc: dict = {}
        for a, c in self.coeffs:
            for b, d in other.coeffs:
                k = tuple(x + y for x, y in zip(a, b))
                acc[k] = acc.get(k, Fraction(0)) + c * d
        return Section.make(self.m + other.m, acc)


def check_degree(model: DiagonalModel, s: Section) -> None:
    for a, _ in s.coeffs:
        if len(a) != model.dim + 1 or sum(a) != s.m * model.degree or min(a) < 0:
            raise ValueError(f"exponent {a} does not lie in {s.m}P")


def norm(model: DiagonalModel, s: Section, place: Place) -> Fraction:
    check_degree(model, s)
    if place.is_inf:
        tot = Fraction(0)
        for a, c in s.coeffs:
            md = monomial_data(model, a, s.m)
            tot += abs(c) * Fraction(2) ** (-md.v_inf)
        return tot
    best = Fraction(0)
    w = model.weight(place)
    for a, c in s.coeffs:
        ep = 0
        if w is not None:
            ep = dict(monomial_data(model, a, s.m).e)[place.p]
        best = max(best, place.abs(c) * Fraction(place.p) ** (-ep))
    return best


def relevant_primes(model: DiagonalModel, s: Section) -> list[int]:
    ps = {pl.p for pl in model.places if not pl.is_inf}
    for _, c in s.coeffs:
        ps |= set(factorize(c.denominator))
    return sorted(ps)


def is_small(model: DiagonalModel, s: Section, strict: bool = True) -> bool:
    """Admissible at every prime and of archimedean norm < 1 (or <= 1)."""
    for p in relevant_primes(model, s):
        if norm(model, s, Place(p)) > 1:
            return False
    n = norm(model, s, INF)
    return n < 1 if strict else n <= 1


# ---------------------------------------------------------------------------
# graded small sections


@dataclass(frozen=True)
class GradedSmallSections:
    """The CL-subset Gamma_m in integer coordinates k (coefficient c_alpha = step_alpha * k_alpha)."""

    m: int
    monomials: tuple[tuple[int, ...], ...]
    steps: tuple[Fraction, ...]
    radii: tuple[Fraction, ...]
    strict: bool = True

    def key(self) -> tuple:
        return (self.monomials, self.steps, self.radii, self.strict)

    def small_monomials(self) -> list[tuple[int, ...]]:
        return [a for a, r in zip(self.monomials, self.radii) if (r > 1 if self.strict else r >= 1)]

    def active(self) -> list[int]:
        return [i for i, r in enumerate(self.radii) if (r > 1 if self.strict else r >= 1)]

    def cl_subset(self) -> CLSubset:
        return CLSubset(standard_lattice(len(self.monomials)), L1Body(self.radii, self.strict))

    def count(self) -> CountResult:
        return count_l1(self.radii, self.strict)

    def is_trivial(self) -> bool:
        return not self.active()

    def contains(self, s: Section) -> bool:
        idx = {a: i for i, a in enumerate(self.monomials)}
        k = [0] * len(self.monomials)
        for a, c in s.coeffs:
            if a not in idx:
                return False
            q = c / self.steps[idx[a]]
            if q.denominator != 1:
                return False
            k[idx[a]] = int(q)
        return L1Body(self.radii, self.strict).contains(k)

    def sections(self, limit: int = 10**6) -> list[Section]:
        """Explicit list of all elements (small instances only)."""
        act = self.active()
        pts = enumerate_l1([self.radii[i] for i in act], self.strict, limit)
        out = []
        for k in pts:
            out.append(Section.make(self.m, {self.monomials[i]: self.steps[i] * x
                                             for i, x in zip(act, k) if x}))
        return out

    def restrict(self, face: Face) -> "GradedSmallSections":
        keep = [i for i, a in enumerate(self.monomials)
                if all(a[j] == 0 for j in range(len(a)) if j not in face)]
        return GradedSmallSections(self.m, tuple(self.monomials[i] for i in keep),
                                   tuple(self.steps[i] for i in keep),
                                   tuple(self.radii[i] for i in keep), self.strict)


def enumerate_strictly_small(model: DiagonalModel, m: int, strict: bool = True,
                             face: Optional[Face] = None) -> GradedSmallSections:
    if m < 0:
        raise ValueError("m must be >= 0")
    mons = model.exponents(m, face)
    data = [monomial_data(model, a, m) for a in mons]
    if m == 0:
        # degree 0: constants with |c| < 1 (resp. <= 1); only 0 when strict
        return GradedSmallSections(0, tuple(mons), (Fraction(1),), (Fraction(1),), strict)
    return GradedSmallSections(m, tuple(mons), tuple(d.step for d in data),
                               tuple(d.radius for d in data), strict)


@dataclass(frozen=True)
class RestrictedSections:
    hull: GradedSmallSections
    image: GradedSmallSections
    image_is_cl: bool


def restrict_to_face(model: DiagonalModel, m: int, face: Face, strict: bool = True) -> RestrictedSections:
    """Image of Gamma_m under projection to face-supported monomials, and its CL-hull.

    The body is a weighted l1 ball over a product lattice, so the projection is
    already the weighted l1 ball in the surviving coordinates and is its own hull.
    """
    face = normalize_face(model, face)
    image = enumerate_strictly_small(model, m, strict).restrict(face)
    return RestrictedSections(image, image, True)


def normalize_face(model: DiagonalModel, face) -> Face:
    if face is None or face == "all":
        return model.full_face()
    f = tuple(sorted(set(int(i) for i in face)))
    if not f or f[0] < 0 or f[-1] > model.dim:
        raise ValueError(f"invalid coordinate face {face!r}")
    return f


def all_faces(model: DiagonalModel) -> list[Face]:
    n = model.dim
    return [f for k in range(1, n + 2) for f in itertools.combinations(range(n + 1), k)]


# ---------------------------------------------------------------------------
# base loci


@dataclass(frozen=True)
class BaseLocus:
    """Union of coordinate subspaces {x_i = 0 for i not in T}, listed by maximal T."""

    components: tuple[Face, ...]
    stabilized: bool
    m_max: int

    def contains_face(self, face: Face) -> bool:
        return any(set(face) <= set(c) for c in self.components)

    def contains_point(self, x: Sequence) -> bool:
        supp = tuple(i for i, v in enumerate(x) if v != 0)
        return self.contains_face(supp)

    def is_empty(self) -> bool:
        return not self.components


def _bad_faces(model: DiagonalModel, m: int) -> set[Face]:
    """Faces on which every strictly small section of level m vanishes identically."""
    supports = {tuple(i for i, x in enumerate(a) if x)
                for a in enumerate_strictly_small(model, m).small_monomials()}
    bad = set()
    for f in all_faces(model):
        fs = set(f)
        if not any(set(s) <= fs for s in supports):
            bad.add(f)
    return bad


def _maximal(faces: set[Face]) -> tuple[Face, ...]:
    return tuple(sorted(f for f in faces if not any(set(f) < set(g) for g in faces)))


def base_locus_at(model: DiagonalModel, m: int) -> BaseLocus:
    return BaseLocus(_maximal(_bad_faces(model, m)), True, m)


def stable_base_locus_ss(model: DiagonalModel, m_max: int) -> BaseLocus:
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    bad = set(all_faces(model))
    half = None
    any_sections = False
    for m in range(1, m_max + 1):
        lvl = _bad_faces(model, m)
        if model.full_face() not in lvl:
            any_sections = True
        bad &= lvl
        if m == max(1, m_max // 2):
            half = set(bad)
    return BaseLocus(_maximal(bad), bool(any_sections and half == bad), m_max)


def _require_ample(model: DiagonalModel) -> None:
    if model.degree <= 0:
        raise ValueError("L = O(d) must have d >= 1 (non-ample L is out of scope)")


def augmented_base_locus(model: DiagonalModel, m_max: int) -> BaseLocus:
    """For ample L the augmented locus is the stable locus of strictly small sections."""
    _require_ample(model)
    return stable_base_locus_ss(model, m_max)


def is_w_ample(model: DiagonalModel, m_max: int) -> tuple[bool, Optional[int]]:
    _require_ample(model)
    for m in range(1, m_max + 1):
        if not _bad_faces(model, m):
            return True, m
    return False, None


@dataclass(frozen=True)
class GenerationReport:
    per_level: tuple[tuple[int, bool], ...]
    first_stable: Optional[int]
    locus_empty: bool
    counterexample: bool


def zhang_moriwaki_check(model: DiagonalModel, m_max: int) -> GenerationReport:
    """Per level: do the strictly small monomials span all of H^0(mL)?"""
    _require_ample(model)
    levels = [(0, True)]
    for m in range(1, m_max + 1):
        g = enumerate_strictly_small(model, m)
        levels.append((m, len(g.small_monomials()) == len(g.monomials)))
    first = None
    for m, ok in reversed(levels[1:]):
        if not ok:
            break
        first = m
    empty = stable_base_locus_ss(model, m_max).is_empty()
    return GenerationReport(tuple(levels), first, empty, empty and first is None)


# ---------------------------------------------------------------------------
# model transformations


def _set_weight(model: DiagonalModel, place: Place, w: WeightFunction) -> DiagonalModel:
    ws = [(pl, x) for pl, x in model.weights if pl != place] + [(place, w)]
    return replace(model, weights=tuple(ws), max_family=None)


def twist_infinity(model: DiagonalModel, lam) -> DiagonalModel:
    """Add the constant lam (nats) to the archimedean weight: L + O(lam[inf])."""
    lam = LogQ.coerce(lam)
    if lam.is_zero():
        return model
    w = model.weight(INF) or WeightFunction.constant(LogQ(0), model.dim)
    return _set_weight(model, INF, w.shifted(lam))


def twist_finite(model: DiagonalModel, p: int, lam) -> DiagonalModel:
    """Add lam * log p to the weight at p: L + O(lam[p])."""
    lam = Fraction(lam)
    if lam == 0:
        return model
    pl = Place.finite(p)
    w = model.weight(pl) or WeightFunction.constant(LogQ(0), model.dim)
    return _set_weight(model, pl, w.shifted(LogQ.log(p) * lam))


def scale(model: DiagonalModel, a: int) -> DiagonalModel:
    """The model a*L: degree a*d and weight u -> a*phi(u/a) (offsets times a)."""
    if a < 1:
        raise ValueError("scale factor must be a positive integer")
    ws = tuple((pl, WeightFunction(tuple(AffinePiece(pc.gradient, pc.offset * a) for pc in w.pieces)))
               for pl, w in model.weights)
    return replace(model, degree=model.degree * a, weights=ws)


def tensor(L: DiagonalModel, M: DiagonalModel) -> DiagonalModel:
    """L + M for weights that are affine with a common gradient at every place.

    The weight of a tensor product is the sup-convolution of the two weights; it
    is affine with the same gradient exactly in this case.
    """
    if L.dim != M.dim:
        raise ValueError("dimension mismatch")
    zero = WeightFunction.constant(LogQ(0), L.dim)
    ws = []
    for pl in sorted(set(L.places) | set(M.places)):
        a, b = L.weight(pl) or zero, M.weight(pl) or zero
        if len(a.pieces) != 1 or len(b.pieces) != 1 or a.pieces[0].gradient != b.pieces[0].gradient:
            raise NotImplementedError("tensor product needs single affine pieces with equal gradients")
        ws.append((pl, WeightFunction((AffinePiece(a.pieces[0].gradient,
                                                   a.pieces[0].offset + b.pieces[0].offset),))))
    return DiagonalModel(L.dim, L.degree + M.degree, tuple(ws))


def from_max_family(dim: int, degree: int, family: dict) -> DiagonalModel:
    """Model whose weights are phi_v(u) = sum_j u_j log a_j^(v)."""
    fam = []
    ws = []
    for pl, a in sorted(family.items()):
        a = tuple(Fraction(x) for x in a)
        if len(a) != dim + 1 or any(x <= 0 for x in a):
            raise ValueError("max family needs dim + 1 positive rationals per place")
        fam.append((pl, a))
        g = tuple(LogQ.log(x) for x in a)
        ws.append((pl, WeightFunction((AffinePiece(g, LogQ(0)),))))
    return DiagonalModel(dim, degree, tuple(ws), tuple(fam))


def max_family_consistent(model: DiagonalModel) -> bool:
    """phi_v(vertex) == d * log a_j at every vertex, for every place with family data."""
    if model.max_family is None:
        return True
    for pl, a in model.max_family:
        w = model.weight(pl)
        for j in range(model.dim + 1):
            u = [Fraction(model.degree if i == j else 0) for i in range(model.dim + 1)]
            expected = LogQ.log(a[j]) * model.degree
            got = w.at(u) if w is not None else LogQ(0)
            if got != expected:
                return False
    return True


# ---------------------------------------------------------------------------
# heights and nefness


def _primitive_point(x: Sequence) -> tuple[int, ...]:
    fr = [Fraction(v) for v in x]
    if all(v == 0 for v in fr):
        raise ValueError("the zero vector is not a projective point")
    den = math.lcm(*[v.denominator for v in fr])
    iv = [int(v * den) for v in fr]
    g = math.gcd(*iv)
    return tuple(v // g for v in iv)


def height(model: DiagonalModel, x: Sequence, chart: Optional[int] = None) -> LogQ:
    """Height of a rational point computed with the section x_j (x_j != 0)."""
    if model.max_family is None:
        raise ValueError("height needs max_family data")
    xs = _primitive_point(x)
    if len(xs) != model.dim + 1:
        raise ValueError("point has the wrong number of coordinates")
    j = chart if chart is not None else next(i for i, v in enumerate(xs) if v)
    if xs[j] == 0:
        raise ValueError("chosen coordinate vanishes at the point")
    fam = dict(model.max_family)
    primes = {pl.p for pl in fam if not pl.is_inf}
    for v in xs:
        if v:
            primes |= set(factorize(abs(v)))
    total = LogQ(0)
    for pl in [INF] + [Place(p) for p in sorted(primes)]:
        a = fam.get(pl, tuple(Fraction(1) for _ in xs))
        vals = [LogQ.log(ak * pl.abs(Fraction(xk))) for ak, xk in zip(a, xs) if xk]
        best = vals[0]
        for v in vals[1:]:
            if v > best:
                best = v
        total = total + best - LogQ.log(pl.abs(Fraction(xs[j])))
    return total * model.degree


@dataclass(frozen=True)
class NefResult:
    state: str  # "nef" | "not-nef" | "undetermined"
    witness: Optional[tuple[int, ...]]
    reason: str


def is_nef(model: DiagonalModel, sample_bound: int = 2) -> NefResult:
    n = model.dim
    if model.max_family is None:
        lean = all(model.combined_at([Fraction(x) for x in v]) >= 0 for v in model.vertices())
        return NefResult("undetermined", None,
                         "no pointwise metric data; " + ("leaning nef" if lean else "leaning not nef"))
    fixed = [tuple(int(i == j) for i in range(n + 1)) for j in range(n + 1)]
    for x in fixed:
        if height(model, x) < 0:
            return NefResult("not-nef", x, "negative height at a torus-fixed point")
    for x in itertools.product(range(-sample_bound, sample_bound + 1), repeat=n + 1):
        if any(x) and math.gcd(*x) == 1 and height(model, x) < 0:
            return NefResult("not-nef", x, "negative height at a sampled point")
    if all(a >= 1 for _, fam in model.max_family for a in fam):
        return NefResult("nef", None, "all scalings >= 1 so the height dominates the naive height")
    return NefResult("undetermined", None, "sampled heights are non-negative")


# ---------------------------------------------------------------------------
# closed forms for nef models


def _face_affine(piece: AffinePiece, face: Face, d: int) -> tuple[list[float], float]:
    """Restrict a piece to the face simplex parametrized by u_face[1:], u_face[0] = d - sum."""
    g, c = piece.floats()
    g0 = g[face[0]]
    return [g[i] - g0 for i in face[1:]], c + g0 * d


def _dedupe(aff):
    seen = []
    for a in aff:
        if not any(len(a[0]) == len(b[0]) and all(abs(x - y) < 1e-12 for x, y in zip(a[0], b[0]))
                   and abs(a[1] - b[1]) < 1e-12 for b in seen):
            seen.append(a)
    return seen


def _cell_vertices(cons: list[tuple[list[float], float]], k: int) -> list[list[float]]:
    """Vertices of {y : a.y <= b for all (a, b)} by brute-force k-subsets."""
    import numpy as np

    pts = []
    for sub in itertools.combinations(range(len(cons)), k):
        A = np.array([cons[i][0] for i in sub], dtype=float)
        b = np.array([cons[i][1] for i in sub], dtype=float)
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        y = np.linalg.solve(A, b)
        if all(np.dot(a, y) <= bb + 1e-9 for a, bb in cons):
            if not any(np.allclose(y, q, atol=1e-10) for q in pts):
                pts.append(y)
    return pts


def _integrate_affine_over(pts, lin, k) -> float:
    """Integral of the affine function lin over conv(pts) in R^k."""
    import numpy as np

    if len(pts) < k + 1:
        return 0.0
    P = np.array(pts)
    f = lambda y: float(np.dot(lin[0], y) + lin[1])
    if k == 1:
        a, b = P[:, 0].min(), P[:, 0].max()
        return (b - a) * 0.5 * (f([a]) + f([b]))
    if k == 2:
        c = P.mean(axis=0)
        ang = np.arctan2(P[:, 1] - c[1], P[:, 0] - c[0])
        P = P[np.argsort(ang)]
        tot = 0.0
        for i in range(len(P)):
            p, q = P[i], P[(i + 1) % len(P)]
            area = 0.5 * abs((p[0] - c[0]) * (q[1] - c[1]) - (q[0] - c[0]) * (p[1] - c[1]))
            tot += area * (f(c) + f(p) + f(q)) / 3
        return tot
    from scipy.spatial import ConvexHull

    hull = ConvexHull(P)
    c = P.mean(axis=0)
    tot = 0.0
    for simp in hull.simplices:
        verts = np.vstack([P[simp], c])
        vol = abs(np.linalg.det(verts[1:] - verts[0])) / math.factorial(k)
        tot += vol * sum(f(v) for v in verts) / (k + 1)
    return tot


def pl_integral_positive(pieces: list[AffinePiece], face: Face, d: int) -> float:
    """Integral over the face polytope of max(0, min over pieces)."""
    k = len(face) - 1
    aff = _dedupe([_face_affine(pc, face, d) for pc in pieces])
    if k == 0:
        return max(0.0, min(a[1] for a in aff))
    simplex = [([-1.0 if j == i else 0.0 for j in range(k)], 0.0) for i in range(k)]
    simplex.append(([1.0] * k, float(d)))
    total = 0.0
    for i, (gi, ci) in enumerate(aff):
        cons = list(simplex)
        cons.append(([-x for x in gi], ci))  # phi_i >= 0
        for j, (gj, cj) in enumerate(aff):
            if j != i:
                cons.append(([x - y for x, y in zip(gi, gj)], cj - ci))  # phi_i <= phi_j
        total += _integrate_affine_over(_cell_vertices(cons, k), (gi, ci), k)
    return float(total)


def pl_max(pieces: list[AffinePiece], face: Face, d: int) -> float:
    """Maximum over the face polytope of the min of the pieces."""
    k = len(face) - 1
    aff = _dedupe([_face_affine(pc, face, d) for pc in pieces])
    if k == 0:
        return min(a[1] for a in aff)
    best = -math.inf
    simplex = [([-1.0 if j == i else 0.0 for j in range(k)], 0.0) for i in range(k)]
    simplex.append(([1.0] * k, float(d)))
    for i, (gi, ci) in enumerate(aff):
        cons = list(simplex)
        for j, (gj, cj) in enumerate(aff):
            if j != i:
                cons.append(([x - y for x, y in zip(gi, gj)], cj - ci))
        for y in _cell_vertices(cons, k):
            best = max(best, float(sum(a * b for a, b in zip(gi, y)) + ci))
    return best


def adeg_diagonal_nef(model: DiagonalModel, face: Optional[Face] = None, override: bool = False) -> float:
    """(dim Y + 1)! * integral over P_Y of Phi_+ (oracle value for the volume)."""
    face = normalize_face(model, face)
    if not override and is_nef(model).state != "nef":
        raise ValueError("model is not known to be nef (pass override=True)")
    k = len(face) - 1
    return math.factorial(k + 1) * pl_integral_positive(model.combined_pieces(), face, model.degree)


def delta_upper(model: DiagonalModel, face: Optional[Face] = None) -> float:
    """Upper bound (dim + 1) * sum_v max(phi_v)_+ for the delta constant."""
    face = normalize_face(model, face)
    k = len(face) - 1
    tot = 0.0
    for _, w in model.weights:
        tot += max(0.0, pl_max(list(w.pieces), face, model.degree))
    # round up a hair so the float value stays an upper bound
    return (k + 1) * tot * (1 + 1e-12)


def vertical_degree_identity(p: int, model: DiagonalModel, override: bool = False) -> tuple[LogQ, LogQ]:
    """(adeg(O([p]) . A^n), vol(A) log p) for a nef diagonal model A."""
    if not is_prime(p):
        raise ValueError(f"{p} is not a prime")
    n, d = model.dim, model.degree
    if not override and is_nef(model).state != "nef":
        raise ValueError("non-nef model")
    if any(model.combined_at([Fraction(x) for x in v]) < 0 for v in model.vertices()):
        raise ValueError("non-nef model")
    vol = Fraction(d**n)
    if d == 0:
        return LogQ(0), LogQ(0)
    # multilinearity: adeg(A + t[p]) - adeg(A) = (n+1) t adeg([p] . A^n); with Phi >= 0 the
    # shift by t log p adds (n+1)! * vol(P) * t log p exactly.
    twisted = twist_finite(model, p, 1)
    face = model.full_face()
    diff = (pl_integral_positive(twisted.combined_pieces(), face, d)
            - pl_integral_positive(model.combined_pieces(), face, d)) * math.factorial(n + 1)
    exact_diff = LogQ.log(p) * (math.factorial(n + 1) * Fraction(d**n, math.factorial(n)))
    if abs(diff - float(exact_diff)) > 1e-8 * max(1.0, abs(diff)):
        raise ArithmeticError("closed-form adeg is not linear in the vertical twist")
    lhs = exact_diff / (n + 1)
    return lhs, LogQ.log(p) * vol
