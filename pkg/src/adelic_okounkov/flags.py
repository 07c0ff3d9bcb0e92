"""Translated coordinate flags on P^n over Z and their valuation vectors."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .logq import is_prime
from .model import DiagonalModel, Face, Section, normalize_face, vp


@dataclass(frozen=True)
class GoodFlag:
    """Flag through an F_p-point of the chart {x_chart = 1} of a coordinate face.

    center and order are indexed by the face coordinates other than the chart,
    in increasing order.
    """

    p: int
    chart: int
    center: tuple[int, ...]
    order: tuple[int, ...]
    face: Face

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not a prime")
        others = self.others
        if self.chart not in self.face:
            raise ValueError("chart coordinate must lie in the face")
        if len(self.center) != len(others) or any(not 0 <= t < self.p for t in self.center):
            raise ValueError("center must be an F_p point of the chart")
        if sorted(self.order) != list(others):
            raise ValueError("order must permute the non-chart face coordinates")

    @property
    def others(self) -> tuple[int, ...]:
        return tuple(i for i in self.face if i != self.chart)

    def to_json(self) -> dict:
        return {"p": self.p, "chart": self.chart, "center": list(self.center), "order": list(self.order)}

    @staticmethod
    def from_json(obj: dict, face: Sequence[int]) -> "GoodFlag":
        return GoodFlag(int(obj["p"]), int(obj["chart"]), tuple(int(x) for x in obj["center"]),
                        tuple(int(x) for x in obj["order"]), tuple(sorted(face)))


def _reduce(s: Section, flag: GoodFlag) -> tuple[int, dict[tuple[int, ...], int]]:
    """Content w0 and the reduction mod p of s / p^w0, dehomogenized on the chart."""
    p = flag.p
    w0 = min(vp(c, p) for _, c in s.coeffs)
    poly: dict[tuple[int, ...], int] = {}
    for a, c in s.coeffs:
        if any(a[i] for i in range(len(a)) if i not in flag.face):
            raise ValueError("section is not supported on the flag's face")
        u = c / Fraction(p) ** w0
        r = u.numerator * pow(u.denominator, -1, p) % p
        if r:
            key = tuple(a[i] for i in flag.others)
            poly[key] = (poly.get(key, 0) + r) % p
    return w0, {k: v for k, v in poly.items() if v}


def _translate(poly: dict, center: Sequence[int], p: int) -> dict:
    """Substitute y_i = center_i + z_i over F_p."""
    if not any(center):
        return dict(poly)
    out: dict[tuple[int, ...], int] = {}
    for exps, c in poly.items():
        factors = []
        for e, t in zip(exps, center):
            factors.append([(j, math.comb(e, j) * pow(t, e - j, p) % p) for j in range(e + 1)])
        for combo in itertools.product(*factors):
            coef = c
            for _, f in combo:
                coef = coef * f % p
            if coef:
                key = tuple(j for j, _ in combo)
                out[key] = (out.get(key, 0) + coef) % p
    return {k: v for k, v in out.items() if v}


def valuation_vector(s: Section, flag: GoodFlag) -> tuple[int, ...]:
    """(w0, w1, ..., wk): content at p, then successive vanishing orders along the flag."""
    if s.is_zero():
        raise ValueError("valuation of the zero section")
    w0, poly = _reduce(s, flag)
    poly = _translate(poly, flag.center, flag.p)
    pos = {v: i for i, v in enumerate(flag.others)}
    out = [w0]
    for var in flag.order:
        i = pos[var]
        w = min(k[i] for k in poly)
        poly = {k: c for k, c in poly.items() if k[i] == w}
        out.append(w)
    return tuple(out)


def _eval_mod_p(poly: dict, point: Sequence[int], p: int) -> int:
    tot = 0
    for exps, c in poly.items():
        term = c
        for e, t in zip(exps, point):
            term = term * pow(t, e, p) % p
        tot = (tot + term) % p
    return tot


def restrict_section(s: Section, face: Face) -> Section:
    return Section.make(s.m, {a: c for a, c in s.coeffs
                              if all(a[i] == 0 for i in range(len(a)) if i not in face)})


def find_good_flag(model: DiagonalModel, face, avoid: Optional[Section], p: int) -> Optional[GoodFlag]:
    """Lexicographically first (chart, center) whose center avoids the zero set of avoid mod p."""
    face = normalize_face(model, face)
    if not is_prime(p):
        raise ValueError(f"{p} is not a prime")
    k = len(face) - 1
    if avoid is None:
        return GoodFlag(p, face[0], (0,) * k, face[1:], face)
    s0 = restrict_section(avoid, face)
    if s0.is_zero():
        return None
    for chart in face:
        probe = GoodFlag(p, chart, (0,) * k, tuple(i for i in face if i != chart), face)
        _, poly = _reduce(s0, probe)
        if not poly:
            continue
        for tau in itertools.product(range(p), repeat=k):
            if _eval_mod_p(poly, tau, p):
                return GoodFlag(p, chart, tuple(tau), probe.order, face)
    return None


def center_avoids(flag: GoodFlag, s: Section) -> bool:
    """Does s (restricted to the flag's face) stay nonzero at the center mod p?"""
    s0 = restrict_section(s, flag.face)
    if s0.is_zero():
        return False
    _, poly = _reduce(s0, flag)
    return bool(poly) and _eval_mod_p(poly, flag.center, flag.p) != 0


def valuation_image(sections: Iterable[Section], flag: GoodFlag) -> tuple[set, int]:
    img = {valuation_vector(s, flag) for s in sections if not s.is_zero()}
    return img, len(img)
