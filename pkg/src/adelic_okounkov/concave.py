"""Largest concave piecewise-linear function under a weight on a simplex grid.

The program is

    maximize  sum_i w_i theta_i
    s.t.      0 <= theta_i <= phi_i,   theta concave on the grid triangulation,

with rational constraint matrix and right-hand sides in Q + sum Q*log p. It is
solved by a dense tableau simplex with Bland's rule, exactly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .logq import LogQ
from .model import DiagonalModel, Face, normalize_face


@dataclass(frozen=True)
class SimplexGrid:
    """Points d*(i_1, ..., i_k)/N with sum <= N, in the coordinates of a face minus its first."""

    k: int
    n: int
    degree: int

    def points(self) -> list[tuple[int, ...]]:
        if self.k == 0:
            return [()]
        return [c for c in itertools.product(range(self.n + 1), repeat=self.k) if sum(c) <= self.n]

    def barycentric(self, c: Sequence[int], face: Face, dim: int) -> list[Fraction]:
        u = [Fraction(0)] * (dim + 1)
        h = Fraction(self.degree, self.n) if self.k else Fraction(0)
        for j, i in enumerate(face[1:]):
            u[i] = h * c[j]
        u[face[0]] = self.degree - sum(u[i] for i in face[1:])
        return u

    def weights(self) -> list[Fraction]:
        """Integral of the interpolant against each grid value."""
        pts = self.points()
        if self.k == 0:
            return [Fraction(1)]
        h = Fraction(self.degree, self.n)
        if self.k == 1:
            return [h / 2 if c[0] in (0, self.n) else h for c in pts]
        if self.k == 2:
            idx = {c: i for i, c in enumerate(pts)}
            w = [Fraction(0)] * len(pts)
            third = h * h / 2 / 3
            for tri in self.triangles():
                for v in tri:
                    w[idx[v]] += third
            return w
        raise NotImplementedError("concave program only on 1- and 2-dimensional faces")

    def triangles(self):
        N = self.n
        for i in range(N):
            for j in range(N - i):
                yield ((i, j), (i + 1, j), (i, j + 1))
                if i + j + 2 <= N:
                    yield ((i + 1, j), (i, j + 1), (i + 1, j + 1))

    def concavity_rows(self) -> list[dict[tuple[int, ...], int]]:
        """Rows r with sum r_v theta_v <= 0 encoding concavity of the interpolant."""
        N = self.n
        rows = []
        if self.k == 1:
            for i in range(1, N):
                rows.append({(i - 1,): 1, (i,): -2, (i + 1,): 1})
        elif self.k == 2:
            ok = lambda a, b: a >= 0 and b >= 0 and a + b <= N  # noqa: E731
            for i in range(N):
                for j in range(N - i):
                    # opposite vertices minus shared edge across each interior edge
                    quads = [
                        ((i, j), (i + 1, j + 1), (i + 1, j), (i, j + 1)),
                        ((i, j + 1), (i + 2, j), (i + 1, j), (i + 1, j + 1)),
                        ((i + 1, j), (i, j + 2), (i, j + 1), (i + 1, j + 1)),
                    ]
                    for o1, o2, s1, s2 in quads:
                        if all(ok(*v) for v in (o1, o2, s1, s2)):
                            rows.append({o1: 1, o2: 1, s1: -1, s2: -1})
        elif self.k > 2:
            raise NotImplementedError("concave program only on 1- and 2-dimensional faces")
        return rows


@dataclass
class LPResult:
    status: str                 # "optimal" | "infeasible"
    value: LogQ                 # objective; 0 when infeasible
    theta: Optional[list[LogQ]]
    method: str                 # "identity" | "simplex" | "negative-bound"
    pivots: int = 0


def simplex_max(c: list[Fraction], A: list[list[Fraction]], b: list[LogQ]) -> tuple[LogQ, list[LogQ], int]:
    """max c.x s.t. A x <= b, x >= 0, for b >= 0 (the origin is feasible).

    Bland's rule on the slack-augmented tableau; b lives in a Q-vector space so
    every ratio comparison is an exact LogQ comparison.
    """
    m, n = len(A), len(c)
    if any(x < 0 for x in b):
        raise ValueError("origin infeasible")
    T = [list(row) + [Fraction(int(i == j)) for j in range(m)] for i, row in enumerate(A)]
    rhs = list(b)
    basis = [n + i for i in range(m)]
    cost = list(c) + [Fraction(0)] * m  # reduced costs (maximization)
    obj = LogQ(0)
    pivots = 0
    while True:
        enter = next((j for j, v in enumerate(cost) if v > 0), None)
        if enter is None:
            break
        best = None
        for i in range(m):
            a = T[i][enter]
            if a > 0:
                r = rhs[i] / a
                if best is None or r < best[0] or (r == best[0] and basis[i] < basis[best[1]]):
                    best = (r, i)
        if best is None:
            raise ValueError("unbounded program")
        _, r = best
        piv = T[r][enter]
        T[r] = [x / piv for x in T[r]]
        rhs[r] = rhs[r] / piv
        for i in range(m):
            f = T[i][enter]
            if i != r and f:
                Ti, Tr = T[i], T[r]
                T[i] = [x - f * y for x, y in zip(Ti, Tr)]
                rhs[i] = rhs[i] - rhs[r] * f
        f = cost[enter]
        cost = [x - f * y for x, y in zip(cost, T[r])]
        obj = obj + rhs[r] * f
        basis[r] = enter
        pivots += 1
    x = [LogQ(0)] * n
    for i, j in enumerate(basis):
        if j < n:
            x[j] = rhs[i]
    return obj, x, pivots


def concave_under(phi: list[LogQ], grid: SimplexGrid) -> LPResult:
    pts = grid.points()
    w = grid.weights()
    if any(v < 0 for v in phi):
        return LPResult("infeasible", LogQ(0), None, "negative-bound")
    rows = grid.concavity_rows()
    idx = {p: i for i, p in enumerate(pts)}

    def row_value(r):
        return sum((phi[idx[v]] * cf for v, cf in r.items()), LogQ(0))

    if all(row_value(r) <= 0 for r in rows):
        val = sum((x * wi for x, wi in zip(phi, w)), LogQ(0))
        return LPResult("optimal", val, list(phi), "identity")
    n = len(pts)
    A, b = [], []
    for i in range(n):
        A.append([Fraction(int(i == j)) for j in range(n)])
        b.append(phi[i])
    for r in rows:
        row = [Fraction(0)] * n
        for v, cf in r.items():
            row[idx[v]] = Fraction(cf)
        A.append(row)
        b.append(LogQ(0))
    val, x, piv = simplex_max(list(w), A, b)
    return LPResult("optimal", val, x, "simplex", piv)


def toric_lower_bound(model: DiagonalModel, face, n: int) -> tuple[LogQ, LPResult]:
    """(dim Y + 1)! times the best concave grid integral under the combined weight on P_Y."""
    face = normalize_face(model, face)
    k = len(face) - 1
    if model.degree <= 0:
        raise ValueError("infeasible grid: empty polytope")
    if n < 1:
        raise ValueError("grid resolution must be positive")
    grid = SimplexGrid(k, n, model.degree)
    phi = [model.combined_at(grid.barycentric(c, face, model.dim)) for c in grid.points()]
    res = concave_under(phi, grid)
    return res.value * math.factorial(k + 1), res
