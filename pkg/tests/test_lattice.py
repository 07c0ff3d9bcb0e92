import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog
from hypothesis import given, settings
from hypothesis import strategies as st

from adelic_okounkov.lattice import (
    ConvexBody,
    L1Body,
    cl_count,
    cl_hull,
    count_l1,
    det,
    dilate_count,
    enumerate_l1,
    hnf,
    l1_ball,
    lattice_points_in_box,
    lattice_span,
    standard_lattice,
    star_sum,
)

from oracles import averaging_closure, in_span_bruteforce

small_vecs = st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5)), min_size=0, max_size=4)


def test_hnf_examples():
    assert lattice_span([(2, 0), (0, 2)]).basis == ((2, 0), (0, 2))
    L = lattice_span([(1, 1), (1, -1)])
    assert L.basis == ((1, 1), (0, 2)) and L.rank == 2
    assert lattice_span([], 3).rank == 0


@settings(deadline=None)
@given(small_vecs)
def test_hnf_spans_the_same_lattice(vs):
    L = lattice_span(vs, 2)
    for v in vs:
        assert v in L
    if L.rank == 2:
        # index of the span = gcd of the maximal minors
        g = 0
        for a, b in itertools.combinations(vs, 2):
            g = math.gcd(g, a[0] * b[1] - a[1] * b[0])
        assert L.index() == g
    else:
        for b in L.basis:
            assert in_span_bruteforce(vs, b, bound=6)
    assert tuple(tuple(r) for r in hnf(list(L.basis), 2)) == L.basis


@given(st.lists(st.lists(st.integers(-4, 4), min_size=3, max_size=3), min_size=3, max_size=3))
def test_index_is_abs_det(rows):
    d = det([[Fraction(x) for x in r] for r in rows])
    L = lattice_span(rows, 3)
    if d == 0:
        assert L.rank < 3
    else:
        assert L.index() == abs(d)


def test_cl_hull_examples():
    assert cl_hull([(0,), (1,), (3,)]).elements() == {(0,), (1,), (2,), (3,)}
    assert cl_hull([(0, 2), (2, 0)]).elements() == {(0, 2), (2, 0)}
    assert cl_hull([(3, -1)]).elements() == {(3, -1)}
    with pytest.raises(ValueError):
        cl_hull([])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3)), min_size=1, max_size=5))
def test_cl_hull_matches_averaging_closure_and_is_idempotent(S):
    H = cl_hull(S)
    E = H.elements()
    assert set(S) <= E
    assert averaging_closure(S) == E
    assert cl_hull(E).elements() == E


def test_l1_examples():
    assert count_l1([4, 4, 4], strict=True).exact == 63
    assert count_l1([3, 3, 3], strict=False).exact == 63
    assert l1_ball(3, 3) == 63 == sum(2**k * math.comb(3, k) ** 2 for k in range(4))
    box = ConvexBody([(2, 1), (2, -1), (-2, 1), (-2, -1)])
    assert cl_count(type(cl_hull([(0, 0)]))(standard_lattice(2), box)).exact == 15
    assert cl_hull([(0, 0)]).count().exact == 1
    assert count_l1([], strict=True).exact == 1


@given(st.integers(0, 4), st.integers(0, 6))
def test_l1_ball_closed_form(n, K):
    brute = sum(1 for v in itertools.product(range(-K, K + 1), repeat=n) if sum(map(abs, v)) <= K)
    assert l1_ball(n, K) == brute


radii = st.fractions(min_value=Fraction(1, 2), max_value=6, max_denominator=4)


@settings(max_examples=80, deadline=None)
@given(st.lists(radii, min_size=1, max_size=4), st.booleans())
def test_count_l1_matches_enumeration(rs, strict):
    pts = enumerate_l1(rs, strict)
    assert all(L1Body(tuple(rs), strict).contains(p) for p in pts)
    assert count_l1(rs, strict).exact == len(pts)
    iv = count_l1(rs, strict, dp_limit=0)
    if iv.exact is None:
        assert iv.log_lo <= math.log(len(pts)) <= iv.log_hi


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 30), min_size=2, max_size=4), st.integers(0, 1))
def test_interval_brackets_exact_large_radii(rs, shift):
    rs = [Fraction(r * 2**shift, 1 + (i % 3)) for i, r in enumerate(rs)]
    exact = count_l1(rs, dp_limit=10**7).exact
    iv = count_l1(rs, dp_limit=0)
    if iv.exact is None:
        assert iv.log_lo <= math.log(exact) <= iv.log_hi


def test_huge_equal_radii_exact():
    res = count_l1([Fraction(2**64)] * 65)
    assert res.exact is not None and res.exact == l1_ball(65, 2**64 - 1)


def test_star_sums():
    assert star_sum(2, [-1, 0, 1]) == {-2, -1, 0, 1, 2}
    assert star_sum(1, [(1, 2), (0, 0)]) == {(1, 2), (0, 0)}
    assert star_sum(2, [(1, 0), (0, 1)]) == {(2, 0), (1, 1), (0, 2)}
    with pytest.raises(ValueError):
        star_sum(0, [1])


def test_dilate_examples():
    seg = ConvexBody([(-1,), (1,)])
    assert dilate_count(standard_lattice(1), seg, 2) == (3, 5)
    assert dilate_count(standard_lattice(1), seg, 1) == (3, 3)
    assert dilate_count(lattice_span([(2,)]), seg, 3) == (1, 3)
    with pytest.raises(ValueError, match="too large"):
        dilate_count(standard_lattice(3), ConvexBody([(-500, -500, -500), (500, 500, 500)]), 5, limit=10**6)
    with pytest.raises(ValueError):
        dilate_count(standard_lattice(1), seg, Fraction(1, 2))
    with pytest.raises(ValueError, match="unbounded"):
        dilate_count(standard_lattice(1), ConvexBody([(0,)], rays=[(1,)]), 2)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.tuples(st.integers(-4, 4), st.integers(-4, 4)), min_size=1, max_size=3),
       st.sampled_from([1, Fraction(3, 2), 2]))
def test_dilate_matches_bruteforce(vs, a):
    pts = vs + [(-x, -y) for x, y in vs]
    body = ConvexBody(pts)
    M = standard_lattice(2)
    small, big = dilate_count(M, body, a)
    P = np.array([[float(c) for c in p] for p in pts])

    def inside(x, s):
        # x in s*conv(pts): LP feasibility for convex weights, independent of the facet code
        A = np.vstack([P.T, np.ones(len(P))])
        b = np.array([x[0] / s, x[1] / s, 1.0])
        res = linprog(np.zeros(len(P)), A_eq=A, b_eq=b, bounds=[(0, None)] * len(P), method="highs")
        return res.status == 0

    R = 4 * 5 + 1
    grid = [g for g in itertools.product(range(-R, R + 1), repeat=2)
            if max(map(abs, g)) <= 4 * float(a) + 1]
    assert small == sum(inside(x, 1) for x in grid)
    assert big == sum(inside(x, float(a)) for x in grid)


def test_box_enumeration_respects_lattice():
    L = lattice_span([(1, 1), (0, 3)])
    pts = lattice_points_in_box(L, (-3, -3), (3, 3))
    brute = {(x, y) for x in range(-3, 4) for y in range(-3, 4) if (y - x) % 3 == 0}
    assert {tuple(map(int, p)) for p in pts} == brute
