import itertools
import json
import math
from fractions import Fraction

import pytest

from adelic_okounkov import okounkov
from adelic_okounkov.flags import GoodFlag, valuation_image
from adelic_okounkov.lattice import CountResult
from adelic_okounkov.model import enumerate_strictly_small, restrict_to_face, twist_infinity
from adelic_okounkov.okounkov import (
    NEG_INF,
    CountCache,
    SemigroupSample,
    build_semigroup,
    flag_is_good,
    geometric_mult_estimate,
    hull_volume,
    kappa_from_rank,
    kappa_hat,
    kkok_cross_check,
    level_count,
    level_image,
    volume_estimate,
)

from conftest import LOG2, affine_model, const_model


def flag(p, face, chart=None, center=None):
    chart = face[0] if chart is None else chart
    others = tuple(i for i in face if i != chart)
    return GoodFlag(p, chart, tuple(center or (0,) * len(others)), others, tuple(face))


SMALL = [
    (const_model(1, LOG2), (0, 1)),
    (affine_model(1, [((LOG2, 0), Fraction(1, 5)), ((0, 1), 0)]), (0, 1)),
    (const_model(2, Fraction(1, 2)), (0, 1, 2)),
    (affine_model(2, [((1, 0, LOG2), 0), ((0, 1, 0), Fraction(1, 3))]), (0, 2)),
]


@pytest.mark.parametrize("model,face", SMALL)
@pytest.mark.parametrize("p", [2, 3])
def test_level_image_origin_matches_enumeration(model, face, p):
    checked = 0
    for m in range(1, 5):
        gss = restrict_to_face(model, m, face).hull
        try:
            secs = gss.sections(limit=200_000)
        except ValueError:
            continue
        checked += 1
        img, method = level_image(gss, flag(p, face))
        full, _ = valuation_image(secs, flag(p, face))
        assert method == "exact" and img == full
    assert checked >= 2


@pytest.mark.parametrize("model,face", SMALL[:2])
def test_level_image_translated(model, face, monkeypatch):
    fl = flag(3, face, center=(1,))
    for m in (1, 2, 3):
        gss = restrict_to_face(model, m, face).hull
        img, method = level_image(gss, fl)
        assert method == "exact" and img == valuation_image(gss.sections(), fl)[0]
        monkeypatch.setattr(okounkov, "REPRESENTATIVE_ENUM_LIMIT", 1)
        rep, method = level_image(gss, fl)
        monkeypatch.undo()
        if gss.count().exact > 1:
            assert method == "representatives"
        assert rep <= img


@pytest.mark.parametrize("model,face", SMALL)
def test_semigroup_closure(model, face):
    S = build_semigroup(model, face, flag(2, face), 6)
    for m1, m2 in itertools.combinations_with_replacement(range(1, 4), 2):
        for w1 in S.levels[m1]:
            for w2 in S.levels[m2]:
                assert tuple(a + b for a, b in zip(w1, w2)) in S.levels[m1 + m2]


def test_semigroup_index_and_generation(flagship):
    S = build_semigroup(flagship, None, flag(2, (0, 1)), 4)
    assert S.generates() and S.index() == 1 and S.n_hat == [1, 2, 3, 4]
    assert kappa_from_rank(S) == 1
    hand = SemigroupSample((0, 1), flag(2, (0, 1)),
                           {1: frozenset({(0, 0), (1, 0)}), 2: frozenset({(0, 2)})}, {})
    assert hand.rank == 3 and hand.index() == 2 and not hand.generates()
    flat = SemigroupSample((0, 1), flag(2, (0, 1)), {1: frozenset({(0, 0)}), 2: frozenset({(0, 0)})}, {})
    assert flat.rank == 1 and flat.index() == 0
    empty = SemigroupSample((0, 1), flag(2, (0, 1)), {1: frozenset()}, {})
    assert kappa_from_rank(empty) == NEG_INF and empty.n_hat == []
    with pytest.raises(ValueError, match="mismatch"):
        build_semigroup(flagship, None, flag(2, (0,)), 2)


def test_kappa(flagship, example_family):
    assert kappa_hat(flagship, None, 3) == 1
    assert kappa_hat(flagship, (1,), 3) == 0
    assert kappa_hat(const_model(2, -1), None, 8) == NEG_INF
    assert kappa_hat(example_family, (0,), 10) == NEG_INF
    assert kappa_hat(example_family, (0, 1), 10) == 1
    edge = build_semigroup(const_model(2, LOG2), (0, 1), flag(2, (0, 1)), 4)
    assert edge.rank == 3 and kappa_from_rank(edge) == 1


def test_geometric_multiplicity():
    assert geometric_mult_estimate(const_model(1, LOG2), None, [200]) == pytest.approx(201 / 200)
    assert geometric_mult_estimate(const_model(1, LOG2), (0,), [5]) == 1
    half = affine_model(1, [((0, 2), -1)])
    assert geometric_mult_estimate(half, None, [400]) == pytest.approx(0.5, abs=0.01)
    with pytest.raises(ValueError):
        geometric_mult_estimate(const_model(1, -1), None, [5])


def test_volume_estimate_basic(flagship):
    rep = volume_estimate(flagship, None, [8, 16, 32])
    assert rep.kappa == 1 and rep.first_level == 8
    assert rep.raw_interval[0] <= rep.raw <= rep.raw_interval[1]
    lo, hi = rep.estimate_interval
    assert lo <= rep.estimate <= hi
    assert 1.2 < rep.estimate < 2 * math.log(2)
    assert rep.oscillation is not None and rep.oscillation >= 0
    js = rep.to_json()
    assert json.loads(json.dumps(js))["kappa"] == 1
    dead = volume_estimate(const_model(1, -1), None, [4, 8])
    assert dead.kappa == NEG_INF and dead.raw == 0 and dead.first_level is None
    assert dead.to_json()["kappa"] == "-inf" and dead.e_hat is None
    with pytest.raises(ValueError):
        volume_estimate(flagship, None, [0, 4])
    assert volume_estimate(flagship, None, [4, 6], flag=flag(2, (0, 1))).generation is True


def test_volume_estimate_monotone_under_twist(flagship):
    ms = [8, 16]
    prev = None
    for lam in (Fraction(-1, 10), 0, Fraction(1, 10), Fraction(1, 5)):
        r = volume_estimate(twist_infinity(flagship, lam), None, ms, extrapolate=False)
        if prev is not None:
            assert r.raw >= prev
        prev = r.raw


def test_count_cache(tmp_path, monkeypatch, flagship):
    monkeypatch.setenv("ADELIC_OKOUNKOV_CACHE", str(tmp_path / "c"))
    cache = CountCache.from_env()
    gss = enumerate_strictly_small(flagship, 5)
    first = level_count(gss, cache)
    assert len(list((tmp_path / "c").glob("*.json"))) == 1
    # a poisoned entry proves the second call reads the cache
    cache.put(gss, CountResult(7, math.log(7), math.log(7), "planted"))
    assert level_count(gss, cache).method == "planted"
    assert first == gss.count()
    monkeypatch.delenv("ADELIC_OKOUNKOV_CACHE")
    assert CountCache.from_env() is None


def test_hull_volume():
    F = Fraction
    assert hull_volume([]) == 0
    assert hull_volume([(F(1),), (F(3),), (F(2),)]) == 2
    assert hull_volume([(F(0), F(0)), (F(1), F(0)), (F(0), F(1)), (F(1, 4), F(1, 4))]) == 0.5
    assert hull_volume([(F(0), F(0)), (F(1), F(1)), (F(2), F(2))]) == 0
    cube = [tuple(F(x) for x in c) for c in itertools.product((0, 1), repeat=3)]
    assert hull_volume(cube) == pytest.approx(1)
    assert hull_volume(cube[:2]) == 0


def test_flag_goodness(example_family):
    assert not flag_is_good(example_family, (0, 1), flag(3, (0, 1)), 4)
    assert flag_is_good(example_family, (0, 1), flag(3, (0, 1), chart=1), 4)


def test_kkok_errors(example_family):
    with pytest.raises(ValueError, match="kappa"):
        kkok_cross_check(const_model(1, -1), None, flag(3, (0, 1)), [2, 4])
    with pytest.raises(ValueError, match="not good"):
        kkok_cross_check(example_family, (0, 1), flag(3, (0, 1)), [2, 4])


def test_kkok_small(flagship):
    res = kkok_cross_check(flagship, None, flag(11, (0, 1)), range(1, 13))
    assert res.kappa == 1 and res.generates and res.semigroup_index == 1
    assert res.hull_volume > 0 and res.count_estimate > 0
    assert set(res.methods.values()) == {"exact"}
