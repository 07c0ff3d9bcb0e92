import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adelic_okounkov.logq import LogQ
from adelic_okounkov.model import INF, Place, enumerate_strictly_small
from adelic_okounkov.modelio import ModelError, dumps_model, load_model, loads_model, model_from_json

from conftest import LOG2, affine_model, max_family


def base(**kw):
    obj = {"dim": 1, "degree": 1,
           "places": [{"place": "inf", "affine_pieces": [{"gradient": ["0", "0"], "offset": "log(2)"}]}]}
    obj.update(kw)
    return obj


def test_round_trip(flagship, plane, example_family, tmp_path):
    for m in (flagship, plane, example_family):
        text = dumps_model(m)
        assert loads_model(text) == m
        assert dumps_model(loads_model(text)) == text
    f = tmp_path / "m.json"
    f.write_text(dumps_model(example_family))
    assert load_model(f) == example_family


rat = st.fractions(min_value=-3, max_value=3, max_denominator=7)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(rat, rat, rat, st.sampled_from([2, 3, 5])), min_size=1, max_size=3))
def test_round_trip_random(pieces):
    model = affine_model(1, [((a, LogQ.log(p) * b), c) for a, b, c, p in pieces])
    assert loads_model(dumps_model(model)) == model


def test_short_gradient_means_leading_zero():
    obj = base(places=[{"place": "inf", "affine_pieces": [{"gradient": ["1/2"], "offset": "0"}]}])
    m = model_from_json(obj)
    assert m.weight(INF).pieces[0].gradient == (LogQ(0), LogQ(Fraction(1, 2)))


@pytest.mark.parametrize("mutate,field", [
    (lambda o: o.pop("dim"), "dim"),
    (lambda o: o.update(dim=0), "dim"),
    (lambda o: o.update(degree=-1), "degree"),
    (lambda o: o["places"][0].update(place=4), "places[0].place"),
    (lambda o: o["places"].append(dict(o["places"][0])), "places[1].place"),
    (lambda o: o["places"][0].update(affine_pieces=[]), "places[0].affine_pieces"),
    (lambda o: o["places"][0]["affine_pieces"][0].update(gradient=["0", "0", "0"]),
     "places[0].affine_pieces[0].gradient"),
    (lambda o: o["places"][0]["affine_pieces"][0].update(offset=0.5), "places[0].affine_pieces[0].offset"),
    (lambda o: o["places"][0]["affine_pieces"][0].update(offset="log(x)"), "places[0].affine_pieces[0].offset"),
    (lambda o: o["places"][0].update(combine="sum"), "places[0].combine"),
    (lambda o: o.update(max_family={"inf": ["1", "0"]}), "max_family.inf"),
    (lambda o: o.update(max_family={"inf": ["1"]}), "max_family.inf"),
])
def test_field_errors(mutate, field):
    obj = base()
    mutate(obj)
    with pytest.raises(ModelError) as ei:
        model_from_json(obj)
    assert ei.value.field == field
    assert f"field {field}" in str(ei.value)


def test_composite_log_normalizes():
    obj = base()
    obj["places"][0]["affine_pieces"][0]["offset"] = "log(4)"
    assert model_from_json(obj).weight(INF).pieces[0].offset == LOG2 * 2


def test_max_of_affines_rejected_unless_dominated():
    pcs = [{"gradient": ["1", "0"], "offset": "0"}, {"gradient": ["0", "1"], "offset": "0"}]
    obj = base(places=[{"place": "inf", "combine": "max", "affine_pieces": pcs}])
    with pytest.raises(ModelError, match="concave"):
        model_from_json(obj)
    pcs = [{"gradient": ["1", "1"], "offset": "1"}, {"gradient": ["0", "0"], "offset": "0"}]
    obj = base(places=[{"place": "inf", "combine": "max", "affine_pieces": pcs}])
    assert len(model_from_json(obj).weight(INF).pieces) == 1


def test_max_family_derivation(example_family):
    obj = {"dim": 2, "degree": 1, "places": [], "max_family": {"inf": ["1/2", "2", "2"]}}
    m = model_from_json(obj)
    assert m == example_family
    u = [Fraction(1, 3)] * 3
    assert m.weight(INF).at(u) == LogQ.log(2) * Fraction(1, 3)


def test_max_family_inconsistent():
    obj = base(max_family={"inf": ["1", "3"]})
    with pytest.raises(ModelError, match="disagrees"):
        model_from_json(obj)
    obj = base(max_family={"inf": ["2", "2"]})
    assert model_from_json(obj).max_family == ((INF, (Fraction(2), Fraction(2))),)


def test_finite_place_and_levels():
    obj = base()
    obj["places"].append({"place": 3, "affine_pieces": [{"gradient": ["0", "log(3)"], "offset": "0"}]})
    m = model_from_json(obj)
    assert m.weight(Place(3)) is not None
    assert enumerate_strictly_small(m, 1).steps == (Fraction(1), Fraction(1, 3))


def test_json_syntax_error_has_line():
    text = '{\n  "dim": 1,\n  "degree": 1\n  "places": []\n}'
    with pytest.raises(ModelError) as ei:
        loads_model(text)
    assert ei.value.line == 4 and "line 4" in str(ei.value)
    with pytest.raises(ModelError):
        loads_model(json.dumps([1, 2]))


def test_constant_builder_round_trip():
    m = max_family(1, 1)
    assert loads_model(dumps_model(m)) == m
    assert loads_model(dumps_model(affine_model(2, [((0, 0, 0), LOG2)], degree=3))).degree == 3
