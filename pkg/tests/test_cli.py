import csv
import hashlib
import json
import subprocess
import sys

import pytest

from adelic_okounkov.cli import parse_avoid, parse_face, parse_range, run, UsageError
from adelic_okounkov.modelio import dumps_model, load_model



@pytest.fixture
def files(tmp_path, flagship, example_family):
    a = tmp_path / "flag.json"
    a.write_text(dumps_model(flagship))
    b = tmp_path / "fam.json"
    b.write_text(dumps_model(example_family))
    return tmp_path, str(a), str(b)


def out_json(capsys):
    return json.loads(capsys.readouterr().out)


def test_parsers(flagship):
    assert parse_range("8..48:8") == [8, 16, 24, 32, 40, 48]
    assert parse_range("3,1,2..3") == [1, 2, 3]
    for bad in ("0..3", "a", "", "4..x"):
        with pytest.raises(UsageError):
            parse_range(bad)
    assert parse_face("all") is None and parse_face("2,0") == (0, 2)
    s = parse_avoid('{"2,1": 1, "1,2": "1/2"}', flagship)
    assert s.m == 3 and len(s.coeffs) == 2
    for bad in ('[1]', '{}', '{"1,1,1": 1}', '{"1,0": 1, "2,0": 1}'):
        with pytest.raises(UsageError):
            parse_avoid(bad, flagship)


def test_model_validate(files, capsys, tmp_path):
    _, a, b = files
    assert run(["model", "validate", a]) == 0
    d = out_json(capsys)
    assert d["valid"] and d["dim"] == 1 and d["nef"] == "undetermined"
    assert run(["model", "validate", b]) == 0 and out_json(capsys)["nef"] == "not-nef"
    bad = tmp_path / "bad.json"
    bad.write_text('{"dim": 1, "degree": 1, "places": [{"place": "inf", "combine": "max", "affine_pieces": '
                   '[{"gradient": ["1", "0"], "offset": "0"}, {"gradient": ["0", "1"], "offset": "0"}]}]}')
    assert run(["model", "validate", str(bad)]) == 2
    assert "places[0].affine_pieces" in capsys.readouterr().err
    assert run(["model", "validate", str(tmp_path / "missing.json")]) == 2
    assert run(["frobnicate"]) == 2


def test_sections_and_count(files, capsys):
    _, a, _ = files
    assert run(["sections", "enum", "--model", a, "--m", "2", "--list"]) == 0
    d = out_json(capsys)
    assert d["count"]["exact"] == "63" and len(d["sections"]) == 63
    assert run(["sections", "enum", "--model", a, "--m", "9", "--list", "--limit", "10"]) == 2
    assert run(["count", "--model", a, "--m", "1..3", "--face", "0"]) == 0
    d = out_json(capsys)
    assert d["face"] == [0] and [r["m"] for r in d["levels"]] == [1, 2, 3]


def test_avol_csv(files, capsys):
    tmp, a, _ = files
    c = tmp / "v.csv"
    assert run(["avol", "--model", a, "--m", "8,16", "--extrapolate", "--csv", str(c)]) == 0
    d = out_json(capsys)
    assert d["schema_version"] == 1 and d["extrapolated"] is not None
    lines = c.read_text().splitlines()
    assert lines[0].startswith("# schema_version=1")
    rows = list(csv.DictReader(lines[1:]))
    assert [int(r["m"]) for r in rows] == [8, 16]
    assert float(rows[-1]["normalized_lo"]) == d["rows"][-1]["normalized_lo"]


def test_flag_find(files, capsys):
    _, a, b = files
    assert run(["flag", "find", "--model", a, "--p", "2", "--avoid", '{"2,1": 1, "1,2": 1}']) == 1
    assert out_json(capsys)["flag"] is None
    assert run(["flag", "find", "--model", a, "--p", "11", "--avoid", '{"2,1": 1, "1,2": 1}']) == 0
    assert out_json(capsys)["flag"] == {"p": 11, "chart": 0, "center": [1], "order": [1]}
    assert run(["flag", "find", "--model", b, "--p", "4"]) == 2


def test_semigroup_build(files, capsys):
    _, a, _ = files
    assert run(["semigroup", "build", "--model", a, "--p", "2", "--m-max", "3"]) == 0
    d = out_json(capsys)
    assert d["generates"] and d["index"] == 1 and d["n_hat"] == [1, 2, 3] and d["kappa"] == 1
    assert run(["semigroup", "build", "--model", a, "--p", "3", "--m-max", "2", "--center", "5"]) == 2


def test_verify_commands(files, capsys, tmp_path):
    _, a, b = files
    assert run(["verify", "counting-lemma", "--instances", "25", "--seed", "1"]) == 0
    d = out_json(capsys)
    assert d["pass"] and len(d["certificates"]) == 25
    assert run(["verify", "dilation-lemma", "--instances", "10"]) == 0
    capsys.readouterr()
    assert run(["verify", "yuan"]) == 2
    out = tmp_path / "y.json"
    assert run(["verify", "yuan", "--model", a, "--m", "2..4", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["pass"]
    assert run(["verify", "duality", "--model", b, "--m-max", "8"]) == 0
    capsys.readouterr()
    assert run(["verify", "brunn-minkowski", "--model", a]) == 2
    assert run(["verify", "nef-equality", "--model", b]) == 2


def test_determinism(files):
    tmp, a, _ = files
    outs = []
    for i, extra in enumerate([["--deterministic"], ["--deterministic"], ["--jobs", "2"]]):
        o = tmp / f"d{i}.json"
        assert run(extra + ["verify", "yuan", "--model", a, "--p", "3,11", "--m", "2..4", "--out", str(o)]) == 0
        outs.append(o.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_report_bundle(files):
    tmp, a, b = files
    d = tmp / "bundle"
    assert run(["report", "bundle", "--model", a, "--out-dir", str(d), "--m", "4,8", "--m-max", "5"]) == 0
    man = json.loads((d / "manifest.json").read_text())
    assert man["pass"] and set(man["files"]) == {"model.json", "avol.json", "avol.csv", "base_locus.json",
                                                  "certificates.json"}
    for name, h in man["files"].items():
        assert hashlib.sha256((d / name).read_bytes()).hexdigest() == h
    assert load_model(d / "model.json") == load_model(a)


def test_cache_env(files, tmp_path, monkeypatch, capsys):
    _, a, _ = files
    monkeypatch.setenv("ADELIC_OKOUNKOV_CACHE", str(tmp_path / "cache"))
    assert run(["count", "--model", a, "--m", "3,4"]) == 0
    first = out_json(capsys)
    assert len(list((tmp_path / "cache").glob("*.json"))) == 2
    assert run(["count", "--model", a, "--m", "3,4"]) == 0
    assert out_json(capsys) == first


def test_module_entry_point(files):
    _, a, _ = files
    r = subprocess.run([sys.executable, "-m", "adelic_okounkov", "model", "validate", a],
                       capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["valid"]
