"""Command-line front end.

Exit codes: 0 success or all checks pass, 1 some check failed, 2 usage or model error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional, Sequence

from . import verify as V
from .flags import GoodFlag, find_good_flag
from .lattice import ConvexBody, lattice_span
from .logq import format_logq
from .model import (
    Section,
    augmented_base_locus,
    enumerate_strictly_small,
    is_nef,
    is_w_ample,
    normalize_face,
    restrict_to_face,
    stable_base_locus_ss,
)
from .modelio import ModelError, dumps_model, load_model, model_to_json
from .okounkov import NEG_INF, CountCache, build_semigroup, kappa_hat, level_count, volume_estimate

SCHEMA_VERSION = 1
CSV_COLUMNS = ["m", "count_lo", "count_hi", "normalized_lo", "normalized_hi"]


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument parsing helpers


def parse_range(text: str) -> list[int]:
    """'8..48', '8..48:8', '2,4,6' or a single integer."""
    out: list[int] = []
    try:
        for part in text.split(","):
            part = part.strip()
            if ".." in part:
                span, _, step = part.partition(":")
                a, b = span.split("..")
                out.extend(range(int(a), int(b) + 1, int(step) if step else 1))
            else:
                out.append(int(part))
    except ValueError:
        raise UsageError(f"bad range {text!r}") from None
    if not out or min(out) < 1:
        raise UsageError(f"range {text!r} must contain positive integers")
    return sorted(set(out))


def parse_face(text: Optional[str]):
    if text is None or text == "all":
        return None
    try:
        return tuple(sorted(int(x) for x in text.split(",")))
    except ValueError:
        raise UsageError(f"bad face {text!r}") from None


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"bad integer list {text!r}") from None


def parse_avoid(text: Optional[str], model) -> Optional[Section]:
    """JSON object {"a0,a1,...": coefficient} describing a section."""
    if text is None:
        return None
    try:
        obj = json.loads(text)
        coeffs = {tuple(int(x) for x in k.split(",")): Fraction(str(v)) for k, v in obj.items()}
    except (ValueError, AttributeError):
        raise UsageError("--avoid must be a JSON object mapping 'a0,a1,...' to coefficients") from None
    if not coeffs:
        raise UsageError("--avoid needs at least one term")
    degs = {sum(a) for a in coeffs}
    if len(degs) != 1 or any(len(a) != model.dim + 1 for a in coeffs) or next(iter(degs)) % model.degree:
        raise UsageError("--avoid terms must be exponent vectors of a common level")
    return Section.make(next(iter(degs)) // model.degree, coeffs)


def _emit(obj, out: Optional[str]) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _kappa(k):
    return "-inf" if k == NEG_INF else k


def _count_json(res) -> dict:
    return {"exact": None if res.exact is None else str(res.exact), "log_lo": res.log_lo,
            "log_hi": res.log_hi, "method": res.method}


def _pmap(fn: Callable, items: Sequence, args) -> list:
    if args.deterministic or args.jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=args.jobs) as ex:
        return list(ex.map(fn, items))


def volume_csv(rep) -> str:
    buf = io.StringIO()
    buf.write(f"# schema_version={SCHEMA_VERSION}; count columns are natural logarithms\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rep.rows:
        w.writerow([r.m, repr(r.count_lo), repr(r.count_hi), repr(r.normalized_lo), repr(r.normalized_hi)])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# subcommands


def cmd_model_validate(args) -> int:
    model = load_model(args.model)
    nef = is_nef(model)
    _emit({"valid": True, "dim": model.dim, "degree": model.degree,
           "places": [pl.label() for pl in model.places], "nef": nef.state,
           "canonical": model_to_json(model)}, args.out)
    return 0


def cmd_sections_enum(args) -> int:
    model = load_model(args.model)
    face = parse_face(args.face)
    gss = (restrict_to_face(model, args.m, normalize_face(model, face)).hull if face is not None
           else enumerate_strictly_small(model, args.m))
    mons = [{"exponent": list(a), "step": str(q), "radius": str(R), "active": i in set(gss.active())}
            for i, (a, q, R) in enumerate(zip(gss.monomials, gss.steps, gss.radii))]
    out = {"m": args.m, "face": list(normalize_face(model, face)), "monomials": mons,
           "count": _count_json(level_count(gss, CountCache.from_env()))}
    if args.list:
        try:
            out["sections"] = [{",".join(map(str, a)): str(c) for a, c in s.coeffs}
                               for s in gss.sections(args.limit)]
        except ValueError as e:
            raise UsageError(str(e)) from None
    _emit(out, args.out)
    return 0


def cmd_count(args) -> int:
    model = load_model(args.model)
    face = normalize_face(model, parse_face(args.face))
    cache = CountCache.from_env()
    rows = []
    for m in parse_range(args.m):
        rows.append({"m": m, **_count_json(level_count(restrict_to_face(model, m, face).hull, cache))})
    _emit({"face": list(face), "levels": rows}, args.out)
    return 0


def cmd_avol(args) -> int:
    model = load_model(args.model)
    face = parse_face(args.face)
    rep = volume_estimate(model, face, parse_range(args.m), extrapolate=args.extrapolate,
                          cache=CountCache.from_env())
    if args.csv:
        Path(args.csv).write_text(volume_csv(rep))
    out = rep.to_json()
    out["schema_version"] = SCHEMA_VERSION
    out["face"] = list(out["face"])
    _emit(out, args.out)
    return 0


def _flag_from_args(model, face, args) -> GoodFlag:
    face = normalize_face(model, face)
    if args.chart is None and args.center is None and args.order is None:
        fl = find_good_flag(model, face, None, args.p)
        assert fl is not None
        return fl
    chart = args.chart if args.chart is not None else face[0]
    others = tuple(i for i in face if i != chart)
    center = tuple(parse_int_list(args.center)) if args.center else (0,) * len(others)
    order = tuple(parse_int_list(args.order)) if args.order else others
    return GoodFlag(args.p, chart, center, order, face)


def cmd_flag_find(args) -> int:
    model = load_model(args.model)
    face = parse_face(args.face)
    fl = find_good_flag(model, face, parse_avoid(args.avoid, model), args.p)
    _emit({"flag": None if fl is None else fl.to_json(), "face": list(normalize_face(model, face))}, args.out)
    return 0 if fl is not None else 1


def cmd_semigroup_build(args) -> int:
    model = load_model(args.model)
    face = normalize_face(model, parse_face(args.face))
    fl = _flag_from_args(model, face, args)
    s = build_semigroup(model, face, fl, args.m_max)
    _emit({"face": list(face), "flag": fl.to_json(), "m_max": args.m_max,
           "levels": {str(m): sorted(list(w) for w in s.levels[m]) for m in sorted(s.levels)},
           "methods": {str(m): s.methods[m] for m in sorted(s.methods)},
           "n_hat": s.n_hat, "rank": s.rank, "index": s.index(), "generates": s.generates(),
           "span_hnf": s.span_hnf(), "kappa": _kappa(kappa_hat(model, face, args.m_max))}, args.out)
    return 0


# verify jobs are module-level so they can be shipped to worker processes


def _job_yuan(t):
    model, face, p, m = t
    return V.check_yuan_theorem(model, face, find_good_flag(model, face, None, p), m).to_json()


def _random_counting_instance(rng: random.Random):
    n = rng.randint(1, 4)
    k = rng.randint(1, n)
    half = {tuple(rng.randint(-3, 3) for _ in range(n)) for _ in range(rng.randint(1, 60))}
    G = half | {tuple(-x for x in g) for g in half} | {(0,) * n}
    U = unimodular(n, rng)
    r = [U[i] for i in range(k)]
    return r, sorted(G)


def unimodular(n: int, rng: random.Random) -> list[list[int]]:
    """Random product of elementary integer matrices."""
    M = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(3 * n):
        i, j = rng.sample(range(n), 2) if n > 1 else (0, 0)
        if i == j:
            continue
        c = rng.randint(-2, 2)
        M[i] = [a + c * b for a, b in zip(M[i], M[j])]
    rng.shuffle(M)
    return M


def _random_dilation_instance(rng: random.Random):
    n = rng.randint(1, 3)
    basis = unimodular(n, rng)
    if rng.random() < 0.5:
        basis[0] = [2 * x for x in basis[0]]
    vs = [tuple(Fraction(rng.randint(-3, 3), rng.randint(1, 2)) for _ in range(n)) for _ in range(rng.randint(1, 4))]
    vs = [v for v in vs if any(v)] or [tuple(Fraction(1) for _ in range(n))]
    pts = vs + [tuple(-x for x in v) for v in vs]
    a = rng.choice([Fraction(1), Fraction(3, 2), Fraction(2), Fraction(5)])
    return lattice_span(basis, n), ConvexBody(pts), a


def cmd_verify(args) -> int:
    name = args.name
    certs: list[dict] = []
    if name in ("counting-lemma", "dilation-lemma"):
        rng = random.Random(args.seed)
        for _ in range(args.instances):
            if name == "counting-lemma":
                r, G = _random_counting_instance(rng)
                certs.append(V.check_counting_lemma(r, G).to_json())
            else:
                M, body, a = _random_dilation_instance(rng)
                certs.append(V.check_dilation_lemma(M, body, a).to_json())
    else:
        if not args.model:
            raise UsageError(f"verify {name} needs --model")
        model = load_model(args.model)
        face = parse_face(args.face)
        if name == "yuan":
            jobs = [(model, face, p, m) for p in parse_int_list(args.p) for m in parse_range(args.m)]
            certs = _pmap(_job_yuan, jobs, args)
        elif name == "prop-yuan":
            for p in parse_int_list(args.p):
                fl = find_good_flag(model, face, None, p)
                certs.append(V.check_prop_yuan(model, face, fl, parse_range(args.m)).to_json())
        elif name == "brunn-minkowski":
            if not args.model2:
                raise UsageError("verify brunn-minkowski needs --model2")
            certs.append(V.check_brunn_minkowski(model, load_model(args.model2), face, parse_range(args.m)).to_json())
        elif name == "continuity":
            lams = [Fraction(x) for x in args.lam.split(",")]
            certs.append(V.check_continuity(model, face, lams, parse_range(args.m)).to_json())
        elif name == "nef-equality":
            certs.append(V.check_nef_equality(model, face, parse_range(args.m), override=args.override).to_json())
        elif name == "fujita":
            certs.append(V.fujita_lower_bound(model, face, parse_range(args.m), args.grid).to_json())
        elif name == "duality":
            certs.append(V.check_baselocus_duality(model, args.m_max).to_json())
        elif name == "w-ample-openness":
            certs.append(V.check_w_ample_openness(model, args.m_max).to_json())
    _emit({"certificates": certs, "pass": all(c["pass"] for c in certs)}, args.out)
    return 0 if all(c["pass"] for c in certs) else 1


def cmd_report_bundle(args) -> int:
    model = load_model(args.model)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files: dict[str, str] = {}

    def put(name: str, text: str):
        (out / name).write_text(text)
        files[name] = hashlib.sha256(text.encode()).hexdigest()

    def js(obj) -> str:
        return json.dumps(obj, indent=2, sort_keys=True) + "\n"

    put("model.json", dumps_model(model))
    rep = volume_estimate(model, None, parse_range(args.m), cache=CountCache.from_env())
    vj = rep.to_json()
    vj["face"] = list(vj["face"])
    vj["schema_version"] = SCHEMA_VERSION
    put("avol.json", js(vj))
    put("avol.csv", volume_csv(rep))
    loci = {"stable_ss": [list(c) for c in stable_base_locus_ss(model, args.m_max).components]}
    certs = []
    if model.degree >= 1:
        loci["augmented"] = [list(c) for c in augmented_base_locus(model, args.m_max).components]
        ok, witness = is_w_ample(model, args.m_max)
        loci["w_ample"] = ok
        loci["w_ample_level"] = witness
        certs.append(V.check_baselocus_duality(model, args.m_max).to_json())
        if ok:
            certs.append(V.check_w_ample_openness(model, args.m_max).to_json())
    put("base_locus.json", js(loci))
    put("certificates.json", js(certs))
    passed = all(c["pass"] for c in certs)
    (out / "manifest.json").write_text(js({"schema_version": SCHEMA_VERSION, "files": files, "pass": passed}))
    return 0 if passed else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="adelic-okounkov", description=__doc__.splitlines()[0])
    ap.add_argument("--deterministic", action="store_true", help="run jobs sequentially in a fixed order")
    ap.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p, face=True, out=True):
        p.add_argument("--model", required=True)
        if face:
            p.add_argument("--face", default="all")
        if out:
            p.add_argument("--out")

    mp = sub.add_parser("model").add_subparsers(dest="sub", required=True)
    p = mp.add_parser("validate")
    p.add_argument("model")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_model_validate)

    sp = sub.add_parser("sections").add_subparsers(dest="sub", required=True)
    p = sp.add_parser("enum")
    common(p)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--list", action="store_true", help="also list every section")
    p.add_argument("--limit", type=int, default=10_000)
    p.set_defaults(fn=cmd_sections_enum)

    p = sub.add_parser("count")
    common(p)
    p.add_argument("--m", required=True)
    p.set_defaults(fn=cmd_count)

    p = sub.add_parser("avol")
    common(p)
    p.add_argument("--m", required=True)
    p.add_argument("--extrapolate", action="store_true")
    p.add_argument("--csv")
    p.set_defaults(fn=cmd_avol)

    fp = sub.add_parser("flag").add_subparsers(dest="sub", required=True)
    p = fp.add_parser("find")
    common(p)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--avoid")
    p.set_defaults(fn=cmd_flag_find)

    gp = sub.add_parser("semigroup").add_subparsers(dest="sub", required=True)
    p = gp.add_parser("build")
    common(p)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--m-max", type=int, required=True)
    p.add_argument("--chart", type=int)
    p.add_argument("--center")
    p.add_argument("--order")
    p.set_defaults(fn=cmd_semigroup_build)

    p = sub.add_parser("verify")
    p.add_argument("name", choices=["counting-lemma", "dilation-lemma", "yuan", "prop-yuan", "brunn-minkowski",
                                    "continuity", "nef-equality", "fujita", "duality", "w-ample-openness"])
    p.add_argument("--model")
    p.add_argument("--model2")
    p.add_argument("--face", default="all")
    p.add_argument("--p", default="11")
    p.add_argument("--m", default="2..6")
    p.add_argument("--m-max", type=int, default=10)
    p.add_argument("--lam", default="1/20,-1/20,1/10,-1/10")
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--override", action="store_true", help="treat an undetermined nef state as nef")
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_verify)

    rp = sub.add_parser("report").add_subparsers(dest="sub", required=True)
    p = rp.add_parser("bundle")
    p.add_argument("--model", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--m", default="16,32")
    p.add_argument("--m-max", type=int, default=10)
    p.set_defaults(fn=cmd_report_bundle)
    return ap


def run(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.fn(args)
    except (ModelError, UsageError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ValueError, NotImplementedError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
