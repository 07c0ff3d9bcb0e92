"""JSON (de)serialization of diagonal models with field-level diagnostics."""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from .logq import LogQ, format_logq, is_prime, parse_logq
from .model import (
    INF,
    AffinePiece,
    DiagonalModel,
    Place,
    WeightFunction,
    max_family_consistent,
)


class ModelError(ValueError):
    """Malformed or inadmissible model description."""

    def __init__(self, message: str, field: str = "", line: int | None = None):
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if field:
            loc.append(f"field {field}")
        super().__init__(f"{message}" + (f" ({', '.join(loc)})" if loc else ""))
        self.field = field
        self.line = line


def _num(x, where: str) -> LogQ:
    if isinstance(x, float):
        raise ModelError("floats are not allowed; write rationals as 'p/q' strings", where)
    try:
        return parse_logq(x)
    except ValueError as e:
        raise ModelError(str(e), where) from None


def _rat(x, where: str) -> Fraction:
    v = _num(x, where)
    if not v.is_rational():
        raise ModelError("expected a rational", where)
    return v.rat


def _place(x, where: str) -> Place:
    if x == "inf":
        return INF
    if isinstance(x, str) and x.isdigit():
        x = int(x)
    if isinstance(x, int) and not isinstance(x, bool) and is_prime(x):
        return Place(x)
    raise ModelError(f"place must be 'inf' or a prime, got {x!r}", where)


def _dominant_piece(pieces: list[AffinePiece], dim: int, degree: int) -> AffinePiece | None:
    """A piece that is >= every other piece on all vertices (so max = that piece on P)."""
    verts = [[Fraction(degree if i == j else 0) for i in range(dim + 1)] for j in range(dim + 1)]

    def val(pc, u):
        return pc.offset + sum((g * x for g, x in zip(pc.gradient, u) if x), LogQ(0))

    for pc in pieces:
        if all(val(pc, u) >= val(q, u) for q in pieces for u in verts):
            return pc
    return None


def model_from_json(obj: Any) -> DiagonalModel:
    if not isinstance(obj, dict):
        raise ModelError("model must be a JSON object")
    for key in ("dim", "degree", "places"):
        if key not in obj:
            raise ModelError("missing required field", key)
    dim, degree = obj["dim"], obj["degree"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ModelError("dim must be a positive integer", "dim")
    if not isinstance(degree, int) or isinstance(degree, bool) or degree < 0:
        raise ModelError("degree must be a non-negative integer", "degree")
    if not isinstance(obj["places"], list):
        raise ModelError("places must be a list", "places")
    weights = []
    seen = set()
    for i, pl in enumerate(obj["places"]):
        w = f"places[{i}]"
        if not isinstance(pl, dict):
            raise ModelError("place entry must be an object", w)
        place = _place(pl.get("place"), f"{w}.place")
        if place in seen:
            raise ModelError("duplicate place", f"{w}.place")
        seen.add(place)
        raw = pl.get("affine_pieces")
        if not isinstance(raw, list) or not raw:
            raise ModelError("affine_pieces must be a nonempty list", f"{w}.affine_pieces")
        pieces = []
        for k, pc in enumerate(raw):
            wk = f"{w}.affine_pieces[{k}]"
            if not isinstance(pc, dict) or "gradient" not in pc or "offset" not in pc:
                raise ModelError("piece needs gradient and offset", wk)
            g = pc["gradient"]
            if not isinstance(g, list) or len(g) not in (dim, dim + 1):
                raise ModelError(f"gradient must have {dim + 1} entries", f"{wk}.gradient")
            grad = [_num(x, f"{wk}.gradient[{j}]") for j, x in enumerate(g)]
            if len(grad) == dim:
                grad = [LogQ(0)] + grad
            pieces.append(AffinePiece(tuple(grad), _num(pc["offset"], f"{wk}.offset")))
        combine = pl.get("combine", "min")
        if combine not in ("min", "max"):
            raise ModelError("combine must be 'min' or 'max'", f"{w}.combine")
        if combine == "max" and len(pieces) > 1:
            dom = _dominant_piece(pieces, dim, degree)
            if dom is None:
                raise ModelError("weights must be min-of-affines (concave)", f"{w}.affine_pieces")
            pieces = [dom]
        weights.append((place, WeightFunction(tuple(pieces))))
    fam = None
    if obj.get("max_family") is not None:
        mf = obj["max_family"]
        if not isinstance(mf, dict):
            raise ModelError("max_family must be an object", "max_family")
        fam = []
        for key, vals in sorted(mf.items()):
            where = f"max_family.{key}"
            place = _place(key, where)
            if not isinstance(vals, list) or len(vals) != dim + 1:
                raise ModelError(f"need {dim + 1} scalings", where)
            a = tuple(_rat(x, f"{where}[{j}]") for j, x in enumerate(vals))
            if any(x <= 0 for x in a):
                raise ModelError("scalings must be positive", where)
            fam.append((place, a))
            if place not in seen:
                g = tuple(LogQ.log(x) for x in a)
                weights.append((place, WeightFunction((AffinePiece(g, LogQ(0)),))))
                seen.add(place)
        fam = tuple(sorted(fam))
    try:
        model = DiagonalModel(dim, degree, tuple(weights), fam)
    except ValueError as e:
        raise ModelError(str(e)) from None
    if not max_family_consistent(model):
        raise ModelError("max_family disagrees with the weights at a vertex", "max_family")
    return model


def model_to_json(model: DiagonalModel) -> dict:
    out: dict[str, Any] = {"dim": model.dim, "degree": model.degree, "places": []}
    for pl, w in model.weights:
        out["places"].append({
            "place": "inf" if pl.is_inf else pl.p,
            "affine_pieces": [
                {"gradient": [format_logq(g) for g in pc.gradient], "offset": format_logq(pc.offset)}
                for pc in w.pieces
            ],
        })
    if model.max_family is not None:
        out["max_family"] = {pl.label(): [_fmt(x) for x in a] for pl, a in model.max_family}
    return out


def _fmt(x: Fraction) -> str:
    return format_logq(LogQ(x))


def dumps_model(model: DiagonalModel) -> str:
    return json.dumps(model_to_json(model), indent=2, sort_keys=True) + "\n"


def loads_model(text: str) -> DiagonalModel:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelError(f"invalid JSON: {e.msg}", line=e.lineno) from None
    return model_from_json(obj)


def load_model(path: str | Path) -> DiagonalModel:
    return loads_model(Path(path).read_text())
