"""Finite, machine-checkable versions of the counting inequalities and limit theorems.

Each check returns a Certificate whose clauses store both sides of every
asserted inequality, so the verdict can be recomputed from the stored values.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Optional, Sequence

from .concave import toric_lower_bound
from .flags import GoodFlag, find_good_flag
from .lattice import ConvexBody, Lattice, dilate_count, hnf, star_sum
from .logq import LogQ, format_logq, parse_logq
from .model import (
    INF,
    DiagonalModel,
    all_faces,
    augmented_base_locus,
    delta_upper,
    adeg_diagonal_nef,
    is_nef,
    is_w_ample,
    monomial_data,
    normalize_face,
    restrict_to_face,
    stable_base_locus_ss,
    tensor,
    twist_infinity,
)
from .modelio import model_to_json
from .okounkov import (
    NEG_INF,
    build_semigroup,
    flag_is_good,
    geometric_mult_estimate,
    kappa_hat,
    level_count,
    level_image,
    volume_estimate,
)

Side = Any  # exact value as a string, or [lo, hi] floats


def _exact(x) -> str:
    if isinstance(x, LogQ):
        return format_logq(x)
    return format_logq(LogQ(Fraction(x)))


def _iv(lo: float, hi: Optional[float] = None) -> list[float]:
    return [float(lo), float(lo if hi is None else hi)]


def _bounds(side: Side):
    if isinstance(side, str):
        v = parse_logq(side)
        return v, v
    return side[0], side[1]


@dataclass
class Clause:
    name: str
    lhs: Side
    rhs: Side
    relation: str = "<="
    tolerance: float = 0.0

    def holds(self) -> bool:
        lo_l, hi_l = _bounds(self.lhs)
        lo_r, hi_r = _bounds(self.rhs)
        if isinstance(self.lhs, str) and isinstance(self.rhs, str) and not self.tolerance:
            if self.relation == "<=":
                return lo_l <= lo_r
            if self.relation == "<":
                return lo_l < lo_r
            return lo_l == lo_r
        hi_l, lo_r, lo_l, hi_r = float(hi_l), float(lo_r), float(lo_l), float(hi_r)
        if self.relation == "<=":
            return hi_l <= lo_r + self.tolerance
        if self.relation == "<":
            return hi_l < lo_r + self.tolerance
        return abs(lo_l - lo_r) <= self.tolerance and abs(hi_l - hi_r) <= self.tolerance

    def to_json(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs,
                "relation": self.relation, "tolerance": self.tolerance}


@dataclass
class Certificate:
    check: str
    inputs_digest: str
    clauses: list[Clause] = field(default_factory=list)
    status: str = "pass"        # pass | fail | inconclusive | vacuous | domain-exit
    witness: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status in ("pass", "vacuous", "domain-exit")

    def recheck(self) -> bool:
        """Recompute the verdict from the stored clause values alone."""
        return all(c.holds() for c in self.clauses)

    def to_json(self) -> dict:
        return {
            "check": self.check,
            "inputs_digest": self.inputs_digest,
            "lhs": [c.lhs for c in self.clauses],
            "rhs": [c.rhs for c in self.clauses],
            "pass": self.passed,
            "status": self.status,
            "witness": self.witness,
            "constants": self.constants,
            "clauses": [c.to_json() for c in self.clauses],
        }

    @staticmethod
    def from_json(d: dict) -> "Certificate":
        cl = [Clause(c["name"], c["lhs"], c["rhs"], c["relation"], c["tolerance"]) for c in d["clauses"]]
        return Certificate(d["check"], d["inputs_digest"], cl, d["status"], d["witness"], d["constants"])


def digest(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str).encode()).hexdigest()


def _finish(cert: Certificate, fail_status: str = "fail") -> Certificate:
    bad = [c.name for c in cert.clauses if not c.holds()]
    if bad:
        cert.status = fail_status
        cert.witness.setdefault("failed_clauses", bad)
    return cert


def _model_inputs(model: DiagonalModel, **kw) -> dict:
    d = {"model": model_to_json(model)}
    d.update(kw)
    return d


# ---------------------------------------------------------------------------
# counting lemmas


def _is_surjective(r: Sequence[Sequence[int]], n: int) -> bool:
    k = len(r)
    cols = [[r[i][j] for i in range(k)] for j in range(n)]
    H = hnf(cols, k)
    return len(H) == k and all(H[i][i] == 1 for i in range(k))


def check_counting_lemma(r: Sequence[Sequence[int]], gamma: Iterable[Sequence[int]]) -> Certificate:
    """Fibre counting for a surjection r (k x n integer matrix) and finite symmetric gamma."""
    G = {tuple(int(x) for x in g) for g in gamma}
    if not G:
        raise ValueError("empty set")
    n = len(next(iter(G)))
    if any(tuple(-x for x in g) not in G for g in G):
        raise ValueError("asymmetric set")
    r = [list(map(int, row)) for row in r]
    if any(len(row) != n for row in r):
        raise ValueError("matrix width does not match the ambient rank")
    if not _is_surjective(r, n):
        raise ValueError("map is not surjective")

    def apply(v):
        return tuple(sum(a * b for a, b in zip(row, v)) for row in r)

    G2 = star_sum(2, G)
    image = {apply(g) for g in G}
    zero = (0,) * len(r)
    ker1 = sum(1 for g in G if apply(g) == zero)
    ker2 = sum(1 for g in G2 if apply(g) == zero)
    cert = Certificate("counting_lemma", digest({"r": r, "gamma": sorted(G)}))
    # exponentiated forms of the two logarithmic inequalities
    cert.clauses.append(Clause("count <= image * kernel(2*set)", _exact(len(G)), _exact(len(image) * ker2)))
    cert.clauses.append(Clause("image * kernel(set) <= count(2*set)", _exact(len(image) * ker1), _exact(len(G2))))
    cert.constants = {"count": len(G), "image": len(image), "kernel": ker1,
                      "kernel_double": ker2, "double": len(G2)}
    return _finish(cert)


def check_dilation_lemma(M: Lattice, body: ConvexBody, a) -> Certificate:
    a = Fraction(a)
    if not body.is_symmetric():
        raise ValueError("body must be symmetric about the origin")
    small, big = dilate_count(M, body, a)
    rk = M.rank
    factor = math.ceil(2 * a) ** rk
    cert = Certificate("dilation_lemma", digest({"basis": M.basis, "points": [[str(x) for x in p] for p in body.points],
                                                  "a": str(a)}))
    cert.clauses.append(Clause("count <= dilated count", _exact(small), _exact(big)))
    cert.clauses.append(Clause("dilated count <= count * ceil(2a)^rank", _exact(big), _exact(small * factor)))
    cert.constants = {"count": small, "dilated": big, "rank": rk, "ceil_2a": math.ceil(2 * a)}
    return _finish(cert)


# ---------------------------------------------------------------------------
# Yuan-type estimates


def _log_count_iv(res) -> list[float]:
    if res.exact is not None:
        v = math.log(res.exact)
        return _iv(v - 1e-12 * max(1.0, v), v + 1e-12 * max(1.0, v))
    return _iv(res.log_lo, res.log_hi)


def check_yuan_theorem(model: DiagonalModel, face, flag: GoodFlag, m: int) -> Certificate:
    face = normalize_face(model, face)
    gss = restrict_to_face(model, m, face).hull
    if gss.is_trivial():
        raise ValueError("restricted set is {0}")
    if not flag_is_good(model, face, flag, m):
        raise ValueError("flag not good for the restricted series")
    res = level_count(gss)
    img, method = level_image(gss, flag)
    rank = len(gss.active())
    p = flag.p
    beta = p * rank
    delta = delta_upper(model, face)
    lp = math.log(p)
    rhs = (delta * math.log(4) + math.log(4 * p) * math.log(4 * beta)) * rank / lp
    lc = _log_count_iv(res)
    wl = len(img) * lp
    gap = _iv(max(abs(lc[0] - wl), abs(lc[1] - wl)))
    if not (lc[0] <= wl <= lc[1]):
        gap = _iv(min(abs(lc[0] - wl), abs(lc[1] - wl)), max(abs(lc[0] - wl), abs(lc[1] - wl)))
    cert = Certificate("yuan_theorem", digest(_model_inputs(model, face=face, flag=flag.to_json(), m=m)))
    cert.clauses.append(Clause("|log#set - #w log p| <= bound", gap, _iv(rhs)))
    cert.constants = {"log_count": lc, "valuation_count": len(img), "rank": rank, "beta": beta,
                      "delta_upper": delta, "delta_substituted": True, "p": p, "m": m,
                      "exact_count": res.exact is not None, "image_method": method,
                      "slack": rhs - gap[1]}
    cert.witness["vacuous"] = rhs >= max(lc[1], wl)
    return _finish(cert)


def prop_yuan_bound(model: DiagonalModel, face, p: int, m_range: Sequence[int]) -> tuple[float, dict]:
    """D / log p with D = log 4 * delta_upper * e(R) / kappa!."""
    face = normalize_face(model, face)
    kap = kappa_hat(model, face, max(m_range))
    e = geometric_mult_estimate(model, face, m_range)
    delta = delta_upper(model, face)
    D = math.log(4) * delta * e / math.factorial(int(kap))
    return D / math.log(p), {"D": D, "e_hat_geometric": e, "delta_upper": delta, "kappa": kap}


def check_prop_yuan(model: DiagonalModel, face, flag: GoodFlag, m_range: Sequence[int]) -> Certificate:
    face = normalize_face(model, face)
    ms = sorted(set(m_range))
    cert = Certificate("prop_yuan", digest(_model_inputs(model, face=face, flag=flag.to_json(), m=ms)))
    kap = kappa_hat(model, face, ms[-1])
    if kap == NEG_INF:
        cert.status = "vacuous"
        cert.witness["reason"] = "no restricted strictly small sections"
        return cert
    if not flag_is_good(model, face, flag, ms[-1]):
        raise ValueError("flag not good for the restricted series")
    k = int(kap)
    p = flag.p
    series = []
    for m in ms:
        gss = restrict_to_face(model, m, face).hull
        lc = _log_count_iv(level_count(gss))
        img, _ = level_image(gss, flag)
        norm = float(m) ** (k + 1)
        series.append((m, lc[0] / norm, lc[1] / norm, len(img) * math.log(p) / norm))
    m, a_lo, a_hi, b = series[-1]
    gap = max(abs(a_lo - b), abs(a_hi - b))
    bound, consts = prop_yuan_bound(model, face, p, ms)
    slack = a_hi - a_lo
    cert.clauses.append(Clause("normalized gap at largest level <= D/log p + slack", _iv(gap), _iv(bound + slack)))
    consts.update({"p": p, "largest_m": m, "slack": slack,
                   "series": [{"m": s[0], "count_lo": s[1], "count_hi": s[2], "valuation": s[3]} for s in series]})
    cert.constants = consts
    return _finish(cert, fail_status="inconclusive")


# ---------------------------------------------------------------------------
# volume checks


def _semigroup_index(model: DiagonalModel, face, p: int, m_max: int) -> tuple[int, bool]:
    flag = find_good_flag(model, face, None, p)
    sample = build_semigroup(model, face, flag, m_max)
    return sample.index(), sample.generates()


def _estimate_slack(rep) -> tuple[float, float]:
    """Interval for the volume estimate widened by the size of the extrapolation correction."""
    lo, hi = rep.estimate_interval
    corr = abs(rep.estimate - rep.raw)
    return max(0.0, lo - corr), hi + corr


def check_brunn_minkowski(L: DiagonalModel, M: DiagonalModel, face, m_range: Sequence[int],
                          p: int = 2, generation_m: int = 6) -> Certificate:
    face = normalize_face(L, face)
    k = len(face) - 1
    ms = sorted(set(m_range))
    if kappa_hat(L, face, ms[-1]) != k:
        raise ValueError("kappa < dim face on the first model")
    S = tensor(L, M)
    cert = Certificate("brunn_minkowski", digest({"L": model_to_json(L), "M": model_to_json(M),
                                                   "face": face, "m": ms, "p": p}))
    parts = {}
    for name, mod in (("L", L), ("M", M), ("L+M", S)):
        rep = volume_estimate(mod, face, ms)
        kap = kappa_hat(mod, face, ms[-1])
        if kap == k:
            idx, gen = _semigroup_index(mod, face, p, generation_m)
        else:
            idx, gen = 0, False
        lo, hi = _estimate_slack(rep)
        parts[name] = {"estimate": rep.estimate, "interval": [lo, hi], "index": idx, "generates": gen}
    e = 1.0 / (k + 1)

    def root(name, which):
        v = parts[name]["interval"][which]
        i = parts[name]["index"] or 0
        return (max(0.0, i * v)) ** e

    rhs_lo = root("L", 0) + root("M", 0)
    rhs_hi = root("L", 1) + root("M", 1)
    lhs_lo, lhs_hi = root("L+M", 0), root("L+M", 1)
    # (|S| avol)^(1/(k+1)) of the sum dominates the sum of the roots
    cert.clauses.append(Clause("sum of roots <= root of sum", _iv(rhs_lo), _iv(lhs_hi)))
    cert.constants = {"parts": parts, "root_sum": [lhs_lo, lhs_hi], "roots_added": [rhs_lo, rhs_hi]}
    cert.witness["index_certified_by_generation"] = all(parts[n]["generates"] for n in parts if parts[n]["index"])
    return _finish(cert)


def continuity_constants(model: DiagonalModel, face, m_max: int = 12) -> tuple[int, float]:
    """(m0, lambda0) from the best strictly small monomial of the lowest nonempty level.

    Twisting by lam with |lam| < lambda0/m0 keeps that section small, which
    sandwiches the twisted series between rescalings of the untwisted one.
    """
    face = normalize_face(model, face)
    for m in range(1, m_max + 1):
        gss = restrict_to_face(model, m, face).hull
        act = gss.active()
        if act:
            lam0 = max(_arch_room(model, gss.monomials[i], m) for i in act)
            return m, lam0
    raise ValueError("no restricted strictly small sections")


def _arch_room(model: DiagonalModel, alpha, m: int) -> float:
    """-log of the archimedean norm of step * x^alpha, the smallest admissible multiple."""
    w = model.weight(INF)
    v = float(w.scaled_value(alpha, m)) if w is not None else 0.0
    return v - math.log(monomial_data(model, tuple(alpha), m).step)


def check_continuity(model: DiagonalModel, face, lam_samples: Sequence, m_range: Sequence[int] = (32, 64)) -> Certificate:
    face = normalize_face(model, face)
    ms = sorted(set(m_range))
    if stable_base_locus_ss(model, ms[-1]).contains_face(face):
        raise ValueError("face lies in the stable base locus")
    m0, lam0 = continuity_constants(model, face)
    base = volume_estimate(model, face, ms)
    k = int(base.kappa)
    e0 = base.e_hat
    lo0, hi0 = _estimate_slack(base)
    cert = Certificate("continuity", digest(_model_inputs(model, face=face, lam=[str(x) for x in lam_samples], m=ms)))
    C = m0 / lam0
    samples = []
    for lam in lam_samples:
        lamf = Fraction(lam)
        if lamf == 0:
            cert.clauses.append(Clause("lambda = 0 reproduces e(0)", _iv(e0), _iv(e0), "=="))
            samples.append({"lambda": str(lamf), "e": e0})
            continue
        tw = twist_infinity(model, lamf)
        if kappa_hat(tw, face, ms[-1]) == NEG_INF:
            samples.append({"lambda": str(lamf), "domain_exit": True})
            cert.witness.setdefault("domain_exit", []).append(str(lamf))
            continue
        x = C * abs(float(lamf))
        if x >= 1:
            samples.append({"lambda": str(lamf), "outside_sandwich_range": True})
            continue
        rep = volume_estimate(tw, face, ms)
        lo, hi = _estimate_slack(rep)
        allowed = max((1 + x) ** (k + 1) - 1, 1 - (1 - x) ** (k + 1)) * e0
        slack = (hi - lo) + (hi0 - lo0)
        change = abs(rep.e_hat - e0)
        cert.clauses.append(Clause(f"|e({lamf}) - e(0)| <= sandwich bound + slack", _iv(change),
                                   _iv(allowed + slack)))
        samples.append({"lambda": str(lamf), "e": rep.e_hat, "interval": [lo, hi], "change": change,
                        "allowed": allowed, "slack": slack})
    cert.constants = {"m0": m0, "lambda0": lam0, "C": C, "kappa": k, "e0": e0, "e0_interval": [lo0, hi0],
                      "samples": samples}
    if not cert.clauses and cert.witness.get("domain_exit"):
        cert.status = "domain-exit"
        return cert
    return _finish(cert)


def check_nef_equality(model: DiagonalModel, face, m_range: Sequence[int], override: bool = False,
                       rel_tol: float = 0.15) -> Certificate:
    face = normalize_face(model, face)
    state = is_nef(model).state
    if state == "not-nef":
        raise ValueError("model is not nef")
    if state != "nef" and not override:
        raise ValueError("nefness undetermined (pass override=True)")
    oracle = float(adeg_diagonal_nef(model, face, override=True))
    rep = volume_estimate(model, face, m_range)
    lo, hi = _estimate_slack(rep)
    tol = rel_tol * abs(oracle)
    cert = Certificate("nef_equality", digest(_model_inputs(model, face=face, m=sorted(set(m_range)))))
    cert.clauses.append(Clause("estimate vs adeg oracle", _iv(rep.estimate), _iv(oracle), "==", tol))
    cert.constants = {"oracle": oracle, "estimate": rep.estimate, "interval": [lo, hi], "nef_state": state,
                      "override": state != "nef"}
    return _finish(cert)


def fujita_lower_bound(model: DiagonalModel, face, m_range: Sequence[int] = (32, 64), grid: int = 64,
                       z_face=None, rel_tol: float = 0.15) -> Certificate:
    face = normalize_face(model, face)
    z = normalize_face(model, z_face) if z_face is not None else face
    if not set(z) <= set(face):
        raise ValueError("Z must lie in Y")
    ms = sorted(set(m_range))
    z_big = not augmented_base_locus(model, ms[-1]).contains_face(z)
    bound, lp = toric_lower_bound(model, face, grid)
    rep = volume_estimate(model, face, ms)
    lo, hi = _estimate_slack(rep)
    cert = Certificate("fujita_lower_bound", digest(_model_inputs(model, face=face, z=z, m=ms, grid=grid)))
    cert.clauses.append(Clause("toric bound <= avol estimate", format_logq(bound), _iv(hi), "<=",
                               rel_tol * max(abs(hi), 1e-12)))
    cert.constants = {"bound": format_logq(bound), "bound_float": float(bound), "lp_status": lp.status,
                      "lp_method": lp.method, "pivots": lp.pivots, "estimate": rep.estimate,
                      "interval": [lo, hi], "gap": rep.estimate - float(bound), "grid": grid}
    cert.witness["z_big"] = z_big
    return _finish(cert)


def check_baselocus_duality(model: DiagonalModel, m_max: int = 10, threshold: float = 1e-9) -> Certificate:
    B = augmented_base_locus(model, m_max)
    cert = Certificate("baselocus_duality", digest(_model_inputs(model, m_max=m_max)))
    rows = []
    ms = sorted({max(1, m_max // 2), m_max})
    for Z in all_faces(model):
        inside = B.contains_face(Z)
        kap = kappa_hat(model, Z, m_max)
        rep = volume_estimate(model, Z, ms, extrapolate=False)
        top = rep.rows[-1].normalized_hi
        vanishing = kap == NEG_INF or kap < len(Z) - 1 or top <= threshold
        rows.append({"face": list(Z), "in_augmented_locus": inside,
                     "kappa": "-inf" if kap == NEG_INF else kap, "estimate_hi": top})
        cert.clauses.append(Clause(f"face {list(Z)}", _exact(int(inside)), _exact(int(vanishing)), "=="))
    cert.constants = {"faces": rows, "locus": [list(c) for c in B.components], "stabilized": B.stabilized}
    return _finish(cert)


def check_w_ample_openness(model: DiagonalModel, m_max: int = 10, lam_cap=1, steps: int = 12) -> Certificate:
    """Find lam_hat > 0 by bisection with every twist |lam| <= lam_hat still w-ample."""
    cert = Certificate("w_ample_openness", digest(_model_inputs(model, m_max=m_max, cap=str(lam_cap))))
    ok, _ = is_w_ample(model, m_max)
    if not ok:
        raise ValueError("model is not w-ample at m_max")
    good, bad = Fraction(0), Fraction(lam_cap)
    if is_w_ample(twist_infinity(model, -bad), m_max)[0]:
        good = bad
    else:
        for _ in range(steps):
            mid = (good + bad) / 2
            if is_w_ample(twist_infinity(model, -mid), m_max)[0]:
                good = mid
            else:
                bad = mid
    probes = [good, good / 2, -good, -good / 2] if good else []
    results = {str(x): is_w_ample(twist_infinity(model, x), m_max)[0] for x in probes}
    cert.clauses.append(Clause("0 < lambda_hat", "0", _exact(good), "<"))
    cert.clauses.append(Clause("twists at +-lambda_hat stay w-ample", _exact(sum(results.values())),
                               _exact(len(probes)), "=="))
    cert.constants = {"lambda_hat": str(good), "probes": results}
    return _finish(cert)
