"""Named, reproducible verification scenarios and their JSON reports.

Every scenario is a list of checks.  A check returns a status
(``pass``/``fail``/``inconclusive``) and a metrics map; the report echoes
the parameters and the tolerance table so that a run can be reproduced.
All point clouds come from fixed lattices, so two runs with the same
parameters differ only in the ``elapsed`` fields.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import __version__
from .curvescan import GridSpec, chi_constancy, diagnose_bifurcation, extract_level_set, track_components
from .exactpoly import ExactPoly, GaussianRational, evaluate, identity_witness_check, verify_nonneg_certificate
from .fibermodel import (
    RealScenarioParams,
    XYZL,
    alpha_branches,
    alpha_array,
    case1_fiber_param,
    complex_f,
    complex_fiber_residual,
    complex_map,
    complex_model_cloud,
    fiber_to_model_real_array,
    g_complex,
    gurjar_fiber_sheets,
    gurjar_map,
    h_complex,
    h_complex_array,
    kronecker_lattice,
    particular_f,
    particular_f_certificate,
    puncture_heights,
    real_cloud_to_fibers,
    real_fiber_residual,
    real_map,
    real_model_cloud,
    submersion_sample_report,
)
from .looplab import (
    CylinderDomain,
    PuncturedPlane,
    complex_limit_loop,
    complex_model_loop,
    homotopy_verdict,
    loop_from_function,
    pushforward_loop,
    sample_model_loop,
    straight_line_homotopy_certify,
    sup_distance,
    winding_number,
)
from .polyparse import parse_poly
from .tolerances import FIBER_RESIDUAL, RANK_THRESHOLD, TOLERANCES

EXAMPLE_SPLITTING_POLY = "x + x^2*y"
EXAMPLE_EULER_POLY = ("x^2*y^3*(y^2-25)^2 + 2*x*y*(y^2-25)*(y+25)"
                      " - (y^4 + y^3 - 50*y^2 - 51*y + 575)")

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


class UnknownScenario(KeyError):
    pass


class InvalidOverride(ValueError):
    pass


# -- parameter schema ----------------------------------------------------------

@dataclass(frozen=True)
class Param:
    kind: str  # int | float | floats | box
    default: object
    minimum: float | None = None

    def validate(self, name: str, value):
        if self.kind == "int":
            if isinstance(value, bool) or not isinstance(value, int):
                raise InvalidOverride(f"{name} must be an integer, got {value!r}")
            out = value
        elif self.kind == "float":
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                raise InvalidOverride(f"{name} must be a finite number, got {value!r}")
            out = float(value)
        elif self.kind in ("floats", "box"):
            if not isinstance(value, (list, tuple)) or not value or not all(
                    isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v) for v in value):
                raise InvalidOverride(f"{name} must be a non-empty list of finite numbers, got {value!r}")
            out = [float(v) for v in value]
            if self.kind == "box" and (len(out) != 4 or not (out[0] < out[1] and out[2] < out[3])):
                raise InvalidOverride(f"{name} must be [xmin, xmax, ymin, ymax] with min < max")
        else:  # pragma: no cover
            raise AssertionError(self.kind)
        if self.minimum is not None:
            vals = out if isinstance(out, list) else [out]
            if self.kind != "box" and any(v < self.minimum for v in vals):
                raise InvalidOverride(f"{name} must be >= {self.minimum}, got {value!r}")
        return out


# -- checks and reports --------------------------------------------------------

@dataclass(frozen=True)
class Check:
    id: str
    claim: str
    run: Callable[[dict], tuple]


@dataclass
class CheckRecord:
    id: str
    claim: str
    status: str
    metrics: dict
    elapsed: float

    def as_dict(self) -> dict:
        return {"id": self.id, "claim": self.claim, "status": self.status,
                "metrics": self.metrics, "elapsed": self.elapsed}


@dataclass
class Report:
    scenario: str
    checks: list
    overall: str
    version: str
    parameters: dict
    tolerances: dict = field(default_factory=lambda: dict(TOLERANCES))

    def as_dict(self, include_elapsed: bool = True) -> dict:
        checks = [c.as_dict() for c in self.checks]
        if not include_elapsed:
            for c in checks:
                c.pop("elapsed")
        return {"scenario": self.scenario, "checks": checks, "overall": self.overall,
                "version": self.version, "parameters": self.parameters, "tolerances": self.tolerances}

    def to_json(self, include_elapsed: bool = True) -> str:
        return json.dumps(self.as_dict(include_elapsed), sort_keys=True, indent=2)

    @property
    def exit_code(self) -> int:
        return {PASS: 0, FAIL: 2, INCONCLUSIVE: 3}[self.overall]


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, Fraction):
        return str(v)
    return v if v is None or isinstance(v, str) else str(v)


def _status(ok: bool) -> str:
    return PASS if ok else FAIL


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    params: dict
    checks: tuple

    def listing(self) -> dict:
        return {"name": self.name, "description": self.description,
                "claims": [c.claim for c in self.checks],
                "checks": [c.id for c in self.checks],
                "defaults": {k: p.default for k, p in self.params.items()}}


# -- real fiber model --------------------------------------------------------------

def _real_critical_identity(P):
    F1 = real_map()[0]
    x, y, z, l = ExactPoly.gens(XYZL)
    f4 = particular_f().with_variables(XYZL)
    half = Fraction(1, 2)
    t0 = time.perf_counter()
    # F1 + y/2 = x*x + (y/2)(2 y f - 1), and both generators are the partials of F1
    explicit = identity_witness_check(F1 + y * half, [x, 2 * y * f4 - 1], [x, y * half])
    partials = (F1.diff("x") == 2 * x) and (F1.diff("y") == 2 * y * f4 - 1)
    exact_s = time.perf_counter() - t0
    # on the critical set x = 0, y = 1/(2f) the first component is -y/2 < 0
    L = kronecker_lattice(P["n_sign_samples"], 2)
    zz, ll = -3 + 6 * L[:, 0], -0.5 + L[:, 1]
    fv = particular_f().to_numpy()(zz, ll)
    keep = fv > 1e-9
    yv = 1.0 / (2.0 * fv[keep])
    F1v = F1.to_numpy()(np.zeros_like(yv), yv, zz[keep], ll[keep])
    worst = float(np.max(np.abs(F1v + yv / 2) / np.maximum(1.0, yv)))
    ok = explicit and partials and bool(np.all(F1v < 0)) and worst <= 1e-9
    return _status(ok), {"identity_exact": explicit, "generators_are_partials": partials,
                         "exact_check_seconds_below_1": exact_s < 1.0,
                         "critical_samples": int(keep.sum()), "max_F1_on_critical_set": float(F1v.max()),
                         "max_rel_deviation_from_minus_y_over_2": worst}


def _real_nonneg(P):
    res = verify_nonneg_certificate(particular_f(), particular_f_certificate())
    n_terms = len(particular_f())
    return _status(bool(res)), {"certificate": res.reason, "expanded_terms": n_terms}


def _real_roundtrip(P):
    cloud = real_model_cloud(P["n_points"])
    pts = real_cloud_to_fibers(cloud)
    res = real_fiber_residual(pts, cloud[:, 3])
    back = fiber_to_model_real_array(pts)
    rt = float(np.max(np.abs(back - cloud[:, :3])))
    lam_err = float(np.max(np.abs(pts[:, 3] - cloud[:, 4])))
    # the model never hits a puncture: distance of g(point) from (0, 1, a0)
    a0 = np.where(cloud[:, 4] == 0, 0.0, 1.0 / np.where(cloud[:, 4] == 0, 1.0, cloud[:, 4]))
    clearance = float(np.min(np.sqrt(back[:, 0] ** 2 + (back[:, 1] - 1) ** 2 + (back[:, 2] - a0) ** 2)))
    ok = res.max() <= FIBER_RESIDUAL and rt <= FIBER_RESIDUAL and lam_err == 0 and clearance > 1e-6
    return _status(ok), {"n_points": len(cloud), "max_fiber_residual": float(res.max()),
                         "max_roundtrip_error": rt, "puncture_clearance": clearance}


def _bisection_alpha(theta, a, b, lam, iters=200):
    """Positive root of (cos^2 + sin^2 f(a, lam)) xi^2 - sin(theta) xi - b by bisection."""
    fa = float(particular_f().to_numpy()(a, lam))
    A = np.cos(theta) ** 2 + np.sin(theta) ** 2 * fa
    B = np.sin(theta)
    lo = np.zeros_like(theta)
    hi = np.ones_like(theta)
    q = lambda xi: A * xi * xi - B * xi - b
    while np.any(q(hi) < 0):
        hi = np.where(q(hi) < 0, 2 * hi, hi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        neg = q(mid) < 0
        lo, hi = np.where(neg, mid, lo), np.where(neg, hi, mid)
    return 0.5 * (lo + hi)


def _real_alpha(P):
    cloud = real_model_cloud(P["n_points"])
    worst_agree = 0.0
    for b, lam in [(0.5, -0.5), (1.0, 0.0), (1.0, 0.3), (2.0, 0.5)]:
        plus, conj, lead = alpha_branches(cloud[:, 0], cloud[:, 1], cloud[:, 2], RealScenarioParams(b, lam))
        root = np.sqrt(cloud[:, 1] ** 2 + 4 * b * lead)
        both = (np.abs(lead) > 1e-6) & (np.abs(root - cloud[:, 1]) > 1e-6)
        worst_agree = max(worst_agree, float(np.max(np.abs(plus[both] - conj[both]))))
    degenerate = 0.0
    for b, lam in [(1.0, 0.5), (0.7, 0.0), (1.9, -0.25), (1.3, 0.1)]:
        (a0,) = puncture_heights(lam)
        degenerate = max(degenerate, abs(float(alpha_array(0.0, -1.0, a0, RealScenarioParams(b, lam))) - b))
    n = P["loop_samples"]
    theta = 2 * np.pi * np.arange(n) / n
    oracle_err = 0.0
    for lam in P["alpha_lambdas"]:
        al = alpha_array(np.cos(theta), np.sin(theta), np.ones(n), RealScenarioParams(1.0, lam))
        oracle_err = max(oracle_err, float(np.max(np.abs(al - _bisection_alpha(theta, 1.0, 1.0, lam)))))
    ok = worst_agree <= 1e-9 and degenerate <= 1e-12 and oracle_err <= 1e-10
    return _status(ok), {"max_branch_disagreement": worst_agree, "degenerate_point_error": degenerate,
                         "max_oracle_error": oracle_err, "oracle_samples": n}


def _real_submersion(P):
    cloud = real_model_cloud(P["n_points"])
    pts = real_cloud_to_fibers(cloud)
    rep = submersion_sample_report(real_map(), pts, "real")
    return _status(rep.full_rank), {"min_singular_value": rep.min_singular_value,
                                    "argmin_point": list(rep.argmin_point), "threshold": RANK_THRESHOLD}


def _real_punctures(P):
    expect = {0.5: (2.0,), 0.0: (0.0,), -0.25: (-4.0,)}
    got = {lam: tuple(puncture_heights(lam)) for lam in expect}
    ok = all(got[k] == v for k, v in expect.items())
    return _status(ok), {"puncture_heights": {repr(k): list(v) for k, v in got.items()}}


def _real_convergence(P):
    n, b = P["loop_samples"], P["b"]
    g = sample_model_loop("gamma", n)
    g0 = pushforward_loop(g, "real", 0.0, b)
    d = [sup_distance(pushforward_loop(g, "real", lam, b), g0) for lam in P["convergence_lambdas"]]
    decreasing = all(x > y for x, y in zip(d, d[1:]))
    return _status(decreasing and d[-1] < 1e-3), {"lambdas": P["convergence_lambdas"], "sup_distances": d,
                                                  "strictly_decreasing": decreasing}


def _real_homotopy(P):
    n = P["loop_samples"]
    g, gt = sample_model_loop("gamma", n), sample_model_loop("gamma_tilde", n)
    table, ok = [], True
    for lam in P["equivalent_lambdas"]:
        v = homotopy_verdict(CylinderDomain(tuple(puncture_heights(lam))), g, gt)
        good = v.kind == "Equivalent" and v.margin > P["margin"]
        ok &= good
        table.append({"lambda": lam, "verdict": v.kind, "margin": v.margin})
    v0 = homotopy_verdict(CylinderDomain(tuple(puncture_heights(0.0))), g, gt)
    # punctures of the plane image at l = 0 are the origin and i; the pair at i decides
    pair_i = [v0.values[0][1], v0.values[1][1]] if v0.kind == "Distinct" else None
    ok &= v0.kind == "Distinct" and pair_i == [1, 0]
    slh = straight_line_homotopy_certify(g, gt, CylinderDomain(tuple(puncture_heights(0.0))))
    table.append({"lambda": 0.0, "verdict": v0.kind, "winding_pair_around_i": pair_i,
                  "straight_line_attempt": slh.kind})
    return _status(ok), {"table": table}


# -- complex fiber model -----------------------------------------------------------

def _complex_identity(P):
    f = complex_f()
    t0 = time.perf_counter()
    ok = identity_witness_check(f, [f.diff("x")], [ExactPoly.var(XYZL, "x")])
    el = time.perf_counter() - t0
    return _status(ok and el < 1.0), {"identity_exact": ok, "below_1_second": el < 1.0}


def _gq(a, b):
    return GaussianRational(Fraction(a), Fraction(b))


def _complex_roundtrip(P):
    # exact: g(h(u, v)) == (u, v) and f(h(u, v)) == b over Gaussian rationals
    L = kronecker_lattice(P["n_exact"], 8)
    q = lambda w: Fraction(round(w * 64) - 32, 16)
    f = complex_f()
    exact_ok, tried = True, 0
    for row in L:
        u, v, lam, b = (_gq(q(row[2 * i]), q(row[2 * i + 1])) for i in range(4))
        if lam == 0 or b == 0 or v == 0 or lam * v + 1 == 0:
            continue
        tried += 1
        x, y, z, l = h_complex(u, v, lam, b)
        exact_ok &= g_complex(x, y, z, l) == (u, v)
        exact_ok &= evaluate(f, (x, y, z, l), "complex") == b
    # case lam = 0: x = b / (y^2 - 1)
    case1_ok = True
    for y, z, b in [(_gq(2, 0), _gq(5, 0), _gq(3, 0)), (_gq(0, 1), _gq(1, -1), _gq(1, 2)), (_gq(Fraction(1, 3), 1), 0, _gq(-2, 1))]:
        pt = case1_fiber_param(y, z, b)
        case1_ok &= evaluate(f, pt, "complex") == b
    # float cloud
    u, v, lam, b = complex_model_cloud(P["n_points"])
    pts = h_complex_array(u, v, lam, b)
    res = float(complex_fiber_residual(pts, b).max())
    gu, gv = pts[:, 1], pts[:, 1] ** 2 + pts[:, 3] * pts[:, 2] - 1
    rt = float(max(np.abs(gu - u).max(), np.abs(gv - v).max()))
    ok = exact_ok and case1_ok and tried > 0 and res <= FIBER_RESIDUAL and rt <= FIBER_RESIDUAL
    return _status(ok), {"exact_inputs": tried, "exact_roundtrip": exact_ok, "exact_case_lambda_zero": case1_ok,
                         "n_points": len(u), "max_fiber_residual": res, "max_roundtrip_error": rt}


def _complex_submersion(P):
    u, v, lam, b = complex_model_cloud(P["n_points"])
    rep = submersion_sample_report(complex_map(), h_complex_array(u, v, lam, b), "complex")
    return _status(rep.full_rank), {"min_singular_value": rep.min_singular_value, "threshold": RANK_THRESHOLD}


def _complex_windings(P):
    n = P["loop_samples"]
    vloop = lambda s: loop_from_function(lambda t: np.exp(1j * t) * (np.exp(1j * t) + s), n)
    w_plus, w_minus = winding_number(vloop(2.0), 0), winding_number(vloop(-2.0), 0)
    plane = PuncturedPlane((1, -1))
    mu1 = complex_limit_loop(1, P["b"], n).coordinate(1)
    mu2 = complex_limit_loop(2, P["b"], n).coordinate(1)
    v = homotopy_verdict(plane, mu1, mu2)
    slh = straight_line_homotopy_certify(vloop(2.0), vloop(-2.0), PuncturedPlane((0,)))
    ok = w_plus == w_minus and v.kind == "Distinct" and list(v.values) == [(1, 0), (0, 1)]
    return _status(ok), {"winding_v_loops_around_0": [w_plus, w_minus],
                         "limit_loop_verdict": v.kind, "winding_pairs_around_1_and_minus_1": v.values,
                         "v_loops_straight_line_attempt": slh.kind}


def _complex_convergence(P):
    n, b = P["loop_samples"], P["b"]
    out, ok = {}, True
    for which in (1, 2):
        lim = complex_limit_loop(which, b, n)
        base = complex_model_loop(which, n)
        d = [sup_distance(pushforward_loop(base, "complex", lam, b), lim) for lam in P["convergence_lambdas"]]
        dec = all(x > y for x, y in zip(d, d[1:]))
        ok &= dec and d[-1] < 1e-3
        third = float(np.max(np.abs(pushforward_loop(base, "complex", P["convergence_lambdas"][0], b).samples[:, 2])))
        out[f"gamma_{which}"] = {"sup_distances": d, "strictly_decreasing": dec, "max_abs_z": third}
    out["lambdas"] = P["convergence_lambdas"]
    return _status(ok), out


# -- plane-curve examples -----------------------------------------------------------

def _branch_count_oracle(t: float, box) -> int:
    """Components of ``x + x^2 y = t`` in the box from the closed form ``y = (t - x) / x^2``."""
    x0, x1, y0, y1 = box
    count = 1 if t == 0 and x0 < 0 < x1 else 0
    for lo, hi in ((x0, 0.0), (0.0, x1)):
        if hi <= lo:
            continue
        xs = np.linspace(lo, hi, 400_001)[1:-1]
        y = (t - xs) / xs ** 2
        inside = (y > y0) & (y < y1)
        count += int(np.sum(np.diff(np.concatenate([[0], inside.astype(int)])) == 1))
    return count


def _grid(P, box_key="box"):
    return GridSpec(tuple(P[box_key]), P["resolution"])


def _split_counts(P):
    p = parse_poly(EXAMPLE_SPLITTING_POLY, ["x", "y"])
    grid = _grid(P)
    reps = [extract_level_set(p, t, grid) for t in P["t_values"]]
    counts = [r.n_components for r in reps]
    oracle = [_branch_count_oracle(t, grid.box) for t in P["t_values"]]
    chis = [r.chi for r in reps]
    chi = chi_constancy(reps) if len(reps) >= 2 else None
    ok = counts == oracle and chis == counts
    m = {"t_values": P["t_values"], "component_counts": counts, "closed_form_counts": oracle, "chi": chis}
    if chi is not None:
        m["chi_constant"] = chi.constant
        m["chi_first_violation"] = chi.first_violation
    return _status(ok), m


def _split_grid_crosscheck(P):
    p = parse_poly(EXAMPLE_SPLITTING_POLY, ["x", "y"])
    grid = _grid(P)
    sweep = [extract_level_set(p, t, grid).n_components for t in P["t_values"]]
    march = [extract_level_set(p, t, grid, method="grid").n_components for t in P["t_values"]]
    return _status(sweep == march), {"sweep_counts": sweep, "marching_squares_counts": march}


def _split_tracking(P):
    p = parse_poly(EXAMPLE_SPLITTING_POLY, ["x", "y"])
    grid = _grid(P)
    reps = [extract_level_set(p, t, grid) for t in P["track_values"]]
    diag = track_components(reps, P["window_fraction"])
    chi_reps = [extract_level_set(p, t, grid) for t in P["chi_values"]]
    verdict = diagnose_bifurcation(diag, chi_constancy(chi_reps))
    ok = len(diag.splitting) >= 1 and verdict["verdict"] == "NOT-TRIVIAL-EVIDENCE"
    return _status(ok), {"track_values": P["track_values"], "diagnosis": diag.as_dict(),
                         "chi_values_t": P["chi_values"], "chi": [r.chi for r in chi_reps], "verdict": verdict}


def _euler_counts(P):
    p = parse_poly(EXAMPLE_EULER_POLY, ["x", "y"])
    grid = _grid(P)
    reps = [extract_level_set(p, t, grid) for t in P["t_values"]]
    counts = [r.n_components for r in reps]
    arcs = [sum(c.kind == "BoundaryArc" for c in r.components) for r in reps]
    chi = chi_constancy(reps) if len(reps) >= 2 else None
    ok = all(c == 5 for c in counts) and all(a == 5 for a in arcs) and (chi is None or chi.constant)
    m = {"t_values": P["t_values"], "component_counts": counts, "boundary_arcs": arcs,
         "chi": [r.chi for r in reps], "n_terms": len(p), "degree": p.degree}
    if chi is not None:
        m["chi_constant"] = chi.constant
    return _status(ok), m


def _euler_discriminant(P):
    """Discriminant in x of p - t factors as 4 y^2 (y-5)^2 (y+5)^2 [(y+1)(y^2-25)^2 + t y]."""
    y, t = ExactPoly.gens(("y", "t"))
    a = y ** 3 * (y ** 2 - 25) ** 2
    b = 2 * y * (y ** 2 - 25) * (y + 25)
    c = -(y ** 4 + y ** 3 - 50 * y ** 2 - 51 * y + 575) - t
    disc = b * b - 4 * a * c
    claimed = 4 * y ** 2 * (y - 5) ** 2 * (y + 5) ** 2 * ((y + 1) * (y ** 2 - 25) ** 2 + t * y)
    # the coefficients above are those of the parsed polynomial
    p = parse_poly(EXAMPLE_EULER_POLY, ["x", "y"])
    lift = lambda q: q.with_variables(("x", "y", "t"))
    X = ExactPoly.var(("x", "y", "t"), "x")
    same = lift(p) == X ** 2 * lift(a) + X * lift(b) + lift(c) + ExactPoly.var(("x", "y", "t"), "t")
    return _status(disc == claimed and same), {"factorization_exact": disc == claimed, "coefficients_match": same}


def _euler_tracking(P):
    p = parse_poly(EXAMPLE_EULER_POLY, ["x", "y"])
    grid = _grid(P)
    reps = [extract_level_set(p, t, grid) for t in P["track_values"]]
    diag = track_components(reps, P["window_fraction"])
    chi_reps = [extract_level_set(p, t, grid) for t in P["t_values"]]
    verdict = diagnose_bifurcation(diag, chi_constancy(chi_reps) if len(chi_reps) > 1 else True)
    nv, ns = len(diag.vanishing), len(diag.splitting)
    ok = nv >= 1 and ns >= 1 and verdict["verdict"] == "NOT-TRIVIAL-EVIDENCE"
    return _status(ok), {"track_values": P["track_values"], "n_vanishing": nv, "n_splitting": ns,
                         "target_counts": [2, 2], "matches_target_counts": [nv, ns] == [2, 2],
                         "diagnosis": diag.as_dict(), "verdict": verdict}


# -- the example with two-sheeted fibers ------------------------------------------------

def _gurjar_sheets(P):
    n = P["n_y"]
    L = kronecker_lattice(n, 2)
    ys = (L[:, 0] - 0.5) * 4 + 1j * (L[:, 1] - 0.5) * 4
    worst, rows = 0.0, []
    for x0 in P["x0_values"]:
        for tv in P["t_values"]:
            s = gurjar_fiber_sheets(complex(x0), complex(tv))
            r = s.residual(ys)
            worst = max(worst, r)
            rows.append({"x0": x0, "t": tv, "sheets": len(s.roots), "residual": r,
                         "sheet_gap": abs(s.roots[0] - s.roots[1])})
    ok = worst <= FIBER_RESIDUAL and all(r["sheets"] == 2 and r["sheet_gap"] > 0 for r in rows)
    return _status(ok), {"fibers": rows, "max_residual": worst}


def _gurjar_discriminant(P):
    worst = 0.0
    for x0 in P["x0_values"]:
        for tv in P["t_values"]:
            s = gurjar_fiber_sheets(complex(x0), complex(tv))
            A = complex(x0) * (complex(x0) - 1)
            brute = np.sort_complex(np.roots([A, 1, -(1 + complex(tv))]))
            mine = np.sort_complex(np.array(s.roots))
            worst = max(worst, float(np.max(np.abs(brute - mine))),
                        abs(s.discriminant - (1 + 4 * A * (1 + complex(tv)))))
    return _status(worst <= 1e-9), {"max_root_disagreement": worst}


def _gurjar_degenerate(P):
    z = gurjar_fiber_sheets(0, 0.1)
    one = gurjar_fiber_sheets(1, 0.1)
    F = gurjar_map()
    fx = str(F[0])
    ok = z.degenerate is not None and one.degenerate is not None and fx == "x"
    return _status(ok), {"x0_zero": z.degenerate, "x0_one": one.degenerate, "first_component": fx}


# -- restriction to the slice ------------------------------------------------------------

def _restriction_real(P):
    cloud = real_model_cloud(P["n_points"], b_range=(1.0, 1.0))
    pts = real_cloud_to_fibers(cloud)
    on_M = float(real_fiber_residual(pts, 1.0).max())
    # F restricted to M is the last coordinate; its fiber over lam is F^{-1}(1, lam)
    same = bool(np.all(pts[:, 3] == cloud[:, 4]))
    g, gt = sample_model_loop("gamma", P["loop_samples"]), sample_model_loop("gamma_tilde", P["loop_samples"])
    kinds = {repr(lam): homotopy_verdict(CylinderDomain(tuple(puncture_heights(lam))), g, gt).kind
             for lam in (-0.5, 0.0, 0.5)}
    ok = on_M <= FIBER_RESIDUAL and same and kinds == {"-0.5": "Equivalent", "0.0": "Distinct", "0.5": "Equivalent"}
    return _status(ok), {"max_residual_on_slice": on_M, "restricted_value_is_lambda": same,
                         "rerun_real_verdicts": kinds, "rerun_of": ["real-homotopy-table"]}


def _restriction_complex(P):
    u, v, lam, _ = complex_model_cloud(P["n_points"])
    pts = h_complex_array(u, v, lam, 1.0)
    on_M = float(complex_fiber_residual(pts, 1.0).max())
    same = bool(np.all(pts[:, 3] == lam))
    mu1 = complex_limit_loop(1, 1.0, P["loop_samples"]).coordinate(1)
    mu2 = complex_limit_loop(2, 1.0, P["loop_samples"]).coordinate(1)
    v = homotopy_verdict(PuncturedPlane((1, -1)), mu1, mu2)
    ok = on_M <= FIBER_RESIDUAL and same and v.kind == "Distinct"
    return _status(ok), {"max_residual_on_slice": on_M, "restricted_value_is_lambda": same,
                         "rerun_limit_loop_verdict": v.kind, "rerun_of": ["complex-winding-table"]}


# -- registry -------------------------------------------------------------------------------

_N = Param("int", 10_000, 16)
_LOOPS = Param("int", 1024, 16)
_CONV = Param("floats", [1e-1, 1e-2, 1e-3, 1e-4], 0.0)

REGISTRY: dict[str, Scenario] = {}


def _register(s: Scenario):
    REGISTRY[s.name] = s


_register(Scenario(
    "real-theorem",
    "Real map (x^2 - y + y^2 f(z, l), l) with f = (z^2 + l^2)(l z - 1)^2: regular fibers over "
    "U = ]0, inf[ x R that are all cylinders with punctures, yet not locally trivial at (1, 0).",
    {"n_points": _N, "loop_samples": _LOOPS, "n_sign_samples": Param("int", 1000, 1),
     "alpha_lambdas": Param("floats", [0.3, 0.0, -0.4]), "convergence_lambdas": _CONV,
     "equivalent_lambdas": Param("floats", [-0.5, -0.1, 0.1, 0.5]), "margin": Param("float", 0.1, 0.0),
     "b": Param("float", 1.0, 1e-6)},
    (
        Check("real-critical-identity", "real map: F1 + y/2 = x*x + (y/2)(2yf - 1), so critical values have F1 < 0 and miss U", _real_critical_identity),
        Check("real-f-nonneg", "real map: f = (z^2 + l^2)(l z - 1)^2 is nonnegative (certificate)", _real_nonneg),
        Check("real-model-roundtrip", "real map: the cylinder model maps onto the fiber and back (a diffeomorphism)", _real_roundtrip),
        Check("real-alpha-branches", "real map: both closed forms of the scaling root agree; root is b at the degenerate point; matches bisection", _real_alpha),
        Check("real-submersion", "real map: F is a submersion on the sampled fibers over U", _real_submersion),
        Check("real-puncture-heights", "real map: the removed point sits at height 1/l (0 when l = 0)", _real_punctures),
        Check("real-uniform-convergence", "real map: fiber loops converge uniformly as l -> 0", _real_convergence),
        Check("real-homotopy-table", "real map: gamma ~ gamma-tilde for l != 0, not homotopic in K_0", _real_homotopy),
    )))

_register(Scenario(
    "complex-theorem",
    "Complex map (x(y^2 + l z - 1)(l y^2 + l^2 z - l + 1), l): regular fibers near (1, 0) with "
    "an explicit parametrization, and two loops whose limits separate at l = 0.",
    {"n_points": _N, "n_exact": Param("int", 200, 1), "loop_samples": _LOOPS,
     "convergence_lambdas": _CONV, "b": Param("float", 1.0, 1e-6)},
    (
        Check("complex-euler-identity", "complex map: f = x * df/dx, so critical points lie in f = 0", _complex_identity),
        Check("complex-model-roundtrip", "complex map: g o h = id on the fiber, in both cases l != 0 and l = 0", _complex_roundtrip),
        Check("complex-submersion", "complex map: F is a submersion on the sampled fibers near (1, 0)", _complex_submersion),
        Check("complex-winding-table", "complex map: limit loops have equal winding around 0 but differ in C minus {1, -1}", _complex_windings),
        Check("complex-uniform-convergence", "complex map: loops gamma_{1,l}, gamma_{2,l} converge to their closed-form limits", _complex_convergence),
    )))

_register(Scenario(
    "example-splitting",
    "Plane curve x + x^2 y = t: Euler characteristic jumps at t = 0 and a fiber component splits at infinity.",
    {"t_values": Param("floats", [-0.5, 0.0, 0.5]), "track_values": Param("floats", [0.5, 0.1, 0.01]),
     "chi_values": Param("floats", [-0.5, 0.0, 0.5]), "box": Param("box", [-20.0, 20.0, -20.0, 20.0]),
     "resolution": Param("int", 2048, 64), "window_fraction": Param("float", 0.2, 0.01)},
    (
        Check("splitting-counts", "x + x^2 y: component counts match the closed-form branch count", _split_counts),
        Check("splitting-grid-crosscheck", "x + x^2 y: marching squares agrees with the exact sweep", _split_grid_crosscheck),
        Check("splitting-tracking", "x + x^2 y: a component splits at infinity as t -> 0+, chi is not constant", _split_tracking),
    )))

_register(Scenario(
    "example-euler-constant",
    "Degree-9 plane curve with five non-compact components for small |t| != 0: chi constant, yet "
    "components vanish and split at infinity as t -> 0.",
    {"t_values": Param("floats", [-0.05, 0.05]), "track_values": Param("floats", [-0.1, -0.01, -0.001]),
     "box": Param("box", [-60.0, 60.0, -60.0, 60.0]), "resolution": Param("int", 2048, 64),
     "window_fraction": Param("float", 0.2, 0.01)},
    (
        Check("euler-counts", "degree-9 curve: five non-compact components, chi = 5 constant", _euler_counts),
        Check("euler-discriminant", "degree-9 curve: x-discriminant vanishes doubly at y = 0, 5, -5 for every t", _euler_discriminant),
        Check("euler-tracking", "degree-9 curve: two components split and two vanish at infinity as t -> 0-", _euler_tracking),
    )))

_register(Scenario(
    "gurjar-fibers",
    "Map (x, [(x - 1) w + 1][x w - 1]) with w = x z + y^2: nearby fibers are two disjoint copies of C.",
    {"x0_values": Param("floats", [0.05, -0.08, 0.1]), "t_values": Param("floats", [0.0, 0.05, -0.03]),
     "n_y": Param("int", 100, 1)},
    (
        Check("gurjar-two-sheets", "two-sheet example: each fiber near (0, 0) is two copies of C", _gurjar_sheets),
        Check("gurjar-discriminant", "two-sheet example: stable quadratic roots match brute-force root finding", _gurjar_discriminant),
        Check("gurjar-degenerate", "two-sheet example: x0 = 0 and x0 = 1 are reported as degenerate", _gurjar_degenerate),
    )))

_register(Scenario(
    "restriction-remarks",
    "Restriction of each map to M = F^{-1}({1} x K): the restricted function is the last coordinate, "
    "its fibers are those of F, and the loop verdicts carry over unchanged.",
    {"n_points": Param("int", 2000, 16), "loop_samples": _LOOPS},
    (
        Check("restriction-real", "restriction to M: real fibers coincide and the real verdicts are unchanged", _restriction_real),
        Check("restriction-complex", "restriction to M: complex fibers coincide and the limit-loop verdict is unchanged", _restriction_complex),
    )))


def list_scenarios() -> list[dict]:
    return [REGISTRY[k].listing() for k in REGISTRY]


def resolve_parameters(name: str, overrides: dict | None = None) -> dict:
    if name not in REGISTRY:
        raise UnknownScenario(f"unknown scenario {name!r}; known: {', '.join(REGISTRY)}")
    sc = REGISTRY[name]
    params = {k: p.default for k, p in sc.params.items()}
    for k, v in (overrides or {}).items():
        if k not in sc.params:
            raise InvalidOverride(f"scenario {name!r} has no parameter {k!r}")
        params[k] = sc.params[k].validate(k, v)
    return params


def run_scenario(name: str, overrides: dict | None = None) -> Report:
    params = resolve_parameters(name, overrides)
    records = []
    for check in REGISTRY[name].checks:
        t0 = time.perf_counter()
        try:
            status, metrics = check.run(params)
        except Exception as exc:  # a crashing check is a failed check, with the reason kept
            status, metrics = FAIL, {"error": f"{type(exc).__name__}: {exc}"}
        records.append(CheckRecord(check.id, check.claim, status, _jsonable(metrics),
                                   round(time.perf_counter() - t0, 6)))
    statuses = [r.status for r in records]
    overall = PASS if all(s == PASS for s in statuses) else FAIL if FAIL in statuses else INCONCLUSIVE
    return Report(name, records, overall, __version__, _jsonable(params))
