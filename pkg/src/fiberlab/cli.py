"""``fiberlab`` command line.

Exit codes: 0 pass, 2 a check failed (or a computation errored), 3 only
inconclusive deviations, 64 usage error.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys

from . import __version__
from .curvescan import GridSpec, ScanError, chi_constancy, diagnose_bifurcation, extract_level_set, track_components
from .exactpoly import GaussianRational
from .fibermodel import puncture_heights
from .looplab import (
    CylinderDomain,
    PuncturedPlane,
    complex_limit_loop,
    complex_model_loop,
    cylinder_to_plane,
    homotopy_verdict,
    pushforward_loop,
    sample_model_loop,
    sup_distance,
    winding_number,
)
from .polyparse import ParseError, parse_poly
from .verifysuite import InvalidOverride, UnknownScenario, list_scenarios, run_scenario

EXIT_FAIL = 2
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _names(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def _parse_set(items: list[str]) -> dict:
    out = {}
    for item in items:
        if "=" not in item:
            raise UsageError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k.strip()] = json.loads(v)
        except json.JSONDecodeError:
            out[k.strip()] = v
    return out


def _write_or_print(text: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_list(args) -> int:
    print(json.dumps(list_scenarios(), indent=2, sort_keys=True))
    return 0


def cmd_verify(args) -> int:
    overrides = {}
    if args.overrides:
        with open(args.overrides) as fh:
            overrides.update(json.load(fh))
    overrides.update(_parse_set(args.set or []))
    report = run_scenario(args.scenario, overrides)
    _write_or_print(report.to_json(), args.out)
    for c in report.checks:
        print(f"{c.status:>12}  {c.id}", file=sys.stderr)
    print(f"overall: {report.overall}", file=sys.stderr)
    return report.exit_code


def cmd_scan(args) -> int:
    variables = _names(args.vars)
    p = parse_poly(args.poly, variables)
    box = _floats(args.box)
    if len(box) != 4:
        raise UsageError("--box needs xmin,xmax,ymin,ymax")
    grid = GridSpec(tuple(box), args.res)
    reports = [extract_level_set(p, t, grid, method=args.method) for t in _floats(args.t)]
    doc = {"poly": str(p), "variables": variables, "reports": [r.as_dict() for r in reports]}
    if len(reports) >= 2:
        chi = chi_constancy(reports)
        diag = track_components(reports, args.window)
        doc["chi_constant"] = chi.constant
        doc["chi_first_violation"] = chi.first_violation
        doc["tracking"] = diag.as_dict()
        doc["verdict"] = diagnose_bifurcation(diag, chi)
    with open(f"{args.out_prefix}.json", "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
    with open(f"{args.out_prefix}.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "component", "chain", "x", "y"])
        for r in reports:
            for c in r.components:
                for k, chain in enumerate(c.chains):
                    for x, y in chain:
                        w.writerow([repr(r.t), c.id, k, repr(float(x)), repr(float(y))])
    for r in reports:
        print(f"t={r.t:g}: {r.n_components} components, chi={r.chi}")
    return 0


def cmd_loops(args) -> int:
    lams = _floats(args.lam)
    n = args.samples
    rows = []
    if args.case == "real":
        g, gt = sample_model_loop("gamma", n), sample_model_loop("gamma_tilde", n)
        for lam in lams:
            dom = CylinderDomain(tuple(puncture_heights(lam)))
            v = homotopy_verdict(dom, g, gt)
            wind = {f"{c.real:g}{c.imag:+g}i": [winding_number(cylinder_to_plane(g), c),
                                                 winding_number(cylinder_to_plane(gt), c)]
                    for c in dom.plane().punctures}
            rows.append({"lambda": lam, "puncture_heights": list(dom.heights), "windings": wind,
                         "verdict": v.as_dict()})
    else:
        plane = PuncturedPlane((1, -1))
        for lam in lams:
            row = {"lambda": lam}
            for which in (1, 2):
                lim = complex_limit_loop(which, 1.0, n)
                if lam != 0:
                    row[f"sup_distance_gamma_{which}"] = sup_distance(
                        pushforward_loop(complex_model_loop(which, n), "complex", lam, 1.0), lim)
            rows.append(row)
        mu1 = complex_limit_loop(1, 1.0, n).coordinate(1)
        mu2 = complex_limit_loop(2, 1.0, n).coordinate(1)
        rows.append({"limit_loops": homotopy_verdict(plane, mu1, mu2).as_dict()})
    _write_or_print(json.dumps({"case": args.case, "samples": n, "rows": rows, "version": __version__},
                               indent=2, sort_keys=True), args.out)
    return 0


def _value(text: str, field: str):
    c = parse_poly(text, [], field)
    if not c.is_constant():  # pragma: no cover - no variables are declared
        raise UsageError(f"{text!r} is not a constant")
    return c.constant_value()


def cmd_eval(args) -> int:
    variables = _names(args.vars)
    p = parse_poly(args.poly, variables, args.field)
    vals = [_value(v, args.field) for v in _names(args.at)]
    if len(vals) != len(variables):
        raise UsageError(f"--at needs {len(variables)} values")
    exact = p.evaluate(vals, args.field)
    approx = complex(exact) if isinstance(exact, GaussianRational) else float(exact)
    print(f"{exact}")
    print(f"~ {approx}")
    return 0


def cmd_parse(args) -> int:
    print(parse_poly(args.poly, _names(args.vars), args.field))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="fiberlab", description="Fiber models, loop invariants and curve scans for polynomial maps.")
    ap.add_argument("--version", action="version", version=f"fiberlab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("list", help="list verification scenarios")
    s.set_defaults(fn=cmd_list)

    s = sub.add_parser("verify", help="run a verification scenario")
    s.add_argument("scenario")
    s.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a parameter (JSON value)")
    s.add_argument("--overrides", metavar="FILE", help="JSON file of parameter overrides")
    s.add_argument("--out", metavar="FILE", help="write the JSON report here instead of stdout")
    s.set_defaults(fn=cmd_verify)

    s = sub.add_parser("scan", help="components of p = t inside a box")
    s.add_argument("--poly", required=True)
    s.add_argument("--vars", default="x,y")
    s.add_argument("--t", required=True, help="comma-separated level values")
    s.add_argument("--box", required=True, help="xmin,xmax,ymin,ymax")
    s.add_argument("--res", type=int, default=2048)
    s.add_argument("--method", choices=["sweep", "grid"], default="sweep")
    s.add_argument("--window", type=float, default=0.2, help="inner window fraction for tracking")
    s.add_argument("--out-prefix", required=True)
    s.set_defaults(fn=cmd_scan)

    s = sub.add_parser("loops", help="loop verdicts for the real or complex model")
    s.add_argument("--case", choices=["real", "complex"], required=True)
    s.add_argument("--lambda", dest="lam", required=True, help="comma-separated parameter values")
    s.add_argument("--samples", type=int, default=1024)
    s.add_argument("--out", metavar="FILE")
    s.set_defaults(fn=cmd_loops)

    s = sub.add_parser("eval", help="evaluate a polynomial exactly")
    s.add_argument("--poly", required=True)
    s.add_argument("--vars", required=True)
    s.add_argument("--at", required=True, help="comma-separated values (e.g. 1/2,3)")
    s.add_argument("--field", choices=["real", "complex"], default="real")
    s.set_defaults(fn=cmd_eval)

    s = sub.add_parser("parse", help="print the canonical form of a polynomial")
    s.add_argument("--poly", required=True)
    s.add_argument("--vars", required=True)
    s.add_argument("--field", choices=["real", "complex"], default="real")
    s.set_defaults(fn=cmd_parse)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (UsageError, UnknownScenario, InvalidOverride, ParseError) as exc:
        msg = exc.args[0] if isinstance(exc, UnknownScenario) else str(exc)
        print(f"fiberlab: error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except (ScanError, ValueError, ArithmeticError) as exc:
        print(f"fiberlab: error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
