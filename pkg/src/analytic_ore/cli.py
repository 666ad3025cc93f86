"""Command-line front end.

Every subcommand prints a JSON report on stdout.  With ``--out DIR`` (or the
``ANALYTIC_ORE_OUT`` environment variable) the report and any CSV tables are
also written to ``DIR``.  The exit status is 0 iff every contract checked by
the command holds, 1 if some check failed, 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import re
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .derivation import certify_stability, formal_stability_constant
from .function_model import (
    FunctionModel,
    OrderUndecidable,
    PolynomialModel,
    ZeroDatum,
    find_zeros,
    parse_function_spec,
    sinh_deformation,
    sinh_deformation_zeros,
    taylor_at,
    validate_zero,
)
from .operators import commutator_residual_TV, evaluate_orepoly, jordan_pair, volterra_norms
from .ore import OreAlgebra, verify_main_relation

OUT_ENV = "ANALYTIC_ORE_OUT"
TRIVIAL_DIAGNOSTIC = "h has no zeros: the universal algebra is trivial"

VOLTERRA_BAND = (0.40, 0.60)
VOLTERRA_BAND_RANGE = (20, 40)
VOLTERRA_FLAT_RANGE = (25, 40)
VOLTERRA_FLATNESS = 0.05
TV_GRIDS = (200, 400, 800)


class InputError(ValueError):
    pass


# -- function specs ---------------------------------------------------------

_SINH_DEF = re.compile(r"^\s*sinh_deformation\s*\((.*)\)\s*$")


def parse_h_expression(text: str, window: int = 2) -> tuple[FunctionModel, list[ZeroDatum] | None]:
    """``"y^2"``, ``"z*(z-1)^2"``, ``"1"`` or ``"sinh_deformation(0.5)"``."""
    import sympy

    m = _SINH_DEF.match(text)
    try:
        if m:
            arg = m.group(1).strip()
            try:
                hbar = complex(arg.replace(" ", ""))
            except ValueError:
                hbar = complex(sympy.sympify(arg))
            return sinh_deformation(hbar), sinh_deformation_zeros(hbar, window)
        expr = sympy.sympify(text.replace("^", "**"))
    except (sympy.SympifyError, TypeError, SyntaxError) as exc:
        raise InputError(f"cannot parse h = {text!r}: {exc}") from exc
    free = expr.free_symbols
    if len(free) > 1:
        raise InputError(f"h must be a polynomial in one variable, got {sorted(map(str, free))}")
    if not free:
        return PolynomialModel([complex(expr)]), None
    var = free.pop()
    try:
        poly = sympy.Poly(expr, var)
    except sympy.PolynomialError as exc:
        raise InputError(f"h = {text!r} is not a polynomial: {exc}") from exc
    return PolynomialModel([complex(c) for c in reversed(poly.all_coeffs())]), None


def load_spec(path: str) -> tuple[FunctionModel, list[ZeroDatum] | None]:
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        return parse_function_spec(obj)
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"{path}: invalid function spec: {exc}") from exc


def resolve_function(args) -> tuple[FunctionModel, list[ZeroDatum], list[str]]:
    """Model, its zeros, and warnings raised while locating them."""
    if args.spec:
        h, declared = load_spec(args.spec)
    elif args.h is not None:
        h, declared = parse_h_expression(args.h, args.window)
    else:
        raise InputError("one of --h or --spec is required")
    warnings = []
    if declared is None:
        try:
            zeros = find_zeros(h)
        except ValueError as exc:
            warnings.append(f"zero search failed: {exc}")
            zeros = []
    else:
        zeros = []
        for z in declared:
            try:
                validate_zero(h, z)
                zeros.append(z)
            except OrderUndecidable as exc:
                warnings.append(f"order of declared zero {z.lam} undecidable: {exc}")
                zeros.append(z)
            except ValueError as exc:
                warnings.append(f"declared zero {z.lam} rejected: {exc}")
    return h, zeros, warnings


# -- JSON helpers -------------------------------------------------------------

def _plain(obj):
    """Convert to JSON-native values; complex -> [re, im], non-finite -> string."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_plain(obj.real), _plain(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def dumps(report: dict) -> str:
    # repr-based float output is the shortest string that round-trips exactly.
    return json.dumps(_plain(report), indent=2, allow_nan=False)


# -- suites -------------------------------------------------------------------

def _header(command: str, args, h: FunctionModel) -> dict:
    return {
        "tool": "analytic-ore",
        "version": __version__,
        "command": command,
        "function": h.to_json(),
        "config": {k: v for k, v in sorted(vars(args).items())
                   if k not in ("func", "command") and v is not None},
    }


def analyze(h: FunctionModel, zeros: list[ZeroDatum], warnings: list[str]) -> dict:
    out = {
        "zeros": [z.to_json() for z in zeros],
        "trivial": not zeros,
        "warnings": list(warnings),
    }
    if not zeros:
        out["diagnostic"] = TRIVIAL_DIAGNOSTIC
    return out


def _parse_float_list(text: str | None, default: list[float]) -> list[float]:
    if text is None:
        return default
    return [float(Fraction(t)) for t in text.split(",") if t.strip()]


def stability_suite(h, zeros, args) -> dict:
    certs, formal, skipped = [], [], []
    r_values = _parse_float_list(args.r, [0.5, 1.0, 2.0, 4.0])
    for j, z in enumerate(zeros):
        if z.order == 1:
            formal.append({"zero": z.to_json(),
                           "constants": [formal_stability_constant(h, z, m)
                                         for m in range(args.formal_m + 1)]})
            continue
        s_values = _parse_float_list(args.s, [float(z.s), 1.0])
        for r in r_values:
            for s in s_values:
                if s < float(z.s) * (1 - 1e-12):
                    skipped.append({"zero": z.to_json(), "r": r, "s": s,
                                    "reason": "s below 1/(k-1)"})
                    continue
                cert = certify_stability(h, z, r, s, R=args.R, N=args.N,
                                         trials=args.trials, rng=[args.seed, j])
                certs.append(cert.to_json())
    ok = all(c["dominated"] for c in certs)
    return {"certificates": certs, "formal": formal, "skipped": skipped, "ok": ok}


def ore_suite(h, zeros, args) -> dict:
    tol = args.tol if args.tol is not None else 1e-12
    return verify_main_relation(h, zeros, args.N, args.xdeg, tol)


def volterra_suite(args) -> tuple[dict, list[dict]]:
    rows = volterra_norms(args.grid, args.nmax)
    scaled = {v.n: v.n_factorial_scaled for v in rows}
    band = [scaled[n] for n in range(VOLTERRA_BAND_RANGE[0], VOLTERRA_BAND_RANGE[1] + 1)
            if n in scaled]
    flat = [scaled[n] for n in range(VOLTERRA_FLAT_RANGE[0], VOLTERRA_FLAT_RANGE[1] + 1)
            if n in scaled]
    in_band = all(VOLTERRA_BAND[0] <= v <= VOLTERRA_BAND[1] for v in band)
    variation = (max(flat) - min(flat)) / min(flat) if flat else 0.0
    residuals = [commutator_residual_TV(g) for g in TV_GRIDS]
    monotone = all(a > b for a, b in zip(residuals, residuals[1:]))
    report = {
        "grid": args.grid,
        "n_max": args.nmax,
        "in_band": in_band,
        "flat_variation": variation,
        "flat": variation <= VOLTERRA_FLATNESS,
        "tv_grids": list(TV_GRIDS),
        "tv_residuals": residuals,
        "tv_monotone": monotone,
        "limit_estimate": rows[-1].n_factorial_scaled if rows else None,
        "ok": in_band and variation <= VOLTERRA_FLATNESS and monotone,
    }
    table = [{"n": v.n, "norm": v.norm, "n_factorial_scaled": v.n_factorial_scaled}
             for v in rows]
    return report, table


def jordan_suite(h, zeros, args) -> dict:
    tol = args.tol if args.tol is not None else 1e-10
    dims = [args.dim] if args.dim else [4, 6, 8]
    if args.lam is not None:
        lam = complex(args.lam.replace("i", "j"))
        matches = [j for j, z in enumerate(zeros) if abs(z.lam - lam) < 1e-9 * max(1, abs(lam))]
        targets = [(lam, matches[0] if matches else None)]
    else:
        targets = [(z.lam, j) for j, z in enumerate(zeros)] or [(0j, None)]
    rng = np.random.default_rng([args.seed, 7])
    entries, ok = [], True
    for lam, j in targets:
        is_zero = j is not None or abs(taylor_at(h, lam, 0).coeffs[0]) == 0
        for n in dims:
            rep = jordan_pair(h, lam, n, tol)
            entry = {"lambda": lam, "dim": n, "residual": rep.residual,
                     "trace_obstruction": rep.trace_obstruction, "feasible": rep.feasible}
            consistent = rep.feasible if is_zero else rep.trace_obstruction
            if rep.feasible and j is not None:
                alg = OreAlgebra(h, zeros, max(n, 2))
                worst = 0.0
                for _ in range(args.pairs):
                    P, Q = alg.random_poly(rng, 3), alg.random_poly(rng, 3)
                    lhs = evaluate_orepoly(P * Q, rep, j)
                    rhs = evaluate_orepoly(P, rep, j) @ evaluate_orepoly(Q, rep, j)
                    worst = max(worst, float(np.linalg.norm(lhs - rhs)
                                             / max(1.0, np.linalg.norm(rhs))))
                entry["homomorphism_defect"] = worst
                consistent = consistent and worst <= 1e-8
            entry["ok"] = bool(consistent)
            ok = ok and consistent
            entries.append(entry)
    return {"representations": entries, "ok": ok}


# -- output -------------------------------------------------------------------

def _out_dir(args) -> Path | None:
    target = args.out or os.environ.get(OUT_ENV)
    if not target:
        return None
    path = Path(target)
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_csv(path: Path, rows: list[dict], columns: list[str]):
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns)
        w.writeheader()
        for row in rows:
            w.writerow({c: repr(row[c]) if isinstance(row[c], float) else row[c] for c in columns})


def emit(report: dict, args, tables: dict[str, list[dict]] | None = None) -> int:
    text = dumps(report)
    print(text)
    out = _out_dir(args)
    if out is not None:
        (out / f"{report['command']}.json").write_text(text + "\n")
        for name, rows in (tables or {}).items():
            if rows:
                write_csv(out / f"{name}.csv", rows, list(rows[0]))
    failures = report.get("failures", [])
    for f in failures:
        print(f"FAILED: {f}", file=sys.stderr)
    return 0 if not failures else 1


# -- commands -----------------------------------------------------------------

def cmd_analyze(args) -> int:
    h, zeros, warnings = resolve_function(args)
    report = _header("analyze", args, h)
    report.update(analyze(h, zeros, warnings))
    report["failures"] = []
    return emit(report, args)


def cmd_stability(args) -> int:
    h, zeros, warnings = resolve_function(args)
    report = _header("stability", args, h)
    report.update(analyze(h, zeros, warnings))
    report["stability"] = stability_suite(h, zeros, args)
    report["failures"] = [] if report["stability"]["ok"] else ["stability"]
    return emit(report, args)


def cmd_ore_check(args) -> int:
    h, zeros, warnings = resolve_function(args)
    report = _header("ore-check", args, h)
    report.update(analyze(h, zeros, warnings))
    if not zeros:
        report["failures"] = []
        return emit(report, args)
    report["ore_check"] = ore_suite(h, zeros, args)
    report["failures"] = [] if report["ore_check"]["ok"] else ["ore-check"]
    return emit(report, args)


def cmd_volterra(args) -> int:
    report = {"tool": "analytic-ore", "version": __version__, "command": "volterra",
              "config": {"grid": args.grid, "nmax": args.nmax}}
    report["volterra"], table = volterra_suite(args)
    report["failures"] = [] if report["volterra"]["ok"] else ["volterra"]
    return emit(report, args, {"volterra": table})


def cmd_jordan(args) -> int:
    h, zeros, warnings = resolve_function(args)
    report = _header("jordan", args, h)
    report.update(analyze(h, zeros, warnings))
    report["jordan"] = jordan_suite(h, zeros, args)
    report["failures"] = [] if report["jordan"]["ok"] else ["jordan"]
    return emit(report, args)


SUITES = ("stability", "ore-check", "volterra", "jordan")


def cmd_report(args) -> int:
    selected = [s.strip() for s in args.suites.split(",") if s.strip()]
    unknown = set(selected) - set(SUITES)
    if unknown:
        raise InputError(f"unknown suites {sorted(unknown)}; choose from {', '.join(SUITES)}")
    h, zeros, warnings = resolve_function(args)
    report = _header("report", args, h)
    report.update(analyze(h, zeros, warnings))
    failures, tables = [], {}
    if "stability" in selected:
        report["stability"] = stability_suite(h, zeros, args)
        if not report["stability"]["ok"]:
            failures.append("stability")
    if "ore-check" in selected and zeros:
        report["ore_check"] = ore_suite(h, zeros, args)
        if not report["ore_check"]["ok"]:
            failures.append("ore-check")
    if "volterra" in selected:
        report["volterra"], tables["volterra"] = volterra_suite(args)
        if not report["volterra"]["ok"]:
            failures.append("volterra")
    if "jordan" in selected:
        report["jordan"] = jordan_suite(h, zeros, args)
        if not report["jordan"]["ok"]:
            failures.append("jordan")
    report["failures"] = failures
    return emit(report, args, tables)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--h", help='h as an expression, e.g. "y^2", "z*(z-1)^2", "sinh_deformation(0.5)"')
    src.add_argument("--spec", help="JSON function spec file")
    common.add_argument("--window", type=int, default=2,
                        help="zero window |j| <= WINDOW for sinh_deformation (default 2)")
    common.add_argument("--N", type=int, default=64, help="series order (default 64)")
    common.add_argument("--xdeg", type=int, default=4, help="x-degree for ore-check (default 4)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help=f"output directory (default: ${OUT_ENV})")
    common.add_argument("--tol", type=float, default=None, help="contract tolerance override")

    stab = argparse.ArgumentParser(add_help=False)
    stab.add_argument("--r", help="comma-separated radii (default 0.5,1,2,4)")
    stab.add_argument("--s", help="comma-separated exponents (default s_j,1)")
    stab.add_argument("--R", type=float, default=None, help="Cauchy radius (default 1 for entire h)")
    stab.add_argument("--trials", type=int, default=200)
    stab.add_argument("--formal-m", dest="formal_m", type=int, default=6,
                      help="largest m for formal-family constants at simple zeros")

    vol = argparse.ArgumentParser(add_help=False)
    vol.add_argument("--grid", type=int, default=2000)
    vol.add_argument("--nmax", type=int, default=40)

    jor = argparse.ArgumentParser(add_help=False)
    jor.add_argument("--lambda", dest="lam", help="expansion point (default: every zero)")
    jor.add_argument("--dim", type=int, default=None, help="dimension (default 4,6,8)")
    jor.add_argument("--pairs", type=int, default=50, help="random pairs for the homomorphism check")

    parser = argparse.ArgumentParser(prog="analytic-ore", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="zeros, orders and exponents of h"
                   ).set_defaults(func=cmd_analyze)
    sub.add_parser("stability", parents=[common, stab], help="stability certificates"
                   ).set_defaults(func=cmd_stability)
    sub.add_parser("ore-check", parents=[common], help="verify [x, y] = h(y)"
                   ).set_defaults(func=cmd_ore_check)
    sub.add_parser("volterra", parents=[common, vol], help="n! ||V^n|| study"
                   ).set_defaults(func=cmd_volterra)
    sub.add_parser("jordan", parents=[common, jor], help="Jordan-block representations"
                   ).set_defaults(func=cmd_jordan)
    rep = sub.add_parser("report", parents=[common, stab, vol, jor], help="run several suites")
    rep.add_argument("--suites", default=",".join(SUITES))
    rep.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
