"""
Command line front end.

    blowup-lab profile --family blowup4d --C 1 --T 1 --kappa 1 --alpha 1 --output y.csv
    blowup-lab verify --output report.json
    blowup-lab lane-emden --n 1
    blowup-lab scale-factor --lambda 1 --dim 3 --t-max 2 --output a.csv
    blowup-lab sweep --C 0.5 1 2 --alpha 1 2 --output sweep.csv

Exit status: 0 pass, 1 verification failure, 2 config error,
3 numerical failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .emden import DEFAULT_TOL, DEFAULT_ZERO_TOL, integrate_profile, integrate_scale_factor
from .errors import BlowupLabError, ConfigError, NumericalError
from .families import (BALANCED_NUMERATOR, PRINTED_NUMERATOR, Family, StationaryStar,
                       build_blowup_solution, lane_emden_analytic, lane_emden_problem,
                       profile_coefficient)
from .model import ForceSign, ModelParams
from . import verify

log = logging.getLogger("blowup_lab")

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3, 4
THREADS_ENV = "BLOWUP_LAB_THREADS"

COEFFICIENT_NOTE = (
    "profile ODE: y'' + (3/z) y' + s*alpha(4)/(5*C*kappa) * y^4 = 0; the factor 5 "
    "(= 4*theta) is the one for which the momentum balance closes. The variant "
    "alpha(4)/(kappa*C) without the 5 does not satisfy the momentum equation.")

INJECTIONS = {"coefficient=4Ckappa": 4.0}


class _Fail(Exception):
    def __init__(self, status, message):
        super().__init__(message)
        self.status = status


def fmt(x) -> str:
    """17 significant digits, locale independent."""
    return format(float(x), ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2) + "\n"


def dumps_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def write_text(path, text: str) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot write {path}: {exc}") from exc


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


# ----------------------------------------------------------------------------
# configuration

def _positive(name, value):
    if not (value > 0 and math.isfinite(value)):
        raise ConfigError(f"--{name} must be a finite number > 0, got {value}")
    return value


def params_from_args(args, family: str | None = None, **override) -> ModelParams:
    family = family or getattr(args, "family", "blowup4d")
    repulsive = getattr(args, "repulsive", False) or family == Family.REPULSIVE4D.value
    big_c = override.get("big_c", args.C)
    if big_c is None:
        big_c = -1.0 if family == Family.GLOBAL4D.value else 1.0
    if family == Family.BLOWUP4D.value and not repulsive and big_c <= 0:
        raise ConfigError("family blowup4d needs C > 0")
    if family == Family.GLOBAL4D.value and big_c >= 0:
        raise ConfigError("family global4d needs C < 0")
    return ModelParams(
        kappa=override.get("kappa", args.kappa), big_c=big_c,
        big_t=override.get("big_t", args.T), alpha0=override.get("alpha0", args.alpha),
        force_sign=ForceSign.REPULSIVE if repulsive else ForceSign.ATTRACTIVE)


def params_dict(p: ModelParams) -> dict:
    return {"dim": p.dim, "theta": p.theta, "kappa": p.kappa, "C": p.big_c, "T": p.big_t,
            "alpha": p.alpha0, "force_sign": p.force_sign.value,
            "profile_coefficient": profile_coefficient(p)}


def _check_common(args):
    _positive("tol", args.tol)
    if hasattr(args, "zero_tol"):
        _positive("zero-tol", args.zero_tol)
    if hasattr(args, "quad_points"):
        if args.quad_points < 2 or args.quad_points % 2:
            raise ConfigError("--quad-points must be an even integer >= 2")


# ----------------------------------------------------------------------------
# commands

def _profile_payload(profile, meta, args):
    rows = zip(profile.grid, profile.y_values, profile.dy_values)
    if args.format == "json":
        meta = dict(meta, z=profile.grid, y=profile.y_values, dy=profile.dy_values)
        write_text(args.output, dumps_json(meta))
    else:
        write_text(args.output, dumps_csv(["z", "y", "dy"], rows))
        if args.output not in (None, "-"):
            write_text(sidecar_path(args.output), dumps_json(meta))


def cmd_profile(args) -> int:
    _check_common(args)
    tolerances = {"tol": args.tol, "zero_tol": args.zero_tol}
    if args.family == "lane-emden":
        z_max = _positive("z-max", args.z_max if args.z_max is not None else 10.0)
        profile = integrate_profile(lane_emden_problem(args.n, z_max), args.tol,
                                    zero_tol=args.zero_tol)
        meta = {"family": "lane-emden", "n": args.n, "first_zero": profile.first_zero,
                "z_end": profile.z_end, "stop_reason": profile.stop_reason,
                "tolerances": tolerances}
    else:
        params = params_from_args(args)
        z_max = None if args.z_max is None else _positive("z-max", args.z_max)
        sol = build_blowup_solution(params, args.tol, z_max=z_max)
        profile = sol.profile
        meta = {"family": sol.family.value, "params": params_dict(params),
                "coefficient_note": COEFFICIENT_NOTE, "first_zero": profile.first_zero,
                "support": profile.support, "z_end": profile.z_end,
                "stop_reason": profile.stop_reason, "blowup_time": params.blowup_time,
                "tolerances": tolerances}
    _profile_payload(profile, meta, args)
    return EXIT_OK


def _parse_injection(name):
    if name is None:
        return None
    if name not in INJECTIONS:
        raise ConfigError(f"unknown --inject-error {name!r}; known: {sorted(INJECTIONS)}")
    return INJECTIONS[name]


def cmd_verify(args) -> int:
    _check_common(args)
    params = params_from_args(args)
    factor = _parse_injection(args.inject_error)
    coefficient = None if factor is None else factor * params.big_c * params.kappa
    star = None
    if args.stationary:
        numerator = BALANCED_NUMERATOR if args.star_normalization == "balanced" \
            else PRINTED_NUMERATOR
        star = StationaryStar(_positive("K", args.K), args.A, numerator=numerator)
    if args.random_samples < 0:
        raise ConfigError("--random-samples must be >= 0")

    sol = build_blowup_solution(params, args.tol)
    extra_z = None
    if args.random_samples:
        rng = np.random.default_rng(args.seed)
        extra_z = sol.support * rng.uniform(0.01, 0.99, size=args.random_samples)
    checks = verify.run_suite(sol, quad_points=args.quad_points, coefficient=coefficient,
                              star=star, extra_z=extra_z)
    passed = all(c["passed"] for c in checks)
    report = {
        "tool": "blowup-lab",
        "version": __version__,
        "coefficient_note": COEFFICIENT_NOTE,
        "family": sol.family.value,
        "params": params_dict(params),
        "blowup_time": params.blowup_time,
        "profile": {"support": sol.support, "first_zero": sol.profile.first_zero,
                    "z_end": sol.profile.z_end, "stop_reason": sol.profile.stop_reason,
                    "nodes": len(sol.profile.grid)},
        "settings": {"tol": args.tol, "quad_points": args.quad_points,
                     "q_quad_points": verify.Q_QUAD_POINTS, "seed": args.seed,
                     "random_samples": args.random_samples,
                     "inject_error": args.inject_error},
        "stationary": None if star is None else {
            "K": star.big_k, "A": star.big_a, "normalization": args.star_normalization,
            "central_density": star.central_density},
        "checks": checks,
        "passed": passed,
    }
    write_text(args.output, dumps_json(report))
    for c in checks:
        log.info("%-12s %s max_rel=%.3e", c["name"], "PASS" if c["passed"] else "FAIL",
                 c["max_rel"])
    return EXIT_OK if passed else EXIT_FAILED


def cmd_lane_emden(args) -> int:
    _check_common(args)
    z_max = _positive("z-max", args.z_max)
    profile = integrate_profile(lane_emden_problem(args.n, z_max), args.tol,
                                zero_tol=args.zero_tol)
    summary = {"n": args.n, "first_zero": profile.first_zero, "z_end": profile.z_end,
               "stop_reason": profile.stop_reason, "nodes": len(profile.grid)}
    if args.n in (0, 1, 5):
        exact = lane_emden_analytic(int(args.n), profile.grid)
        summary["max_error_vs_closed_form"] = float(np.max(np.abs(profile.y_values - exact)))
        summary["closed_form_zero"] = {0: math.sqrt(6.0), 1: math.pi, 5: None}[int(args.n)]
    if args.format == "csv":
        header = ["z", "y", "dy"]
        cols = [profile.grid, profile.y_values, profile.dy_values]
        if args.n in (0, 1, 5):
            header.append("y_closed_form")
            cols.append(lane_emden_analytic(int(args.n), profile.grid))
        write_text(args.output, dumps_csv(header, zip(*cols)))
        if args.output not in (None, "-"):
            write_text(sidecar_path(args.output), dumps_json(summary))
    else:
        write_text(args.output, dumps_json(summary))
    return EXIT_OK


def cmd_scale_factor(args) -> int:
    _check_common(args)
    state = integrate_scale_factor(args.lam, args.dim, _positive("a0", args.a0), args.a1,
                                   _positive("t-max", args.t_max), args.tol)
    summary = {"lambda": args.lam, "dim": args.dim, "a0": args.a0, "a1": args.a1,
               "t_max": args.t_max, "t_end": float(state.t_grid[-1]),
               "collapsed": state.collapse_bracket is not None,
               "collapse_bracket": state.collapse_bracket,
               "energy_drift": state.energy_drift, "tol": args.tol}
    if state.collapse_bracket is not None:
        # the last approach to the floor is dominated by cancellation in E
        summary["energy_drift_to_0.9_collapse"] = state.energy_drift_until(
            0.9 * state.collapse_bracket[0])
    if args.format == "csv":
        rows = zip(state.t_grid, state.a_values, state.da_values)
        write_text(args.output, dumps_csv(["t", "a", "da"], rows))
        if args.output not in (None, "-"):
            write_text(sidecar_path(args.output), dumps_json(summary))
    else:
        write_text(args.output, dumps_json(dict(
            summary, t=state.t_grid, a=state.a_values, da=state.da_values)))
    return EXIT_OK


SWEEP_COLUMNS = ["C", "T", "kappa", "alpha", "family", "support", "first_zero", "blowup_time",
                 "blowup_rate", "continuity_max_rel", "momentum_max_rel", "q_max_rel", "error"]


def _sweep_row(params: ModelParams, tol: float, quad_points: int) -> list:
    row = [params.big_c, params.big_t, params.kappa, params.alpha0]
    try:
        sol = build_blowup_solution(params, tol)
        rate = verify.blowup_rate_check(sol, [0.0]).values[0]
        cont = verify.continuity_residual(sol).max_rel
        mom = verify.momentum_residual(sol, quad_points=quad_points,
                                       convergence_points=None).max_rel
        q = verify.q_identity_check(sol.profile, params, quad_points=verify.Q_QUAD_POINTS).max_rel
        first_zero = "" if sol.profile.first_zero is None else sol.profile.first_zero
        blowup = "" if params.blowup_time is None else params.blowup_time
        return row + [sol.family.value, sol.support, first_zero, blowup, rate, cont, mom, q, ""]
    except BlowupLabError as exc:
        return row + ["", "", "", "", "", "", "", "", f"{type(exc).__name__}: {exc}"]


def cmd_sweep(args) -> int:
    _check_common(args)
    lists = {"C": args.C, "T": args.T, "kappa": args.kappa, "alpha": args.alpha}
    for name, values in lists.items():
        if not values:
            raise ConfigError(f"--{name} parameter list is empty")
    combos = []
    for c, t, k, a in itertools.product(*(sorted(set(v)) for v in lists.values())):
        combos.append(ModelParams(big_c=c, big_t=t, kappa=k, alpha0=a,
                                  force_sign=ForceSign.REPULSIVE if args.repulsive
                                  else ForceSign.ATTRACTIVE))
    threads = _thread_cap()
    with ThreadPoolExecutor(max_workers=threads) as pool:
        rows = list(pool.map(lambda p: _sweep_row(p, args.tol, args.quad_points), combos))
    if args.format == "json":
        write_text(args.output, dumps_json(
            {"columns": SWEEP_COLUMNS, "coefficient_note": COEFFICIENT_NOTE,
             "rows": [dict(zip(SWEEP_COLUMNS, r)) for r in rows]}))
    else:
        write_text(args.output, dumps_csv(SWEEP_COLUMNS, rows))
    return EXIT_OK


def _thread_cap() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if value < 1:
        raise ConfigError(f"{THREADS_ENV} must be >= 1")
    return value


# ----------------------------------------------------------------------------
# parser

def _add_params(p, sweep=False):
    nargs = "*" if sweep else None
    p.add_argument("--C", type=float, nargs=nargs, default=[1.0] if sweep else None,
                   help="similarity speed C (default 1, or -1 for global4d)")
    p.add_argument("--T", type=float, nargs=nargs, default=[1.0] if sweep else 1.0)
    p.add_argument("--kappa", type=float, nargs=nargs, default=[1.0] if sweep else 1.0)
    p.add_argument("--alpha", type=float, nargs=nargs, default=[1.0] if sweep else 1.0,
                   help="central value y(0)")
    p.add_argument("--repulsive", action="store_true", help="sign-flipped force")


def _add_common(p, quad=True, fmt_default="json"):
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--zero-tol", type=float, default=DEFAULT_ZERO_TOL)
    if quad:
        p.add_argument("--quad-points", type=int, default=1024)
    p.add_argument("--output", "-o", default=None, help="output path ('-' or omitted: stdout)")
    p.add_argument("--format", choices=["csv", "json"], default=fmt_default)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blowup-lab", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="integrate and write a similarity profile")
    p.add_argument("--family", default="blowup4d",
                   choices=[f.value for f in Family] + ["lane-emden"])
    p.add_argument("--n", type=float, default=1.0, help="Lane-Emden index")
    p.add_argument("--z-max", type=float, default=None)
    _add_params(p)
    _add_common(p, quad=False, fmt_default="csv")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("verify", help="run the residual verification suite")
    p.add_argument("--family", default="blowup4d", choices=[f.value for f in Family])
    _add_params(p)
    _add_common(p)
    p.add_argument("--inject-error", default=None, help="negative control, e.g. coefficient=4Ckappa")
    p.add_argument("--stationary", action="store_true", help="add the gamma=6/5 hydrostatic check")
    p.add_argument("--K", type=float, default=2 * math.pi / 3)
    p.add_argument("--A", type=float, default=1.0)
    p.add_argument("--star-normalization", choices=["printed", "balanced"], default="printed")
    p.add_argument("--random-samples", type=int, default=0,
                   help="extra radii drawn with --seed")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("lane-emden", help="Lane-Emden profile vs closed forms")
    p.add_argument("--n", type=float, default=1.0)
    p.add_argument("--z-max", type=float, default=10.0)
    _add_common(p, quad=False)
    p.set_defaults(func=cmd_lane_emden)

    p = sub.add_parser("scale-factor", help="integrate a'' = -lambda / a^(N-1)")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--a0", type=float, default=1.0)
    p.add_argument("--a1", type=float, default=0.0)
    p.add_argument("--t-max", type=float, default=2.0)
    _add_common(p, quad=False, fmt_default="csv")
    p.set_defaults(func=cmd_scale_factor)

    p = sub.add_parser("sweep", help="Cartesian parameter sweep")
    _add_params(p, sweep=True)
    _add_common(p, fmt_default="csv")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except _Fail as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.status
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except BlowupLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
