"""Command-line front end.

Usage::

    xtransform profile --n 3 --w 2 --route both
    xtransform verify extremal --n 3 --w 1
    xtransform verify inequality --n 3 --samples 1000 --seed 42 --out report.json

Exit codes: 0 pass, 1 fail, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import moments, potential, profile, subharmonic, variational
from .report import SCHEMA_VERSION, VerificationReport, merge_slacks

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
SUITES = ("subharmonic", "harmonic-ball", "inequality", "inverted-inequality", "extremal",
          "monotone", "bathtub", "moments")
THREADS_ENV = "XTRANSFORM_THREADS"


class UsageError(Exception):
    pass


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise UsageError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return value


class _Mapper:
    """Ordered parallel map over a bounded thread pool."""

    def __init__(self, workers: int):
        self.workers = workers
        self._pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None

    def __call__(self, func, items):
        if self._pool is None:
            return map(func, items)
        return self._pool.map(func, items)

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xtransform",
                                     description="Profile functions and exponential-transform checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="evaluate M_n(w) or F_alpha(w)")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--n", type=int, help="dimension; uses alpha = 2/n")
    group.add_argument("--alpha", type=_fraction_float, help="exponent, e.g. 0.5 or 2/3")
    p.add_argument("--w", type=float, required=True, help="argument w >= 0")
    p.add_argument("--route", choices=("auto", "inverse", "series", "both"), default="auto",
                   help="evaluation route; 'both' cross-checks inverse against series")
    p.add_argument("--out", help="write the JSON report here as well")

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", choices=SUITES)
    v.add_argument("--n", type=int, default=3, help="dimension (default 3)")
    v.add_argument("--alpha", type=_fraction_float, help="exponent for the monotone suite")
    v.add_argument("--w", type=float, default=1.0, help="profile argument for extremal/bathtub")
    v.add_argument("--xi", type=float, help="extremal parameter, alternative to --w")
    v.add_argument("--R", type=float, default=1.0, help="ball radius for harmonic-ball")
    v.add_argument("--density", help="density JSON file instead of random balls")
    v.add_argument("--seq", help="moment sequence: CSV, JSON array or file path")
    v.add_argument("--samples", type=int, help="number of random densities or points")
    v.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    v.add_argument("--tol", type=float, help="override the suite tolerance")
    v.add_argument("--out", help="write the JSON report here as well")
    v.add_argument("--details", help="directory for a per-sample CSV")
    return parser


def _fraction_float(text: str) -> float:
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _dump(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2)


def _emit(text: str, out: str | None):
    print(text)
    if out:
        try:
            Path(out).write_text(text + "\n")
        except OSError as exc:
            raise UsageError(f"cannot write {out}: {exc}") from None


def cmd_profile(args) -> int:
    if args.n is not None:
        if args.n < 1:
            raise UsageError("--n must be >= 1")
        params = profile.ProfileParams.for_dimension(args.n)
    else:
        if not args.alpha > 0:
            raise UsageError("--alpha must be positive")
        params = profile.ProfileParams(args.alpha)
    if not (args.w >= 0 and math.isfinite(args.w)):
        raise UsageError("--w must be a finite nonnegative number")
    ev = profile.evaluator_for(params)
    routes = ("inverse", "series") if args.route == "both" else (args.route,)
    values = {}
    for r in routes:
        try:
            values[r] = ev(args.w, r)
        except (profile.SeriesTruncationError, ValueError) as exc:
            raise UsageError(f"route {r!r} unavailable: {exc}") from None
    doc = {"schema": SCHEMA_VERSION, "alpha": params.alpha, "n": params.n, "w": args.w,
           "route": args.route, "values": values, "value": values[routes[0]],
           "error_estimate": ev.tolerance}
    status = EXIT_PASS
    if len(values) == 2:
        diff = abs(values["inverse"] - values["series"])
        doc["route_difference"] = diff
        doc["routes_agree"] = diff <= 1e-8
        status = EXIT_PASS if diff <= 1e-8 else EXIT_FAIL
    if params.alpha <= 1:
        doc["gamma_alpha"] = profile.gamma_alpha(params.alpha, "digamma")
    _emit(_dump(doc), args.out)
    return status


def _load_density(path: str) -> potential.Density:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read density {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from None
    try:
        return potential.Density.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{path}: invalid density ({exc})") from None


def _density_or_random(args) -> potential.Density:
    if args.density:
        return _load_density(args.density)
    return potential.random_ball_density(np.random.default_rng(args.seed), args.n)


def _suite_report(args, mapper) -> VerificationReport:
    suite = args.suite
    if suite in ("subharmonic", "harmonic-ball", "inequality", "inverted-inequality", "extremal") \
            and args.n < 2:
        raise UsageError("--n must be >= 2")
    if suite == "subharmonic":
        rho = _density_or_random(args)
        points = args.samples or 100
        floor = args.tol if args.tol is not None else subharmonic.DEFECT_FLOOR
        parts = [subharmonic.subharmonic_suite(rho, form, points, args.seed, floor, mapper=mapper)
                 for form in ("E", "M")]
        worst = min(p.worst for p in parts)
        details = [{"form": p.params["form"], **row} for p in parts for row in p.details]
        return VerificationReport("subharmonic", {"n": rho.dim, "seed": args.seed, "forms": "E,M"},
                                  sum(p.samples for p in parts), worst, floor, "slack", details)
    if suite == "harmonic-ball":
        if not args.R > 0:
            raise UsageError("--R must be positive")
        return subharmonic.harmonic_ball_suite(args.n, args.R, args.samples or 50, args.seed,
                                               mapper=mapper)
    if suite in ("inequality", "inverted-inequality"):
        inverted = suite == "inverted-inequality"
        if args.density:
            rho = _load_density(args.density)
            check = variational.verify_inverted_inequality if inverted else variational.verify_main_inequality
            s = check(rho, args.tol)
            return merge_slacks(suite, {"n": rho.dim, "density": args.density}, [s], s.tol)
        tol = args.tol if args.tol is not None else variational.CLOSED_FORM_TOL
        return variational.random_inequality_suite(args.n, args.samples or 1000, args.seed,
                                                   inverted, tol, mapper)
    if suite == "extremal":
        w = profile.t_n(args.n, args.xi) if args.xi is not None else args.w
        if not w > 0:
            raise UsageError("--w must be positive")
        return variational.extremal_report(args.n, w)
    if suite == "monotone":
        alpha = args.alpha if args.alpha is not None else 2.0 / args.n
        grid = np.linspace(0.0, 5.0, args.samples or 41)
        tol = args.tol if args.tol is not None else profile.DEFAULT_TOLERANCE
        return profile.complete_monotonicity_check(alpha, grid, tolerance=tol)
    if suite == "bathtub":
        if args.n < 2:
            raise UsageError("--n must be >= 2")
        w = profile.t_n(args.n, args.xi) if args.xi is not None else args.w
        ball = variational.extremal_ball(args.n, w)
        return variational.bathtub_level_set_check(ball.alpha_param, ball.tau, args.samples or 10000,
                                                   n=args.n, seed=args.seed)
    if suite == "moments":
        if not args.seq:
            raise UsageError("the moments suite needs --seq")
        try:
            s = moments.parse_sequence(args.seq)
        except (ValueError, ZeroDivisionError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot parse --seq: {exc}") from None
        M = (len(s) - 1) // 2
        rep = moments.l_sequence_check(s, M)
        b = rep.sequence
        margin = float(min(rep.margins))
        details = [{"m": m, "determinant": str(d), "psd": p}
                   for m, (d, p) in enumerate(zip(rep.determinants, rep.psd))]
        return VerificationReport("moments", {"M": M, "b": b.to_json(), "psd": rep.psd},
                                  M + 1, margin if rep.all_psd else min(margin, -1.0), 0.0,
                                  "slack", details)
    raise UsageError(f"unknown suite {suite!r}")


def cmd_verify(args) -> int:
    if args.samples is not None and args.samples < 1:
        raise UsageError("--samples must be >= 1")
    mapper = _Mapper(thread_count())
    try:
        report = _suite_report(args, mapper)
    finally:
        mapper.close()
    if args.details:
        try:
            report.write_details(args.details)
        except OSError as exc:
            raise UsageError(f"cannot write details to {args.details}: {exc}") from None
    _emit(report.to_json(), args.out)
    return EXIT_PASS if report.passed else EXIT_FAIL


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS
    try:
        if args.command == "profile":
            return cmd_profile(args)
        return cmd_verify(args)
    except UsageError as exc:
        print(f"xtransform: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (potential.SupportError, potential.DensityError, moments.ArityError) as exc:
        print(f"xtransform: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
