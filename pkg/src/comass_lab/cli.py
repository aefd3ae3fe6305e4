"""Command-line entry point: ``comass-lab <group> <command> [options]``.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 input format error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import SearchConfig, build_table, lower_bound_search
from .comass import NoClosedFormError, OptimizerConfig, comass_estimate, comass_exact
from .exterior import Covector, FormatError, euclidean_norm, random_covector
from .forms import cayley_form, special_lagrangian_form, symplectic_power_form
from .reporting import RunManifest, dumps
from .systolic import COMPLEMENTARY, MFOLD, SystolicQuery, cpm_equality_check, systolic_constant
from .wedge_bounds import (
    check_complementary,
    check_general,
    check_m_fold,
    random_basis_form,
    summarize,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_FORMAT = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return args.threads
    return int(os.environ.get("COMASS_LAB_THREADS", "1") or 1)


def _optimizer_config(args) -> OptimizerConfig:
    return OptimizerConfig(args.restarts, args.max_iter, args.tol, args.seed, _threads(args))


def _read_form(path: str) -> Covector:
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    return Covector.from_json(text)


def _emit(out, payload: dict, manifest: RunManifest):
    payload = dict(payload)
    payload["manifest"] = manifest.finish().to_dict()
    out.write(dumps(payload) + "\n")


# -- handlers ------------------------------------------------------------


def cmd_comass_estimate(args, out) -> int:
    form = _read_form(args.form)
    cfg = _optimizer_config(args)
    manifest = RunManifest.capture(cfg.seed, cfg.to_dict())
    est = comass_estimate(form, cfg)
    norm = euclidean_norm(form)
    _emit(out, {
        "lower_bound": est.lower_bound,
        "euclidean_norm": norm,
        "ratio": norm / est.lower_bound if est.lower_bound > 0 else None,
        "restarts_used": est.restarts_used,
        "iterations": est.iterations,
        "converged_fraction": est.converged_fraction,
        "witness": est.witness.tolist(),
    }, manifest)
    return EXIT_OK


def cmd_comass_exact(args, out) -> int:
    form = _read_form(args.form)
    manifest = RunManifest.capture()
    try:
        value = comass_exact(form)
    except NoClosedFormError as exc:
        raise UsageError(str(exc)) from None
    _emit(out, {"comass": value, "euclidean_norm": euclidean_norm(form)}, manifest)
    return EXIT_OK


def cmd_bounds_table(args, out) -> int:
    manifest = RunManifest.capture(config={"n_max": args.n_max, "format": args.format})
    table = build_table(args.n_max)
    if args.format == "csv":
        manifest.finish()
        out.write("# manifest: " + dumps(manifest.to_dict()) + "\n")
        out.write(table.to_csv())
    else:
        _emit(out, table.to_dict(), manifest)
    return EXIT_OK


def cmd_bounds_lower(args, out) -> int:
    cfg = SearchConfig(budget=args.budget, seed=args.seed, starts=args.starts,
                       verify=OptimizerConfig(seed=args.seed, threads=_threads(args)))
    manifest = RunManifest.capture(args.seed, {"n": args.n, "p": args.p, "budget": args.budget, "starts": args.starts})
    try:
        result = lower_bound_search(args.n, args.p, cfg)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    table = build_table(max(args.n, 2))
    upper = table.upper(args.n, args.p)
    _emit(out, {
        "n": args.n,
        "p": args.p,
        "ratio": result.ratio,
        "ratio_squared": result.ratio**2,
        "table_upper_squared": float(upper),
        "evaluations": result.evaluations,
        "witness": result.covector.to_dict(),
    }, manifest)
    return EXIT_OK


def _parse_mu(text: str):
    try:
        mu = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"--mu expects four comma-separated numbers, got {text!r}") from None
    if len(mu) != 4:
        raise UsageError(f"--mu expects four numbers, got {len(mu)}")
    return mu


def cmd_forms_gen(args, out) -> int:
    manifest = RunManifest.capture(args.seed, {"kind": args.kind})
    if args.kind == "special-lag":
        form = special_lagrangian_form(_parse_mu(args.mu) if args.mu else (1.0, 1.0, -1.0, 0.0))
    elif args.kind == "cayley":
        form = cayley_form()
    elif args.kind == "symplectic":
        if args.k is None or args.n is None:
            raise UsageError("--kind symplectic needs --k and --n")
        try:
            form = symplectic_power_form(args.k, args.n)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    else:
        if args.n is None or args.p is None:
            raise UsageError("--kind random needs --n and --p")
        try:
            form = random_covector(args.n, args.p, args.terms, args.seed)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    _emit(out, form.to_dict(), manifest)
    return EXIT_OK


def _wedge_config(args) -> dict:
    keys = ("mode", "n", "p", "q", "m", "trials", "terms", "basis")
    return {k: getattr(args, k) for k in keys}


def cmd_verify_wedge(args, out) -> int:
    cfg = _optimizer_config(args)
    manifest = RunManifest.capture(args.seed, {**_wedge_config(args), **cfg.to_dict()})
    rng = np.random.default_rng(args.seed)

    def factor(n, p):
        if args.basis:
            return random_basis_form(n, p, rng)
        return random_covector(n, p, args.terms, rng)

    n, p = args.n, args.p
    if args.mode == "complementary":
        if not 1 <= p <= n - 1:
            raise UsageError("complementary mode needs 1 <= p <= n-1")
        trial = lambda: check_complementary(factor(n, p), factor(n, n - p), cfg)  # noqa: E731
    elif args.mode == "general":
        if args.q is None or p + args.q > n:
            raise UsageError("general mode needs --q with p + q <= n")
        trial = lambda: check_general(factor(n, p), factor(n, args.q), cfg)  # noqa: E731
    else:
        if args.m is None or args.m < 2:
            raise UsageError("mfold mode needs --m >= 2")
        if n != args.m * p:
            raise UsageError(f"mfold mode needs n == m*p ({args.m}*{p})")
        trial = lambda: check_m_fold([factor(n, p) for _ in range(args.m)], cfg)  # noqa: E731

    reports = []
    for _ in range(args.trials):
        report = trial()
        reports.append(report)
        out.write(dumps(report.to_dict()) + "\n")
    summary = summarize(reports)
    _emit(out, {"summary": summary}, manifest)
    return EXIT_FAIL if summary["fail"] else EXIT_OK


def cmd_systolic_constant(args, out) -> int:
    manifest = RunManifest.capture(config={"n": args.n, "p": args.p, "b": args.b, "mfold": args.mfold})
    try:
        if args.mfold:
            query = SystolicQuery(args.n, args.p, args.b, MFOLD, args.mfold)
        else:
            query = SystolicQuery(args.n, args.p, args.b, COMPLEMENTARY)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(out, systolic_constant(query).to_dict(), manifest)
    return EXIT_OK


def cmd_systolic_cpm(args, out) -> int:
    manifest = RunManifest.capture(config={"m": args.m})
    try:
        ratio = cpm_equality_check(args.m)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(out, {"m": args.m, "ratio": ratio, "ratio_exact": str(ratio), "equality": ratio == 1}, manifest)
    return EXIT_OK if ratio == 1 else EXIT_FAIL


def cmd_reproduce(args, out) -> int:
    from .reproduce import format_table, run_all

    claims = run_all(seed=args.seed, n_max=args.n_max)
    out.write(format_table(claims) + "\n")
    failed = [c for c in claims if not c.passed]
    out.write(f"{len(claims) - len(failed)}/{len(claims)} claims PASS\n")
    return EXIT_FAIL if failed else EXIT_OK


# -- parser --------------------------------------------------------------


def _add_optimizer_flags(p: argparse.ArgumentParser):
    p.add_argument("--restarts", type=int, default=64)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None, help="defaults to $COMASS_LAB_THREADS or 1")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="comass-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    groups = parser.add_subparsers(dest="group", required=True)

    comass = groups.add_parser("comass", help="comass of a covector").add_subparsers(dest="command", required=True)
    p = comass.add_parser("estimate", help="certified lower bound by frame optimization")
    p.add_argument("--form", required=True, help="covector JSON file, or - for stdin")
    _add_optimizer_flags(p)
    p.set_defaults(handler=cmd_comass_estimate)
    p = comass.add_parser("exact", help="closed form (degrees 0, 1, 2, n-1, n)")
    p.add_argument("--form", required=True)
    p.set_defaults(handler=cmd_comass_exact)

    bounds = groups.add_parser("bounds", help="bounds on C²_{n,p}").add_subparsers(dest="command", required=True)
    p = bounds.add_parser("table", help="triangle of upper bounds")
    p.add_argument("--n-max", type=int, default=12)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(handler=cmd_bounds_table)
    p = bounds.add_parser("lower", help="numerical lower bound on C_{n,p}")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--budget", type=int, default=SearchConfig.budget)
    p.add_argument("--starts", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(handler=cmd_bounds_lower)

    forms = groups.add_parser("forms", help="witness forms").add_subparsers(dest="command", required=True)
    p = forms.add_parser("gen", help="emit a covector as JSON")
    p.add_argument("--kind", choices=("special-lag", "cayley", "symplectic", "random"), required=True)
    p.add_argument("--mu", help="special-lag parameters a,b,c,d")
    p.add_argument("--k", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--terms", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=cmd_forms_gen)

    verify = groups.add_parser("verify", help="property checks").add_subparsers(dest="command", required=True)
    p = verify.add_parser("wedge", help="wedge-product comass bounds")
    p.add_argument("--mode", choices=("complementary", "general", "mfold"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--q", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--terms", type=int, help="terms per random factor (default: all)")
    p.add_argument("--basis", action="store_true", help="use single-term basis factors")
    _add_optimizer_flags(p)
    p.set_defaults(handler=cmd_verify_wedge)

    systolic = groups.add_parser("systolic", help="systolic constants").add_subparsers(dest="command", required=True)
    p = systolic.add_parser("constant")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--b", type=int, default=1)
    p.add_argument("--mfold", type=int, metavar="M")
    p.set_defaults(handler=cmd_systolic_constant)
    p = systolic.add_parser("cpm")
    p.add_argument("--m", type=int, required=True)
    p.set_defaults(handler=cmd_systolic_cpm)

    p = groups.add_parser("reproduce", help="recompute every published constant")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-max", type=int, default=8)
    p.set_defaults(handler=cmd_reproduce)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args, out)
    except FormatError as exc:
        print(f"comass-lab: input format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except OSError as exc:
        print(f"comass-lab: cannot read input: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except UsageError as exc:
        print(f"comass-lab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"comass-lab: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
