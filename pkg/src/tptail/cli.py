"""Command-line front end.

Exit codes: 0 success, 2 usage or configuration error, 3 a domination or
lemma check failed.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from . import bounds as B
from .config import ConfigError, build_ensemble, default_seed, load_config
from .ensembles import HypothesisError
from .verification.experiments import ADAPTERS, run_domination, shipped_experiments
from .verification.lemmas import run_lemma_suite
from .verification.stats import CSV_HEADER, fmt, format_row

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 2, 3

SPECIAL_BOUNDS = ("constants", "divergence", "gaussian-integral", "expectation-chernoff",
                  "expectation-subexp", "norm-expectation")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _csv_text(rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _write(text: str, out=None):
    out = out or sys.stdout
    out.write(text)


# --- bound ---------------------------------------------------------------------

def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise ValueError(f"{args.theorem_id} needs {flags}")


def cmd_bound(args) -> str:
    tid = args.theorem_id
    if tid == "constants":
        delta, c = B.solve_delta_opt()
        residual = delta * math.exp(delta) - 1.0
        return _csv_text([("delta_opt", "C", "residual"), (fmt(delta), fmt(c), fmt(residual))])
    if tid == "divergence":
        _need(args, "c", "d")
        return _csv_text([("c", "d", "divergence"), (fmt(args.c), fmt(args.d), fmt(B.binary_divergence(args.c, args.d)))])
    if tid == "gaussian-integral":
        _need(args, "x")
        return _csv_text([("x", "value"), (fmt(args.x), fmt(B.gaussian_integral(args.x)))])
    if tid == "expectation-chernoff":
        _need(args, "mu_max")
        lo, hi, ok = B.expectation_bounds_chernoff(args.m, args.p, args.mu_max, args.T)
        return _csv_text([("lower", "upper", "consistent"), (fmt(lo), fmt(hi), str(ok).lower())])
    if tid == "expectation-subexp":
        _need(args, "sigma")
        lo, hi = B.expectation_bounds_subexp(args.m, args.p, args.sigma, args.T, args.mu_max)
        return _csv_text([("lower", "upper"), ("" if lo is None else fmt(lo), fmt(hi))])
    if tid == "norm-expectation":
        _need(args, "sigma")
        lo, hi = B.norm_expectation_bounds(args.m, args.p, args.sigma)
        return _csv_text([("second_moment_lower", "second_moment_upper"), (fmt(lo), fmt(hi))])
    if tid not in B.BOUNDS:
        raise ValueError(f"unknown theorem id {tid!r}; known ids: {', '.join(list(B.BOUNDS) + list(SPECIAL_BOUNDS))}")
    q = B.BoundQuery(
        m=args.m, n=args.n, p=args.p, sigma2=args.sigma2, theta=args.theta,
        b=None if args.b is None else tuple(args.b), T=args.T, n_sum=args.n_sum,
        mu_max=args.mu_max, mu_min=args.mu_min, mu_bar_max=args.mu_bar_max, mu_bar_min=args.mu_bar_min,
    )
    v = B.evaluate(tid, q)
    validity = ";".join(f"{k}={str(ok).lower()}" for k, ok in v.validity.items())
    return _csv_text([("theorem_id", "bound_raw", "bound_clipped", "valid", "validity"),
                      (v.theorem_id, fmt(v.value), fmt(v.clipped), str(v.valid).lower(), validity)])


# --- simulate ------------------------------------------------------------------

def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    if cfg.theorem_id not in ADAPTERS:
        raise ConfigError(f"unknown theorem id {cfg.theorem_id!r}")
    ensemble = build_ensemble(cfg)
    try:
        report = run_domination(cfg.theorem_id, ensemble, cfg.thresholds, cfg.trials, cfg.alpha,
                                cfg.resolved_seed(), args.workers)
    except HypothesisError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    text = report.to_csv()
    out = Path(args.output) if args.output else cfg.output_path()
    if out is None:
        _write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8", newline="\n")
    bad = report.first_violation()
    if bad is not None:
        sys.stderr.write("domination failed: " + ",".join(format_row(report.theorem_id, bad)) + "\n")
        return EXIT_FAIL
    return EXIT_OK


# --- lemmas ---------------------------------------------------------------------

LEMMA_HEADER = ("lemma_id", "min_slack", "trials", "pass")


def lemma_rows(results) -> List[Sequence[str]]:
    return [LEMMA_HEADER] + [(r.lemma_id, fmt(r.min_slack), str(r.trials), str(r.passed).lower())
                             for r in results]


def cmd_lemmas(args) -> int:
    seed = default_seed() if args.seed is None else args.seed
    try:
        results = run_lemma_suite(seed, args.filter)
    except KeyError as exc:
        raise ConfigError(exc.args[0]) from None
    _write(_csv_text(lemma_rows(results)))
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


# --- report ---------------------------------------------------------------------

def cmd_report(args) -> int:
    """Run every shipped experiment and the lemma suite, writing CSVs under ``--out``.

    ``domination.csv`` concatenates all experiments; its ``theorem_id``
    column carries the experiment name ``<theorem id>@<ensemble>``.
    """
    seed = default_seed() if args.seed is None else args.seed
    out = Path(args.out)
    (out / "domination").mkdir(parents=True, exist_ok=True)
    combined = [",".join(CSV_HEADER) + "\n"]
    ok = True
    for ex in shipped_experiments():
        report = ex.run(args.trials, args.alpha, seed, args.workers)
        (out / "domination" / f"{ex.name.replace('@', '__')}.csv").write_text(
            report.to_csv(), encoding="utf-8", newline="\n")
        combined.append(_csv_text([format_row(ex.name, r) for r in report.rows]))
        ok &= report.dominated
        print(f"{ex.name},{'dominated' if report.dominated else 'VIOLATED'}", file=sys.stderr)
    (out / "domination.csv").write_text("".join(combined), encoding="utf-8", newline="\n")
    if not args.skip_lemmas:
        results = run_lemma_suite(seed)
        (out / "lemmas.csv").write_text(_csv_text(lemma_rows(results)), encoding="utf-8", newline="\n")
        ok &= all(r.passed for r in results)
    delta, c = B.solve_delta_opt()
    (out / "constants.csv").write_text(_csv_text([("delta_opt", "C"), (fmt(delta), fmt(c))]),
                                       encoding="utf-8", newline="\n")
    print(str(out), file=sys.stdout)
    return EXIT_OK if ok else EXIT_FAIL


# --- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tptail", description="Tail bounds for sums of random T-product tensors.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pb = sub.add_parser("bound", help="evaluate a closed-form bound")
    pb.add_argument("theorem_id")
    pb.add_argument("--m", type=int, default=1)
    pb.add_argument("--n", type=int)
    pb.add_argument("--p", type=int, default=1)
    pb.add_argument("--sigma2", type=float, default=0.0)
    pb.add_argument("--sigma", type=float)
    pb.add_argument("--theta", type=float)
    pb.add_argument("--b", type=_float_list, help="comma-separated threshold vector of length p")
    pb.add_argument("--T", type=float, default=1.0)
    pb.add_argument("--n-sum", type=int, default=1)
    pb.add_argument("--mu-max", type=float)
    pb.add_argument("--mu-min", type=float)
    pb.add_argument("--mu-bar-max", type=float)
    pb.add_argument("--mu-bar-min", type=float)
    pb.add_argument("--c", type=float)
    pb.add_argument("--d", type=float)
    pb.add_argument("--x", type=float)

    ps = sub.add_parser("simulate", help="run a domination experiment from a JSON config")
    ps.add_argument("config")
    ps.add_argument("--output", help="CSV path (overrides the config's output)")
    ps.add_argument("--workers", type=int, default=1)

    pl = sub.add_parser("lemmas", help="run the deterministic lemma checks")
    pl.add_argument("--filter")
    pl.add_argument("--seed", type=int)

    pr = sub.add_parser("report", help="run all shipped experiments and lemma checks")
    pr.add_argument("--out", default="tptail-report")
    pr.add_argument("--trials", type=int, default=10_000)
    pr.add_argument("--alpha", type=float, default=0.01)
    pr.add_argument("--seed", type=int)
    pr.add_argument("--workers", type=int, default=1)
    pr.add_argument("--skip-lemmas", action="store_true")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "bound":
            _write(cmd_bound(args))
            return EXIT_OK
        if args.command == "simulate":
            return cmd_simulate(args)
        if args.command == "lemmas":
            return cmd_lemmas(args)
        return cmd_report(args)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except HypothesisError as exc:
        sys.stderr.write(f"hypothesis violated: {exc}\n")
        return EXIT_USAGE
    except (ConfigError, ValueError, KeyError) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        sys.stderr.write(f"error: {msg}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
