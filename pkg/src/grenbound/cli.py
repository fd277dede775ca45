"""Command line interface: ``grenbound <command> ...`` or ``python -m grenbound``."""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import boundary, harness, limits, penalized, sampling
from .core import format_sample, grenander, read_sample

EXIT_CONFIG = 2
EXIT_FALLBACK = 3

ZERO_METHODS = ("simple", "adaptive", "simple2", "adaptive2", "orderstat", "numderiv",
                "penalized", "endpoint")


def _write(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_fit(args) -> int:
    _write(grenander(read_sample(args.input)).to_csv(), args.out)
    return 0


def cmd_estimate_zero(args) -> int:
    s = read_sample(args.input)
    m = args.method
    if m == "simple":
        est = boundary.simple_zero(s)
    elif m == "adaptive":
        est = boundary.adaptive_zero(s, args.cstar)
    elif m == "simple2":
        est = boundary.simple_zero_k2(s)
    elif m == "adaptive2":
        est = boundary.adaptive_zero_k2(s, args.cstar)
    elif m == "orderstat":
        est = boundary.order_stat_zero(s, args.a)
    elif m == "numderiv":
        est = boundary.numerical_derivative_zero(s, args.a)
    elif m == "endpoint":
        est = boundary.endpoint_one(s, args.upper)
    else:
        est = penalized.penalized_zero(s, args.alpha0, args.q)
    print("\n".join(est.as_lines()))
    return 0


def cmd_sample(args) -> int:
    spec = sampling.by_name(args.family)
    s = sampling.draw(spec, args.n, args.seed, args.rep)
    header = f"family={args.family} n={args.n} seed={args.seed} rep={args.rep}"
    _write(format_sample(s, header), args.out)
    return 0


def cmd_simulate(args) -> int:
    try:
        cfg = harness.parse_config(Path(args.config).read_text())
    except (OSError, harness.ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.workers is not None:
        cfg = dataclasses.replace(cfg, workers=args.workers)
    report = harness.run_experiment(cfg)
    _write(harness.emit_table(report, args.format), args.out)
    rate = report.fallback_rate()
    if rate > harness.FALLBACK_LIMIT:
        print(f"solver fallback in {rate:.1%} of replications", file=sys.stderr)
        return EXIT_FALLBACK
    return 0


def cmd_limits_table4(args) -> int:
    table = limits.table4(args.reps, args.T, args.h, args.seed, workers=args.workers)
    _write(table.to_csv(), args.out)
    return 0


def cmd_limits_cstar(args) -> int:
    est = limits.estimate_cstar(args.k, args.reps, None, args.T, args.h, args.seed,
                                workers=args.workers)
    _write(f"# c_star={est.c_star:.6f} min_objective={est.min_objective:.6f}\n" + est.to_csv(),
           args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="grenbound", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="Grenander estimator of a sample as breakpoint,height CSV")
    f.add_argument("--input", required=True)
    f.add_argument("--out")
    f.set_defaults(func=cmd_fit)

    e = sub.add_parser("estimate-zero", help="estimate the density at the support boundary")
    e.add_argument("--method", choices=ZERO_METHODS, required=True)
    e.add_argument("--input", required=True)
    e.add_argument("--a", type=float, default=1.0, help="m = floor(a n^(2/3)) for orderstat/numderiv")
    e.add_argument("--cstar", type=float, default=boundary.CSTAR)
    e.add_argument("--alpha0", type=float, default=None, help="pilot smoothing parameter")
    e.add_argument("--q", type=float, default=penalized.DEFAULT_Q)
    e.add_argument("--upper", type=float, default=1.0, help="support end for --method endpoint")
    e.set_defaults(func=cmd_estimate_zero)

    s = sub.add_parser("sample", help="draw a reproducible sample")
    s.add_argument("--family", choices=("exponential", "half_normal", "uniform01"), required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--rep", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sample)

    m = sub.add_parser("simulate", help="Monte Carlo table from a key = value config file")
    m.add_argument("--config", required=True)
    m.add_argument("--out")
    m.add_argument("--format", choices=("csv", "markdown"), default="csv")
    m.add_argument("--workers", type=int, default=None)
    m.set_defaults(func=cmd_simulate)

    lim = sub.add_parser("limits", help="Brownian Monte Carlo for the limit laws")
    lsub = lim.add_subparsers(dest="limits_command", required=True)
    for name, func, helptext in (
        ("table4", cmd_limits_table4, "limiting mean/var/MSE of every estimator"),
        ("cstar", cmd_limits_cstar, "minimiser of E D_R[W(t) - t^(k+1)](c)^2"),
    ):
        q = lsub.add_parser(name, help=helptext)
        if name == "cstar":
            q.add_argument("--k", type=int, choices=(1, 2), required=True)
        q.add_argument("--reps", type=int, default=limits.DEFAULT_REPS)
        q.add_argument("--T", type=float, default=limits.DEFAULT_T)
        q.add_argument("--h", type=float, default=limits.DEFAULT_H)
        q.add_argument("--seed", type=int, default=2006)
        q.add_argument("--workers", type=int, default=1)
        q.add_argument("--out")
        q.set_defaults(func=func)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
