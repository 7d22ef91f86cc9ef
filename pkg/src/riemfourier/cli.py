"""Command line entry point: ``riemfourier {verify,converge,breakdown,props}``.

Exit codes: 0 when everything is within tolerance, 1 on violations, 2 on a
configuration error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ConfigError
from .experiments import (
    load_suite,
    parse_suite,
    run_breakdown_demo,
    run_convergence,
    run_property_suite,
    run_verify,
    worker_count,
    write_report,
    write_summary,
    write_timings,
)

RUNNERS = {
    "verify": run_verify,
    "converge": run_convergence,
    "breakdown": run_breakdown_demo,
    "props": run_property_suite,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="riemfourier",
        description="Check the Fourier inversion of differential operators on Riemannian manifolds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "verify": "invert vs direct application at every base point",
        "converge": "N and steps sweeps with observed convergence orders",
        "breakdown": "the formula applied to order-3 operators, flat and curved",
        "props": "seeded randomized invariant checks over the manifold zoo",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text)
        p.add_argument("--config", type=Path, required=(name != "props"),
                       help="YAML experiment config" + (" (optional)" if name == "props" else ""))
        p.add_argument("--out", type=Path, default=Path("reports"), help="output directory (default: reports)")
        p.add_argument("--tolerance", type=float, default=None, help="override every experiment tolerance")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        if name == "props":
            p.add_argument("--inject-fault", choices=["corrupt_christoffel"], default=None,
                           help="perturb the connection to check that the suite notices")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.config is not None:
            suite = load_suite(args.config, seed=args.seed, tolerance=args.tolerance)
        else:
            suite = parse_suite({}, seed=args.seed, tolerance=args.tolerance)
        if args.command != "props" and not suite.experiments:
            raise ConfigError("experiments", "no experiments in config")
        workers = worker_count()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    if args.command == "props":
        report = run_property_suite(suite, workers, fault=args.inject_fault)
    else:
        report = RUNNERS[args.command](suite, workers)

    args.out.mkdir(parents=True, exist_ok=True)
    if report.rows:
        write_report(report.rows, args.out / f"{args.command}.csv")
        write_timings(report.rows, args.out / f"{args.command}_timings.csv")
        for r in report.rows:
            status = r.error or f"rel_error {r.rel_error:.3e}"
            print(f"{r.experiment} x[{r.x_index}] N={r.N} steps={r.steps}: {status}")
    write_summary(report.summary, args.out / f"{args.command}_summary.yaml")
    if report.kind == "props":
        s = report.summary
        print(f"{s['checks']} checks, {s['samples']} samples, {s['failures']} failures (seed {s['seed']})")
    for v in report.violations:
        print(f"VIOLATION {v}")
    print(f"{args.command}: {'ok' if not report.violations else f'{len(report.violations)} violation(s)'}")
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
