"""Command-line entry point.

Subcommands: ``run`` (one experiment), ``compare`` (several step-size
schedules with paired seeds), ``oracle`` (centralized optimal-value
estimate), ``validate`` (network and schedule assumption checks without
running), and ``plot`` (render figures from a finished run directory).
Exits 0 on success; on failure a machine-readable JSON error object is
written to stderr and the exit code is nonzero.
"""

import argparse
import dataclasses
import json
import sys

from . import harness
from .config import load_config
from .engine import AlgorithmKind
from .errors import ConfigurationError, FeasibilityError, InputError


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="randproj",
        description=(
            "Distributed nonsmooth convex optimization with random "
            "constraint projections"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="path to the INI config file")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--out", help="override the output directory")
        p.add_argument(
            "--algorithm",
            choices=["proximal", "subgradient"],
            help="override the configured algorithm",
        )

    p_run = sub.add_parser("run", help="run the configured experiment")
    common(p_run)
    p_run.add_argument("--workers", type=int, help="parallel sampling processes")
    p_run.add_argument(
        "--plots", action="store_true", help="also render figures next to the CSVs"
    )

    p_cmp = sub.add_parser("compare", help="compare step-size schedules, paired seeds")
    common(p_cmp)
    p_cmp.add_argument(
        "--schedule",
        action="append",
        required=True,
        metavar="ALPHA0[,EXPONENT]",
        help="a schedule alpha0/(k+1)^exponent; give at least twice",
    )
    p_cmp.add_argument("--workers", type=int, help="parallel sampling processes")
    p_cmp.add_argument("--plots", action="store_true", help="also render figures")

    p_oracle = sub.add_parser("oracle", help="centralized optimal-value estimate")
    common(p_oracle)
    p_oracle.add_argument(
        "--budget", type=int, default=100_000, help="oracle iteration budget"
    )

    p_val = sub.add_parser("validate", help="check network and schedule assumptions")
    p_val.add_argument("--config", required=True)
    p_val.add_argument("--algorithm", choices=["proximal", "subgradient"])

    p_plot = sub.add_parser("plot", help="render figures for a finished run")
    p_plot.add_argument("--run", required=True, help="run or comparison directory")
    p_plot.add_argument("--out", help="directory for the figures")
    return parser


def _load(args):
    config = load_config(args.config)
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "out", None):
        overrides["out_dir"] = args.out
    if getattr(args, "algorithm", None):
        overrides["algorithm"] = AlgorithmKind.from_string(args.algorithm)
    if getattr(args, "workers", None) is not None:
        overrides["workers"] = args.workers
    if overrides:
        config = dataclasses.replace(config, **overrides)
    return config.validate()


def _parse_schedule(text):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) not in (1, 2):
        raise InputError(f"schedule must be ALPHA0 or ALPHA0,EXPONENT, got {text!r}")
    try:
        alpha0 = float(parts[0])
        exponent = float(parts[1]) if len(parts) == 2 else 1.0
    except ValueError:
        raise InputError(f"non-numeric schedule {text!r}") from None
    return (alpha0, exponent)


def _fail(exc, code=1):
    payload = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    print(json.dumps(payload), file=sys.stderr)
    return code


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            config = _load(args)
            result = harness.run_experiment(config, plots=args.plots)
            print(f"wrote {result.trajectory_path}")
            print(f"wrote {result.summary_path}")
            if result.groups_path:
                print(f"wrote {result.groups_path}")
            print(f"wrote {result.manifest_path}")
            return 0
        if args.command == "compare":
            config = _load(args)
            schedules = [_parse_schedule(s) for s in args.schedule]
            result = harness.compare_schedules(config, schedules, plots=args.plots)
            print(f"wrote {result.comparison_path}")
            for label, f_total, d_total in result.totals:
                print(f"  {label}: total F_G = {f_total:.6g}, total D_G = {d_total:.6g}")
            return 0
        if args.command == "oracle":
            config = _load(args)
            problem = harness.generate_instance(config, config.seed)
            solution = harness.centralized_oracle(problem, args.budget)
            payload = {
                "optimal_value": solution.value,
                "method": solution.method,
                "diagnostics": solution.diagnostics,
            }
            print(json.dumps(payload, indent=2, sort_keys=True))
            return 0
        if args.command == "validate":
            config = _load(args)
            report = harness.validate_setup(config)
            for line in report["weight_violations"]:
                print(f"violation: {line}")
            print(f"strongly connected: {report['strongly_connected']}")
            print(f"schedule: {report['schedule']} (summability conditions hold)")
            if report["ok"]:
                print("ok")
                return 0
            raise ConfigurationError("validation found violations")
        if args.command == "plot":
            from . import viz

            import os

            if os.path.exists(os.path.join(args.run, "comparison.csv")):
                paths = viz.plot_comparison(args.run, args.out)
            else:
                paths = viz.plot_run(args.run, args.out)
            for p in paths:
                print(f"wrote {p}")
            return 0
        parser.error(f"unknown command {args.command!r}")
    except (ConfigurationError, InputError, FeasibilityError, OSError) as exc:
        return _fail(exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
