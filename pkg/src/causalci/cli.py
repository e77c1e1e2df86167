"""Command-line front end.

Subcommands: ``sample`` (network to CSV), ``citest`` (one independence test,
JSON verdict on stdout), ``discover`` (CPDAG edge list plus stats), and
``bench`` (seeded benchmark reports). All randomness flows from ``--seed``;
identical invocations produce byte-identical outputs.

Exit codes: 0 success, 1 usage or validation, 2 input format, 3 I/O.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .bnmodel import BifParseError, Dataset, NetworkValidationError, \
    forward_sample, load_bif
from .citest import TestConfig, conditional_test
from .discovery import DISCOVERY_METHODS, learn_cpdag
from .evalbench import (
    SyntheticPairSpec,
    run_discovery_bench,
    run_mi_error_bench,
    run_polya_approx_bench,
    run_statistic_distribution_bench,
    run_type1_power_bench,
    run_variance_bench,
)

EXIT_USAGE = 1
EXIT_FORMAT = 2
EXIT_IO = 3

EXPERIMENTS = ("mi_error", "type1_power", "variance", "polya_approx",
               "stat_dist", "discovery")


class UsageError(ValueError):
    pass


class InputFormatError(ValueError):
    pass


def _load_dataset(path: str) -> Dataset:
    try:
        return Dataset.from_csv(path)
    except ValueError as exc:
        raise InputFormatError(str(exc)) from exc


class _Parser(argparse.ArgumentParser):
    # The spec'd exit code for bad usage is 1, not argparse's default 2.
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise UsageError(f"expected a comma-separated integer list, got {text!r}")


def _str_list(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip() != ""]


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--significance", type=float, default=0.05)
    parser.add_argument("--alpha0", type=float, default=0.5,
                        help="prior concentration per marginal (independence)")
    parser.add_argument("--alpha1", type=float, default=0.5,
                        help="prior concentration on joint cells (dependence)")
    parser.add_argument("--bf-threshold", type=float, default=1.0)
    parser.add_argument("--mi-threshold", type=float, default=None,
                        help="fixed MI threshold; omit to calibrate")
    parser.add_argument("--max-cond-set", type=int, default=4)


def _config_from(args) -> TestConfig:
    try:
        return TestConfig(
            significance=args.significance,
            jeffreys_alpha0=args.alpha0,
            jeffreys_alpha1=args.alpha1,
            bf_threshold=args.bf_threshold,
            mi_threshold=args.mi_threshold,
            max_cond_set=args.max_cond_set,
            mi_calibration_seed=getattr(args, "seed", 0) or 0,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="causalci")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="forward-sample a network to CSV")
    p.add_argument("net", help="BIF network file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("citest", help="run one (conditional) independence test")
    p.add_argument("data", help="dataset CSV")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--z", default="", help="comma-separated conditioning variables")
    p.add_argument("--method", default="g")
    p.add_argument("--seed", type=int, default=0)
    _add_config_flags(p)

    p = sub.add_parser("discover", help="learn a CPDAG from a dataset")
    p.add_argument("data", help="dataset CSV")
    p.add_argument("--method", default="g")
    p.add_argument("--out", required=True, help="edge-list output path")
    p.add_argument("--seed", type=int, default=0)
    _add_config_flags(p)

    p = sub.add_parser("bench", help="run a benchmark experiment")
    p.add_argument("experiment", help="one of: " + ", ".join(EXPERIMENTS))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--net", help="BIF network (discovery experiment)")
    p.add_argument("--sizes", default=None, help="comma-separated sample sizes")
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--methods", default=None, help="comma-separated method ids")
    _add_config_flags(p)
    return parser


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _json_line(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True) + "\n"


def cmd_sample(args) -> int:
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    net = load_bif(args.net)
    dataset = forward_sample(net, args.n, args.seed)
    dataset.to_csv(args.out)
    return 0


def cmd_citest(args) -> int:
    dataset = _load_dataset(args.data)
    if args.x == args.y:
        raise UsageError("x and y must differ")
    for var in [args.x, args.y, *_str_list(args.z)]:
        if var not in dataset.names:
            sys.stderr.write(f"unknown variable {var!r}\n")
            return EXIT_FORMAT
    config = _config_from(args)
    decision = conditional_test(dataset, args.x, args.y, _str_list(args.z),
                                method=args.method, config=config)
    payload = {
        "method": decision.method,
        "statistic": decision.statistic,
        "independent": decision.independent,
    }
    if decision.p_value is not None:
        payload["p_value"] = decision.p_value
    if decision.df is not None:
        payload["df"] = decision.df
    sys.stdout.write(_json_line(payload))
    return 0


def cmd_discover(args) -> int:
    dataset = _load_dataset(args.data)
    if dataset.n == 0:
        raise UsageError("dataset has no rows")
    if args.method not in DISCOVERY_METHODS or args.method == "dsep_oracle":
        raise UsageError(f"unknown discovery method {args.method!r}")
    config = _config_from(args)
    cpdag, stats = learn_cpdag(dataset, args.method, config)
    lines = sorted(f"{u} -> {v}" for u, v in cpdag.directed)
    lines += sorted("{} -- {}".format(*sorted(e)) for e in cpdag.undirected)
    _write_text(args.out, "".join(line + "\n" for line in lines))
    sys.stdout.write(_json_line({
        "ci_test_count": stats.ci_test_count,
        "tests_by_order": {str(k): v for k, v in
                           sorted(stats.tests_by_order.items())},
    }))
    return 0


def _bench_defaults(experiment: str, args) -> tuple[list[int], int, list[str]]:
    sizes = _int_list(args.sizes) if args.sizes else {
        "mi_error": [20, 50, 100],
        "type1_power": [50, 100, 1000],
        "variance": [20],
        "polya_approx": [10, 20, 50, 100],
        "stat_dist": [1000],
        "discovery": [100, 300, 500],
    }[experiment]
    trials = args.trials if args.trials is not None else {
        "mi_error": 1000,
        "type1_power": 2000,
        "variance": 10000,
        "polya_approx": 1000,
        "stat_dist": 5000,
        "discovery": 0,
    }[experiment]
    methods = _str_list(args.methods) if args.methods else {
        "mi_error": ["mi_eb_map", "mi_eb_fixed", "mi_mle"],
        "type1_power": ["g", "bf_threshold", "bf_chi2"],
        "variance": [],
        "polya_approx": [],
        "stat_dist": [],
        "discovery": ["g", "bf_chi2", "mi_eb"],
    }[experiment]
    return sizes, trials, methods


def cmd_bench(args) -> int:
    experiment = args.experiment
    if experiment not in EXPERIMENTS:
        raise UsageError(f"unknown experiment {experiment!r}")
    sizes, trials, methods = _bench_defaults(experiment, args)
    config = _config_from(args)

    if experiment == "mi_error":
        report = run_mi_error_bench(sizes, trials, methods, args.seed)
    elif experiment == "type1_power":
        report = run_type1_power_bench(sizes, trials, methods, args.seed,
                                       config=config)
    elif experiment == "variance":
        report = run_variance_bench((0.4, 0.3, 0.2, 0.1), sizes[0], trials,
                                    args.alpha1, args.seed).to_benchmark_report()
    elif experiment == "polya_approx":
        specs = [SyntheticPairSpec(kx=3, ky=3, dependent=d, n=n)
                 for n in sizes for d in (False, True)]
        report = run_polya_approx_bench(specs, (0.5, 1.0, 2.0), trials, args.seed)
    elif experiment == "stat_dist":
        if trials < 2000:
            raise UsageError("stat_dist requires at least 2000 trials")
        report = run_statistic_distribution_bench(
            3, sizes[0], trials, "prior", args.seed,
            config=config).to_benchmark_report()
    else:
        if not args.net:
            raise UsageError("discovery experiment requires --net")
        net = load_bif(args.net)
        report = run_discovery_bench(net, sizes, args.runs, methods,
                                     config, args.seed)
    _write_text(args.out, report.to_json())
    return 0


def main(argv=None) -> int:
    level = os.environ.get("CAUSALCI_LOG", "").upper()
    if level:
        logging.basicConfig(level=getattr(logging, level, logging.INFO),
                            stream=sys.stderr)
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "sample": cmd_sample,
        "citest": cmd_citest,
        "discover": cmd_discover,
        "bench": cmd_bench,
    }
    try:
        return handlers[args.command](args)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (BifParseError, NetworkValidationError, InputFormatError) as exc:
        sys.stderr.write(f"input format error: {exc}\n")
        return EXIT_FORMAT
    except OSError as exc:
        sys.stderr.write(f"i/o error: {exc}\n")
        return EXIT_IO
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
