"""Command-line entry point.

Subcommands: sweep, nystrom-sweep, bounds, gen-matrix, width-check.
Exit codes: 0 success, 2 config error, 3 IO error, 4 deterministic-bound
violation in bounds mode.
"""

import argparse
import os
import sys

from . import bounds as bounds_mod
from . import matio, sweep as sweep_mod
from .config import dump_config, load_config
from .distributions import SeedSpec
from .errors import ConfigError, SketchBenchError
from .testmatrices import MatrixRecipe

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_BOUND_VIOLATION = 4


def _add_common(sub):
    sub.add_argument("--config", required=True, help="keyed-text config file")
    sub.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    sub.add_argument("--raw", action="store_true", help="persist per-trial rows")
    sub.add_argument(
        "--print-config", action="store_true", help="print the normalized config and exit"
    )


def build_parser():
    parser = argparse.ArgumentParser(prog="sketchbench")
    subs = parser.add_subparsers(dest="command", required=True)

    for name in ("sweep", "nystrom-sweep", "bounds"):
        sub = subs.add_parser(name)
        _add_common(sub)

    gen = subs.add_parser("gen-matrix")
    gen.add_argument("--kind", required=True)
    gen.add_argument("--out", required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--param", action="append", default=[], help="name=value, repeatable")

    width = subs.add_parser("width-check")
    width.add_argument("--matrix", required=True, help="matrix text file")
    width.add_argument("--samples", type=int, default=10_000)
    width.add_argument("--seed", type=int, default=0)
    return parser


def _load(args, force_algorithm=None):
    config = load_config(args.config)
    if force_algorithm and config.algorithm != force_algorithm:
        raise ConfigError(
            f"this subcommand requires algorithm = {force_algorithm}, got {config.algorithm}"
        )
    return config


def _emit_outputs(config, records, aggregates, raw):
    if config.csv_path:
        sweep_mod.emit_csv(aggregates, config.csv_path)
        if raw:
            sweep_mod.emit_raw_csv(records, config.csv_path + ".raw.csv")
    if config.svg_path:
        sweep_mod.emit_svg(aggregates, config.svg_path, log_y=config.log_y)


def _run_sweep_command(args, force_algorithm):
    try:
        config = _load(args, force_algorithm)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.print_config:
        sys.stdout.write(dump_config(config))
        return EXIT_OK
    records, aggregates = sweep_mod.run_sweep(config, workers=args.workers)
    try:
        _emit_outputs(config, records, aggregates, args.raw)
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    for row in aggregates:
        print(
            f"{row.distribution} ell={row.ell} mean_re={row.mean_re:.6g} "
            f"std_re={row.std_re:.6g} failures={row.failures}"
        )
    return EXIT_OK


def _run_bounds_command(args):
    try:
        config = _load(args, "rsvd")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.print_config:
        sys.stdout.write(dump_config(config))
        return EXIT_OK
    records, aggregates, summary = sweep_mod.run_bound_check(config, workers=args.workers)
    try:
        _emit_outputs(config, records, aggregates, args.raw)
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(
        f"trials={summary.trials} not_applicable={summary.not_applicable} "
        f"deterministic_violations={summary.deterministic_violations} "
        f"chain_violations={summary.chain_violations} "
        f"gaussian_exceedances={summary.gaussian_exceedances}/{summary.gaussian_trials}"
    )
    if summary.deterministic_violations or summary.chain_violations:
        return EXIT_BOUND_VIOLATION
    return EXIT_OK


def _run_gen_matrix(args):
    params = {}
    for item in args.param:
        if "=" not in item:
            print(f"config error: bad --param {item!r}", file=sys.stderr)
            return EXIT_CONFIG
        name, value = item.split("=", 1)
        try:
            params[name] = int(value)
        except ValueError:
            try:
                params[name] = float(value)
            except ValueError:
                params[name] = value
    try:
        A = MatrixRecipe(kind=args.kind, params=params, seed=args.seed).build()
    except SketchBenchError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        matio.save_matrix(A, args.out)
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {A.shape[0]}x{A.shape[1]} matrix to {args.out}")
    return EXIT_OK


def _run_width_check(args):
    try:
        H = matio.load_matrix(args.matrix)
    except (OSError, SketchBenchError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    import numpy as np

    est, se = bounds_mod.mc_gaussian_width(H, args.samples, SeedSpec(args.seed))
    fro = float(np.linalg.norm(H))
    print(f"width_estimate={est:.10g} stderr={se:.3g} frobenius={fro:.10g}")
    print(f"estimate <= frobenius + 3*stderr: {est <= fro + 3 * se}")
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "sweep":
            return _run_sweep_command(args, "rsvd")
        if args.command == "nystrom-sweep":
            return _run_sweep_command(args, "nystrom")
        if args.command == "bounds":
            return _run_bounds_command(args)
        if args.command == "gen-matrix":
            return _run_gen_matrix(args)
        if args.command == "width-check":
            return _run_width_check(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SketchBenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
