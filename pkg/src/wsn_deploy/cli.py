"""Command-line entry point: ``python3 -m wsn_deploy <command> ...``.

Exit codes: 0 success, 2 configuration or input-file error, 3 any other
runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import load_config
from .errors import BadFile, ConfigError, DegenerateRegion, MissingParam, WSNError
from .runner import run_deploy, run_evaluate, run_generate, run_minsensors

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _u64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"{v} is not an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wsn_deploy", description="Evidential sensor deployment runs.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="key = value run configuration")
        p.add_argument("--seed", type=_u64, help="override the config seed")
        return p

    add("deploy", "generate an initial field and optimize it")
    ev = add("evaluate", "score a fixed coordinate file")
    ev.add_argument("--coords", required=True, help="sensors CSV (sensor_id,x,y)")
    ev.add_argument("--out", help="output directory (default: output.dir from the config)")
    add("minsensors", "search for the smallest fully covering sensor count")
    gen = add("generate", "write an initial deployment without optimizing")
    gen.add_argument("--out", required=True, help="destination sensors CSV")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits with 2 on usage errors, matching the config-error code
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    try:
        config = load_config(args.config)
        if args.seed is not None:
            config = config.with_seed(args.seed)
        out_dir = config.output_dir
        if args.command == "deploy":
            summary = run_deploy(config)
        elif args.command == "evaluate":
            out_dir = args.out or out_dir
            summary = run_evaluate(config, args.coords, out_dir)
        elif args.command == "minsensors":
            summary = run_minsensors(config)
        else:
            f = run_generate(config, args.out)
            print(f"wrote {f.k} sensors to {args.out}")
            return EXIT_OK
    except (ConfigError, BadFile, MissingParam, DegenerateRegion) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (WSNError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME

    c = summary.coverage
    print(
        f"{summary.command}: K={summary.final_k} rho={c.rho:.6f} ({c.n_detected}/{c.n_targets}) "
        f"epochs={summary.epochs} time={summary.wall_time_s:.2f}s -> {out_dir}"
    )
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
