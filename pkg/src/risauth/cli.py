"""Command-line entry point: ``risauth run`` and ``risauth list``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from .config import ConfigError
from .experiments import EXPERIMENTS, load_spec, run_experiment, write_result

EXIT_OK, EXIT_RUNTIME, EXIT_SPEC = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="risauth", description="RIS-assisted backscatter authentication experiments")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment from a spec file")
    run.add_argument("--spec", required=True, help="flat key = value spec file")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--format", choices=("csv", "json", "both"), default="both")
    run.add_argument("--seed", type=int, help="override the spec seed")
    run.add_argument("--trials", type=int, help="override the spec trial count")
    run.add_argument("--threads", type=int, default=1, help="worker processes (default 1)")

    sub.add_parser("list", help="print experiment names")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "list":
        print("\n".join(EXPERIMENTS))
        return EXIT_OK

    try:
        spec = load_spec(args.spec)
        changes = {k: v for k, v in (("seed", args.seed), ("trials", args.trials)) if v is not None}
        if changes:
            spec = dataclasses.replace(spec, **changes)
        if args.threads < 1:
            raise ConfigError("threads: must be >= 1")
    except ConfigError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC

    try:
        result = run_experiment(spec, threads=args.threads)
        paths = write_result(result, args.out, args.format)
    except Exception as exc:  # noqa: BLE001 - reported as exit status
        logging.getLogger(__name__).debug("run failed", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for p in paths:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
