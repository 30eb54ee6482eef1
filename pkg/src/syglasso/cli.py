"""Command-line entry point: ``syglasso <command> --spec FILE [--out DIR]``.

Exit codes: 0 success, 2 invalid spec or input file, 3 numerical failure,
1 other I/O errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import experiments
from .config import SpecError, load_spec
from .solver import NumericalError
from .sygt import SygtFormatError

log = logging.getLogger("syglasso")

COMMANDS = {
    "convergence": "convergence",
    "sweep": "lambda_sweep",
    "mismatch": "mismatch",
    "fit": "fit_external",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="syglasso", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "gen": "write a synthetic SYGT dataset and its true factors",
        "fit": "fit a SYGT dataset (kind = fit_external)",
        "sweep": "support recovery over a penalty grid (kind = lambda_sweep)",
        "mismatch": "recovery under misspecified generators (kind = mismatch)",
        "convergence": "per-sweep statistical and optimization errors (kind = convergence)",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--spec", required=True, type=Path, help="experiment spec file")
        p.add_argument("--out", type=Path, help="output directory (overrides the spec's out)")
        p.add_argument("--seed", type=int, help="run this single seed instead of the spec's seeds")
        p.add_argument("--threads", type=int, default=1, help="worker threads for grid cells")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def run(args: argparse.Namespace) -> int:
    spec = load_spec(args.spec)
    if args.seed is not None:
        if args.seed < 0:
            raise SpecError("--seed must be nonnegative")
        spec.seeds = [args.seed]
    if args.threads < 1:
        raise SpecError("--threads must be positive")
    if args.command == "gen":
        # with no --out, gen writes to the spec's data path so fit can read it back
        if not spec.modes:
            raise SpecError("gen needs mode<k> graphs in the spec")
        if args.out is not None:
            path = experiments.generate(spec, args.out)
        elif spec.data is not None:
            path = experiments.generate(spec, spec.data.parent, spec.data.name)
        elif spec.out is not None:
            path = experiments.generate(spec, spec.out)
        else:
            raise SpecError("no output location: pass --out or set data or out in the spec")
        log.info("wrote %s", path)
        return 0

    out = args.out or spec.out
    if out is None:
        raise SpecError("no output directory: pass --out or set out in the spec")
    kind = COMMANDS[args.command]
    if spec.kind != kind:
        raise SpecError(f"command {args.command!r} needs kind = {kind}, spec has {spec.kind}")
    records = experiments.RUNNERS[kind](spec, out, threads=args.threads)
    log.info("%d runs written to %s", len(records), out)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return run(args)
    except (SpecError, SygtFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
