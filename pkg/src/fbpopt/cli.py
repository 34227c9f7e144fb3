"""
fbpopt CLI

    fbpopt <command> -c CONFIG [-o OUT_DIR] [--seed N] [-v]

Commands: solve-state, solve-adjoint, optimize, check-gradient,
check-contraction, check-frechet, check-duality, verify-soc,
estimate-constants, report.

Exit codes: 0 success, 1 solver failure, 2 configuration error,
3 a verified property fails.  ``FBPOPT_THREADS`` (environment or ``.env``)
caps the worker count of the sampling loops.
"""

from __future__ import annotations

import argparse
import logging
import sys

from dotenv import load_dotenv

from .errors import ConvergenceError, DegenerateGeometryError, SingularSystemError
from .orchestrator import RunOrchestrator

COMMANDS = (
    "solve-state",
    "solve-adjoint",
    "optimize",
    "check-gradient",
    "check-contraction",
    "check-frechet",
    "check-duality",
    "verify-soc",
    "estimate-constants",
    "report",
)

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_CONFIG = 2
EXIT_CHECK = 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fbpopt",
        description="Solve and verify the optimal control of a surface-tension free boundary problem.",
    )
    p.add_argument("command", choices=COMMANDS, help="Command to run")
    p.add_argument("-c", "--config", required=True, help="Path to the run configuration (YAML or JSON)")
    p.add_argument("-o", "--out-dir", default=None, help="Write artifacts here (overrides out_dir)")
    p.add_argument("--seed", type=int, default=None, help="Sampling seed (overrides seed)")
    p.add_argument("-v", "--verbose", action="store_true", help="Enable INFO-level logging")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    load_dotenv()

    try:
        orchestrator = RunOrchestrator.from_config(args.config, out_dir=args.out_dir, seed=args.seed)
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        result = orchestrator.run(args.command)
    except (ConvergenceError, SingularSystemError, DegenerateGeometryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        # ledger overrides out of range surface only once the ledger is built
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    for path in result.artifacts:
        print(path)
    if not result.passed:
        print(f"error: {args.command} failed its check", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
