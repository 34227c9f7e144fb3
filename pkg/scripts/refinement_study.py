"""
Mesh Refinement Study

Re-runs one configuration on a ladder of meshes and tabulates the estimated
constants (beta, C_E) next to the interface midpoint value, the cost and the
gradient norm at ``u0``.  Relative changes between successive meshes are
reported; C_E is expected to drift as q approaches 2.

    python scripts/refinement_study.py -c configs/case.yaml --ladder 8 16 32 64
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import pandas as pd

from fbpopt.constants import compute_CE, estimate_beta
from fbpopt.data import parse_config
from fbpopt.errors import ConvergenceError, DegenerateGeometryError
from fbpopt.orchestrator import RunOrchestrator
from fbpopt.output import format_table

logging.basicConfig(level=logging.INFO, format="%(asctime)s  %(levelname)-8s  %(message)s")
log = logging.getLogger("refinement_study")

TRACKED = ("beta", "C_E", "gamma_mid", "cost", "gradient_l2")


def run_one(config_path: Path, n: int, out_dir: Path) -> dict:
    config = parse_config(config_path)
    config = replace(config, n_interval=n, n_square=n, out_dir=str(out_dir / f"n{n}"))
    orchestrator = RunOrchestrator(config)
    data, interval, square = orchestrator.data, orchestrator.interval, orchestrator.square

    row = {
        "n": n,
        "beta": estimate_beta(square, data.p),
        "C_E": compute_CE(interval, square, data.q, seed=config.seed),
    }
    try:
        u0 = orchestrator.u0
        pair, trace = orchestrator.state.solve_state(u0)
        row["iterations"] = trace.iterations
        row["gamma_mid"] = float(pair.gamma.evaluate(0.5))
        row["cost"] = orchestrator.cost.eval_cost(u0)
        row["gradient_l2"] = orchestrator.state.l2_norm(orchestrator.cost.eval_gradient(u0))
    except (ConvergenceError, DegenerateGeometryError) as exc:
        log.warning("n=%d: state solve failed: %s", n, exc)
    return row


def with_changes(frame: pd.DataFrame) -> pd.DataFrame:
    for column in TRACKED:
        if column in frame:
            frame[f"{column}_change"] = frame[column].pct_change().abs()
    return frame


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("-c", "--config", required=True, type=Path, help="Run configuration")
    parser.add_argument("--ladder", nargs="+", type=int, default=[8, 16, 32, 64], help="Mesh sizes")
    parser.add_argument("-o", "--out-dir", type=Path, default=Path("results/refinement"))
    args = parser.parse_args()

    rows = []
    for n in sorted(args.ladder):
        log.info("Mesh n=%d ...", n)
        rows.append(run_one(args.config, n, args.out_dir))

    frame = with_changes(pd.DataFrame(rows))
    path = args.out_dir / "refinement.csv"
    format_table(frame, path)
    log.info("Wrote %s", path)
    print(frame.to_string(index=False))
    return 0


if __name__ == "__main__":
    sys.exit(main())
