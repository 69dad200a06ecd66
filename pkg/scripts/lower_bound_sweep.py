#!/usr/bin/env python3
"""Sentinel-arrival sweep against the oblivious blocker-line adversary.

For each n, builds per-seed oblivious blocker schedules, runs the
difference-based protocol from the single source, and records the first
round a designated sentinel token reaches a designated right-line target.
Prints the per-n medians and the fitted log-log slope, and writes a CSV.

Usage: python scripts/lower_bound_sweep.py [--n 64 144 256 400] [--seeds 5]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from gossipsim.harness import (  # noqa: E402
    ExperimentConfig,
    fit_loglog_slope,
    run_experiment,
    summarize_sweep,
)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, nargs="+", default=[64, 144, 256, 400])
    parser.add_argument("--seeds", type=int, default=5)
    parser.add_argument("--out", default="lower_bound_sweep.csv")
    args = parser.parse_args()

    config = ExperimentConfig(
        adversary={"name": "blocker-oblivious"},
        protocol={"name": "rand-diff"},
        initial={"kind": "single-source"},
        n_list=args.n,
        seeds=list(range(1, args.seeds + 1)),
        max_rounds=12 * max(args.n),
        out=args.out,
        stop_at_sentinel=True,
        measure="sentinel",
    )
    rows = run_experiment(config)
    summary = summarize_sweep(rows, config)
    points = []
    for n in sorted(summary.per_n):
        entry = summary.per_n[n]
        med = entry.get("median")
        print(f"n={n:5d}  sentinel median={med}  runs={entry['count']}")
        if med:
            points.append((n, med))
    if len(points) >= 2:
        print(f"log-log slope: {fit_loglog_slope(points):.3f}")
    print(f"rows written to {args.out}")


if __name__ == "__main__":
    main()
