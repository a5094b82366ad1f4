#!/usr/bin/env python3
"""Compare the three distance metrics on one synthetic cohort.

Emits a frontier table per metric (best yield at each precision floor)
plus a combined summary, the data behind precision-vs-yield charts.

    python scripts/metric_comparison.py --seed 7 --out runs/metrics
"""

import argparse
from pathlib import Path

from fill import report
from fill.distance import Metric, distance_matrix
from fill.synth import default_spec, synth_cohort
from fill.tune import precision_yield_frontier

FLOORS = (0.80, 0.85, 0.90, 0.95)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--out", default="runs/metric_comparison")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    cohort = synth_cohort(default_spec(seed=args.seed))
    summary = {}
    for metric in (Metric.JACCARD, Metric.MANHATTAN, Metric.GOWER):
        distances = distance_matrix(cohort, metric)
        points = precision_yield_frontier(
            cohort, metric, thresholds=FLOORS, distances=distances
        )
        summary[metric.value] = report.frontier_tree(points)
        for p in points:
            if p.feasible:
                print(
                    f"{metric.value:9s} floor={p.min_precision:.2f} "
                    f"precision={p.achieved_precision:.4f} "
                    f"tp={p.true_positives} yield={p.yield_proportion:.4f}"
                )
            else:
                print(f"{metric.value:9s} floor={p.min_precision:.2f} infeasible")
    report.write_tree(summary, out / "frontiers.json")
    print(f"wrote {out / 'frontiers.json'}")


if __name__ == "__main__":
    main()
