#!/usr/bin/env python3
"""Score the default pipeline on the versioned synthetic suite.

Prints a per-type table and the overall means, 4 decimals.

    python3 scripts/fidelity_suite.py [--seed 2024] [--per-type 100] [--workers 4]
"""

import argparse
import time
from collections import defaultdict

from specrecon.core import SpectrumType
from specrecon.pipeline import METRICS, SUITE_PER_TYPE, SUITE_SEED, map_ordered, run_curve, suite_curves, summarize


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=SUITE_SEED)
    ap.add_argument("--per-type", type=int, default=SUITE_PER_TYPE)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    t0 = time.perf_counter()
    suite = suite_curves(args.seed, args.per_type, args.workers)
    reports = map_ordered(lambda s: run_curve(s.curve, smooth=s.smooth).report, suite, args.workers)
    by_type = defaultdict(list)
    for s, r in zip(suite, reports):
        by_type[s.type].append(r)

    print("| Type | n | CD | HD | WD | R |")
    print("|---|---|---|---|---|---|")
    rows = [(t.value, summarize(by_type[t])) for t in SpectrumType] + [("all", summarize(reports))]
    for name, s in rows:
        cells = " | ".join(f"{s[f'mean_score_{k}']:.4f}" for k in METRICS)
        print(f"| {name} | {s['n_curves']} | {cells} | {s['mean_reduction_ratio']:.4f} |")
    print(f"\n{len(reports)} curves in {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
