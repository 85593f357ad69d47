#!/usr/bin/env python3
"""Ablation table over the synthetic suite: sampling strategy vs. its variants.

    python3 scripts/ablation_table.py [--per-type 100] [--metric cd,hd,wd] [--workers 4]
"""

import argparse

from specrecon.cli import parse_metrics, score_table
from specrecon.pipeline import SUITE_PER_TYPE, SUITE_SEED, run_ablation, suite_curves


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=SUITE_SEED)
    ap.add_argument("--per-type", type=int, default=SUITE_PER_TYPE)
    ap.add_argument("--metric", default="cd,hd,wd")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    rows = run_ablation(suite_curves(args.seed, args.per_type, args.workers), workers=args.workers)
    print(score_table(rows, parse_metrics(args.metric)), end="")


if __name__ == "__main__":
    main()
