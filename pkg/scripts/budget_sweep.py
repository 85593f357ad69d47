#!/usr/bin/env python3
"""Fidelity as a function of the point budget, one row per target fraction.

    python3 scripts/budget_sweep.py [--per-type 20] [--fractions 0.067,0.1,0.15,0.2]
"""

import argparse

from specrecon.pipeline import METRICS, PipelineConfig, run_curve, suite_curves, summarize, with_budget


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--per-type", type=int, default=20)
    ap.add_argument("--fractions", default="0.067,0.1,0.15,0.2")
    args = ap.parse_args()
    suite = suite_curves(per_type=args.per_type)
    print("| fraction | CD | HD | WD | R |")
    print("|---|---|---|---|---|")
    for f in (float(v) for v in args.fractions.split(",")):
        cfg = with_budget(PipelineConfig(), target_fraction=f)
        s = summarize([run_curve(c.curve, cfg, c.smooth).report for c in suite])
        cells = " | ".join(f"{s[f'mean_score_{k}']:.4f}" for k in METRICS)
        print(f"| {f:g} | {cells} | {s['mean_reduction_ratio']:.4f} |")


if __name__ == "__main__":
    main()
