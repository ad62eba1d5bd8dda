#!/usr/bin/env python3
"""Level-dynamics experiment: head-biased simulated learner on a long-tailed profile.

Writes the per-epoch per-class level history as CSV and prints the final
head/tail decile means.  Mirrors `curaug simulate` but exposes the knobs
directly for quick sweeps.
"""

import argparse
from pathlib import Path

from curaug.curriculum import CurriculumConfig
from curaug.levels import write_history_csv
from curaug.longtail import exp_profile
from curaug.simlearner import SimLearnerParams, decile_means, run_dynamics


def parse_args():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("out_csv", type=Path)
    p.add_argument("--classes", type=int, default=100)
    p.add_argument("--n-max", type=int, default=500)
    p.add_argument("--imbalance", type=float, default=100.0)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--probe-count", type=int, default=10)
    p.add_argument("--threshold", type=float, default=0.6)
    p.add_argument("--rate-scale", type=float, default=0.004)
    p.add_argument("--difficulty", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=0)
    return p.parse_args()


def main():
    args = parse_args()
    profile = exp_profile(args.classes, args.n_max, args.imbalance)
    cfg = CurriculumConfig(
        epochs=args.epochs,
        probe_count=args.probe_count,
        threshold=args.threshold,
        seed=args.seed,
    )
    params = SimLearnerParams.from_profile(
        profile, rate_scale=args.rate_scale, difficulty=args.difficulty, seed=args.seed
    )
    result = run_dynamics(profile, cfg, params)
    write_history_csv(result.table, args.out_csv)
    final = result.history[-1]
    deciles = decile_means(final)
    print(f"wrote {args.out_csv} ({len(result.history)} epochs x {len(final)} classes)")
    print(f"final level means: head decile {deciles[0]:.2f}, tail decile {deciles[-1]:.2f}")


if __name__ == "__main__":
    main()
