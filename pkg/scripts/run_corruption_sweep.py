#!/usr/bin/env python3
"""Accuracy-vs-motion-quality sweep: fused top-1 as corruption grows.

Trains one baseline verb classifier, then for each corruption rate p trains
a fusion MLP whose motion features are ground-truth codes with each
component independently resampled at rate p, and plots the accuracy trend
as a CSV (one row per p with mean and std over seeds).
"""

import argparse
from pathlib import Path

from motioncodes import data
from motioncodes.config import TrainConfig, fusion_defaults
from motioncodes.evaluation import corruption_sweep, write_sweep_csv
from motioncodes.verbmodel import train_baseline, train_fusion


def parse_args():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    ap.add_argument("--p-grid", type=float, nargs="+", default=[0.0, 0.25, 0.5, 0.75, 1.0])
    ap.add_argument("--n-train", type=int, default=1200)
    ap.add_argument("--n-val", type=int, default=400)
    ap.add_argument("--feature-dim", type=int, default=24)
    ap.add_argument("--noise", type=float, default=0.3)
    ap.add_argument("--verb-count", type=int, default=33)
    ap.add_argument("--code-count", type=int, default=32)
    ap.add_argument("--epochs", type=int, default=30)
    ap.add_argument("--learning-rate", type=float, default=2e-3)
    ap.add_argument("--out", type=Path, default=Path("runs/corruption_sweep.csv"))
    return ap.parse_args()


def main():
    args = parse_args()
    cfg = data.SynthConfig(
        n_train=args.n_train,
        n_val=args.n_val,
        feature_dim=args.feature_dim,
        noise=args.noise,
        verb_count=args.verb_count,
        codes_per_verb=1,
        code_count=args.code_count,
        noun_informativeness=0.9,
        seed=args.seeds[0],
    )
    train, val = data.synth_generate(cfg)
    tc = TrainConfig(seed=args.seeds[0], epochs=args.epochs, learning_rate=args.learning_rate)
    baseline, history = train_baseline(train, val, tc)
    print(f"baseline top-1: {history[-1]['val_top1_acc']:.4f}")

    def trainer(source, seed):
        return train_fusion(baseline, source, train, val, fusion_defaults(seed=seed))[0]

    result = corruption_sweep(baseline, trainer, val, args.p_grid, args.seeds)
    for row in result.rows:
        print(f"p={row.p:.2f}  mean={row.mean_acc:.4f}  std={row.std_acc:.4f}")
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(result, args.out)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
