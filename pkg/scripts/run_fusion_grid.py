#!/usr/bin/env python3
"""Verb-classification grid: baselines, fused variants, and GT-motion fusion.

Reproduces the ablation structure of the verb-classification comparison at
desk scale: for each seed it trains the baselines V_x and V_xz, the motion
models M_x and M_xz, the four fused variants V^(V, M), and a fused model on
ground-truth motion embeddings, then reports mean top-1 accuracy per row.
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from motioncodes import data
from motioncodes.config import TrainConfig, fusion_defaults
from motioncodes.embedding import train_embedding
from motioncodes.verbmodel import (
    GroundTruth,
    Predicted,
    train_baseline,
    train_fusion,
)


def parse_args():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--n-train", type=int, default=1200)
    ap.add_argument("--n-val", type=int, default=400)
    ap.add_argument("--feature-dim", type=int, default=24)
    ap.add_argument("--noise", type=float, default=0.3)
    ap.add_argument("--verb-count", type=int, default=33)
    ap.add_argument("--code-count", type=int, default=32)
    ap.add_argument("--epochs", type=int, default=30)
    ap.add_argument("--learning-rate", type=float, default=2e-3)
    ap.add_argument("--out", type=Path, default=Path("runs/fusion_grid.csv"))
    return ap.parse_args()


def main():
    args = parse_args()
    grid: dict[str, list[float]] = {}

    def record(name: str, acc: float, seed: int):
        grid.setdefault(name, []).append(acc)
        print(f"seed={seed} {name}: top1={acc:.4f}")

    for seed in args.seeds:
        cfg = data.SynthConfig(
            n_train=args.n_train,
            n_val=args.n_val,
            feature_dim=args.feature_dim,
            noise=args.noise,
            verb_count=args.verb_count,
            codes_per_verb=1,
            code_count=args.code_count,
            noun_informativeness=0.9,
            seed=seed,
        )
        train, val = data.synth_generate(cfg)
        nouns = data.WordVectorTable.one_hot(train.noun_vocab)

        baselines = {}
        for name, use_nouns in (("V_x", False), ("V_xz", True)):
            tc = TrainConfig(seed=seed, epochs=args.epochs,
                             learning_rate=args.learning_rate, use_nouns=use_nouns)
            clf, history = train_baseline(train, val, tc, nouns if use_nouns else None)
            baselines[name] = (clf, use_nouns)
            record(name, history[-1]["val_top1_acc"], seed)

        motions = {}
        for name, use_nouns in (("M_x", False), ("M_xz", True)):
            tc = TrainConfig(seed=seed, epochs=args.epochs,
                             learning_rate=args.learning_rate, use_nouns=use_nouns)
            model, _ = train_embedding(train, val, tc, nouns if use_nouns else None)
            motions[name] = Predicted(model, nouns if use_nouns else None)

        for vname, (clf, v_nouns) in baselines.items():
            for mname, source in motions.items():
                _, history = train_fusion(
                    clf, source, train, val, fusion_defaults(seed=seed),
                    nouns if v_nouns else None,
                )
                record(f"fused({vname},{mname})", history[-1]["val_top1_acc"], seed)

        clf, v_nouns = baselines["V_x"]
        _, history = train_fusion(
            clf, GroundTruth(), train, val, fusion_defaults(seed=seed), None
        )
        record("fused(V_x,GT)", history[-1]["val_top1_acc"], seed)

    args.out.parent.mkdir(parents=True, exist_ok=True)
    with args.out.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", "mean_top1", "std_top1", "n_seeds"])
        print("\nmodel                         mean top-1")
        for name, accs in grid.items():
            std = float(np.std(accs, ddof=1)) if len(accs) > 1 else 0.0
            writer.writerow([name, float(np.mean(accs)), std, len(accs)])
            print(f"{name:28s}  {100 * np.mean(accs):6.2f}%")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
