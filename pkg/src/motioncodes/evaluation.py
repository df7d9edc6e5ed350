"""Metrics, reports, corruption sweeps, and per-class model comparisons.

Accuracies are stored as fractions; rendered tables show percentages with
two decimals.  Report and CSV writers are byte-deterministic for identical
inputs so reruns can be compared file-wise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .data import Dataset
from .embedding import MissingCodeError
from .verbmodel import Corrupted, FusionMLP, VerbClassifier, VerbPredictor, predict_fused_batch, verb_targets


class LengthMismatchError(ValueError):
    pass


class EmptyError(ValueError):
    pass


class VocabularyMismatchError(ValueError):
    pass


def top1_accuracy(predictions: Sequence, truths: Sequence) -> float:
    """Fraction of exact matches between aligned prediction/truth sequences."""
    if len(predictions) != len(truths):
        raise LengthMismatchError(
            f"{len(predictions)} predictions vs {len(truths)} truths"
        )
    if not predictions:
        raise EmptyError("cannot compute accuracy of zero examples")
    hits = sum(1 for p, t in zip(predictions, truths) if p == t)
    return hits / len(predictions)


def confusion_matrix(
    truths: Sequence[str], predictions: Sequence[str], vocabulary: Sequence[str]
) -> np.ndarray:
    """Counts[true, predicted] over the vocabulary order."""
    index = {verb: i for i, verb in enumerate(vocabulary)}
    matrix = np.zeros((len(vocabulary), len(vocabulary)), dtype=int)
    for t, p in zip(truths, predictions):
        matrix[index[t], index[p]] += 1
    return matrix


def as_percent(fraction: float) -> str:
    return f"{100.0 * fraction:.2f}"


@dataclass(frozen=True)
class EvalReport:
    """Verb and/or motion-code accuracies plus the per-verb confusion matrix."""

    top1_verb: float | None = None
    per_component_acc: tuple[float, ...] | None = None
    exact_code_acc: float | None = None
    vocabulary: tuple[str, ...] | None = None
    per_verb_confusion: tuple[tuple[int, ...], ...] | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        for acc in (self.top1_verb, self.exact_code_acc):
            if acc is not None and not 0 <= acc <= 1:
                raise ValueError("accuracies must lie in [0, 1]")
        if self.per_component_acc is not None and any(
            not 0 <= a <= 1 for a in self.per_component_acc
        ):
            raise ValueError("accuracies must lie in [0, 1]")

    def as_dict(self) -> dict:
        return {
            "top1_verb": self.top1_verb,
            "per_component_acc": list(self.per_component_acc)
            if self.per_component_acc is not None
            else None,
            "exact_code_acc": self.exact_code_acc,
            "vocabulary": list(self.vocabulary) if self.vocabulary else None,
            "per_verb_confusion": [list(r) for r in self.per_verb_confusion]
            if self.per_verb_confusion is not None
            else None,
            "metadata": self.metadata,
        }

    def render(self) -> str:
        lines = []
        if self.top1_verb is not None:
            lines.append(f"top-1 verb accuracy: {as_percent(self.top1_verb)}%")
        if self.exact_code_acc is not None:
            lines.append(f"exact-code accuracy: {as_percent(self.exact_code_acc)}%")
        if self.per_component_acc is not None:
            joined = ", ".join(as_percent(a) + "%" for a in self.per_component_acc)
            lines.append(f"per-component accuracy: {joined}")
        return "\n".join(lines)


def evaluate_verb_predictor(predictor: VerbPredictor, dataset: Dataset) -> EvalReport:
    """Top-1 verb accuracy and confusion matrix of a predictor on a dataset."""
    if not dataset.examples:
        raise EmptyError("cannot evaluate an empty dataset")
    missing = set(dataset.verb_vocab) - set(predictor.vocabulary)
    if missing:
        raise VocabularyMismatchError(f"dataset verbs absent from model: {sorted(missing)}")
    predictions = predictor.predict_labels(dataset)
    truths = [ex.verb for ex in dataset.examples]
    matrix = confusion_matrix(truths, predictions, predictor.vocabulary)
    return EvalReport(
        top1_verb=top1_accuracy(predictions, truths),
        vocabulary=tuple(predictor.vocabulary),
        per_verb_confusion=tuple(tuple(int(v) for v in row) for row in matrix),
    )


def per_class_delta(
    predictor_a: VerbPredictor, predictor_b: VerbPredictor, dataset: Dataset
) -> dict[str, tuple[int, int]]:
    """Per verb: (correct under A but not B, correct under B but not A)."""
    if tuple(predictor_a.vocabulary) != tuple(predictor_b.vocabulary):
        raise VocabularyMismatchError("predictors have different vocabularies")
    missing = set(dataset.verb_vocab) - set(predictor_a.vocabulary)
    if missing:
        raise VocabularyMismatchError(f"dataset verbs absent from models: {sorted(missing)}")
    preds_a = predictor_a.predict_labels(dataset)
    preds_b = predictor_b.predict_labels(dataset)
    deltas: dict[str, tuple[int, int]] = {v: (0, 0) for v in sorted(dataset.verb_vocab)}
    for ex, a, b in zip(dataset.examples, preds_a, preds_b):
        gained, lost = deltas[ex.verb]
        if a == ex.verb and b != ex.verb:
            gained += 1
        elif b == ex.verb and a != ex.verb:
            lost += 1
        deltas[ex.verb] = (gained, lost)
    return deltas


@dataclass(frozen=True)
class SweepRow:
    p: float
    mean_acc: float
    std_acc: float
    seed_accs: tuple[float, ...]


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    seeds: tuple[int, ...]

    def __post_init__(self) -> None:
        ps = [row.p for row in self.rows]
        if len(set(ps)) != len(ps) or ps != sorted(ps):
            raise ValueError("sweep rows must have distinct ascending p values")


def corruption_sweep(
    baseline: VerbClassifier,
    fusion_trainer: Callable[[Corrupted, int], FusionMLP],
    dataset: Dataset,
    p_grid: Sequence[float],
    seeds: Sequence[int],
    noun_vectors=None,
) -> SweepResult:
    """Fused validation accuracy per corruption rate, aggregated over seeds.

    ``fusion_trainer(source, seed)`` must return a fusion model trained with
    that motion source; the same source is used to evaluate on ``dataset``.
    """
    for ex in dataset.examples:
        if ex.code is None:
            raise MissingCodeError(f"example {ex.id!r} has no ground-truth code")
    truths = verb_targets(dataset, baseline.vocabulary)
    rows = []
    for p in sorted(p_grid):
        accs = []
        for seed in seeds:
            source = Corrupted(rate=p, seed=seed)
            fusion = fusion_trainer(source, seed)
            probs = predict_fused_batch(fusion, baseline, source, dataset, noun_vectors)
            accs.append(float((probs.argmax(axis=1) == truths).mean()))
        mean = float(np.mean(accs))
        std = float(np.std(accs, ddof=1)) if len(accs) > 1 else 0.0
        rows.append(SweepRow(float(p), mean, std, tuple(accs)))
    return SweepResult(tuple(rows), tuple(seeds))


# --- writers -------------------------------------------------------------------

def write_sweep_csv(result: SweepResult, path: str | Path) -> None:
    lines = ["p,mean_acc,std_acc,n_seeds"]
    for row in result.rows:
        lines.append(f"{row.p!r},{row.mean_acc!r},{row.std_acc!r},{len(row.seed_accs)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_report_json(report: EvalReport, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report.as_dict(), sort_keys=True, indent=1) + "\n")


def artifact_name(prefix: str, cfg_hash: str, seeds: Sequence[int], ext: str) -> str:
    """File name embedding the config hash and seed list."""
    seed_tag = "-".join(str(s) for s in seeds)
    return f"{prefix}_{cfg_hash[:12]}_s{seed_tag}.{ext}"
