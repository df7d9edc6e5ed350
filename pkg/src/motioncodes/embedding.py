"""Motion-code embedding model: shared trunk, five softmax heads, training.

Inputs are feature vectors, optionally concatenated with a noun vector;
the output embedding is the 15-dimensional concatenation of the five heads'
probability distributions in component order (interaction, recurrence,
prismatic, revolute, passive).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import nn
from .config import TrainConfig
from .data import Dataset, WordVectorTable
from .taxonomy import (
    COMPONENT_NAMES,
    MotionCode,
    class_indices_to_code,
    code_to_class_indices,
    component_classes,
)


class EmptyDatasetError(ValueError):
    pass


class MissingCodeError(ValueError):
    pass


class NounRequiredError(ValueError):
    pass


class NounUnexpectedError(ValueError):
    pass


@dataclass(frozen=True)
class LambdaWeights:
    """Per-component loss weights; all non-negative, default all 1."""

    values: tuple[float, float, float, float, float] = (1.0, 1.0, 1.0, 1.0, 1.0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))
        if len(self.values) != 5 or any(v < 0 for v in self.values):
            raise ValueError("lambda weights must be 5 non-negative reals")


@dataclass
class MotionModel:
    """Trunk into five classifier heads with output sizes [5, 2, 3, 3, 2]."""

    trunk: nn.DenseParams
    heads: list[nn.DenseParams]
    uses_nouns: bool = False
    noun_dim: int = 0

    def __post_init__(self) -> None:
        counts = component_classes()
        if len(self.heads) != len(counts):
            raise ValueError(f"expected {len(counts)} heads")
        for head, count in zip(self.heads, counts):
            if head.output_dim != count:
                raise ValueError(
                    f"head output {head.output_dim} != class count {count}"
                )
            if head.input_dim != self.trunk.output_dim:
                raise nn.DimensionMismatchError(
                    "head input width does not match trunk output"
                )
        if self.uses_nouns and self.noun_dim < 1:
            raise ValueError("noun-conditioned model requires noun_dim >= 1")
        if not self.uses_nouns and self.noun_dim != 0:
            raise ValueError("noun_dim must be 0 when nouns are unused")

    @property
    def feature_dim(self) -> int:
        return self.trunk.input_dim - self.noun_dim


def init_motion_model(
    feature_dim: int,
    config: TrainConfig,
    noun_dim: int = 0,
) -> MotionModel:
    """Seeded Glorot init of trunk and heads; noun input is concatenated."""
    uses_nouns = config.use_nouns
    if uses_nouns and noun_dim < 1:
        raise NounRequiredError("use_nouns requires a positive noun_dim")
    in_dim = feature_dim + (noun_dim if uses_nouns else 0)
    rng = np.random.default_rng([config.seed, 0])
    trunk = nn.init_dense(rng, [in_dim, config.hidden_dim], [nn.RELU])
    heads = [
        nn.init_dense(rng, [config.hidden_dim, count], [nn.IDENTITY])
        for count in component_classes()
    ]
    return MotionModel(trunk, heads, uses_nouns, noun_dim if uses_nouns else 0)


def _model_input(
    model: MotionModel, features: np.ndarray, noun: np.ndarray | None
) -> np.ndarray:
    feats = np.asarray(features, dtype=float)
    if model.uses_nouns:
        if noun is None:
            raise NounRequiredError("model is noun-conditioned but no noun vector given")
        noun = np.asarray(noun, dtype=float)
        if noun.shape != (model.noun_dim,):
            raise nn.DimensionMismatchError(
                f"noun vector width {noun.shape} != {model.noun_dim}"
            )
        return np.concatenate([feats, noun])
    if noun is not None:
        raise NounUnexpectedError("model does not take noun vectors")
    return feats


def _blocks_from_inputs(model: MotionModel, inputs: np.ndarray) -> list[np.ndarray]:
    hidden, _ = nn.forward(model.trunk, inputs)
    return [nn.softmax(nn.forward(head, hidden)[0]) for head in model.heads]


def predict_components(
    model: MotionModel, features: np.ndarray, noun: np.ndarray | None = None
) -> list[np.ndarray]:
    """Five probability blocks (sizes 5, 2, 3, 3, 2), each summing to 1."""
    return _blocks_from_inputs(model, _model_input(model, features, noun))


def embed(
    model: MotionModel, features: np.ndarray, noun: np.ndarray | None = None
) -> np.ndarray:
    """The 15-dimensional concatenation of the five probability blocks."""
    return np.concatenate(predict_components(model, features, noun))


def split_blocks(embedding: np.ndarray) -> list[np.ndarray]:
    """Split a 15-vector back into the five component blocks."""
    blocks, offset = [], 0
    for count in component_classes():
        blocks.append(np.asarray(embedding[offset : offset + count]))
        offset += count
    return blocks


def infer_code(blocks: Sequence[np.ndarray]) -> MotionCode:
    """Argmax per block (ties to the lowest index) mapped to a valid code."""
    return class_indices_to_code(int(np.argmax(b)) for b in blocks)


def loss_LM(
    blocks: Sequence[np.ndarray],
    gt: MotionCode,
    lambdas: LambdaWeights = LambdaWeights(),
) -> float:
    """Weighted sum of the five per-component cross-entropies."""
    indices = code_to_class_indices(gt)
    return sum(
        lam * nn.cross_entropy(block, idx)
        for lam, block, idx in zip(lambdas.values, blocks, indices)
    )


def code_targets(dataset: Dataset) -> np.ndarray:
    """(N, 5) class-index targets; raises if any example lacks a code."""
    rows = []
    for ex in dataset.examples:
        if ex.code is None:
            raise MissingCodeError(f"example {ex.id!r} has no ground-truth code")
        rows.append(code_to_class_indices(ex.code))
    return np.asarray(rows, dtype=int)


def assemble_inputs(
    dataset: Dataset,
    use_nouns: bool,
    noun_vectors: WordVectorTable | None,
) -> np.ndarray:
    """Feature matrix, with per-example noun vectors appended when conditioned."""
    feats = dataset.feature_matrix()
    if not use_nouns:
        return feats
    if noun_vectors is None:
        raise NounRequiredError("noun-conditioned run requires a noun-vector table")
    nouns = np.stack([noun_vectors.lookup(ex.noun) for ex in dataset.examples])
    return np.hstack([feats, nouns])


def train_embedding(
    train: Dataset,
    val: Dataset,
    config: TrainConfig,
    noun_vectors: WordVectorTable | None = None,
) -> tuple[MotionModel, list[dict]]:
    """Mini-batch Adam on the combined per-component loss.

    History rows carry epoch, lr, mean train loss, validation exact-code
    accuracy and the five per-component validation accuracies.  Deterministic
    under (datasets, config, seed).
    """
    if not train.examples or not val.examples:
        raise EmptyDatasetError("train and val datasets must be non-empty")
    model = init_motion_model(
        train.feature_dim,
        config,
        noun_dim=noun_vectors.dim if (config.use_nouns and noun_vectors) else 0,
    )
    inputs = assemble_inputs(train, config.use_nouns, noun_vectors)
    targets = code_targets(train)
    val_inputs = assemble_inputs(val, config.use_nouns, noun_vectors)
    val_targets = code_targets(val)

    def epoch_end(_epoch: int) -> dict:
        stats = _accuracy_from_inputs(model, val_inputs, val_targets)
        row = {"val_exact_acc": stats.exact}
        for name, acc in zip(COMPONENT_NAMES, stats.per_component):
            row[f"val_acc_{name}"] = acc
        return row

    history, _ = nn.fit_multihead(
        model.trunk,
        model.heads,
        inputs,
        targets,
        config.lambda_weights,
        epochs=config.epochs,
        batch_size=config.batch_size,
        lr=config.learning_rate,
        lr_decay=config.lr_decay,
        lr_decay_every=config.lr_decay_every,
        seed=[config.seed, 1],
        epoch_end=epoch_end,
    )
    return model, history


@dataclass(frozen=True)
class EmbeddingEval:
    per_component: tuple[float, float, float, float, float]
    exact: float


def _accuracy_from_inputs(
    model: MotionModel, inputs: np.ndarray, targets: np.ndarray
) -> EmbeddingEval:
    hidden, _ = nn.forward(model.trunk, inputs)
    hits = np.ones(len(targets), dtype=bool)
    per_component = []
    for k, head in enumerate(model.heads):
        logits, _ = nn.forward(head, hidden)
        pred = logits.argmax(axis=1)
        match = pred == targets[:, k]
        per_component.append(float(match.mean()))
        hits &= match
    return EmbeddingEval(tuple(per_component), float(hits.mean()))


def eval_embedding(
    model: MotionModel,
    dataset: Dataset,
    noun_vectors: WordVectorTable | None = None,
) -> EmbeddingEval:
    """Per-component and exact-code (all five match) top-1 accuracies."""
    if not dataset.examples:
        raise EmptyDatasetError("cannot evaluate an empty dataset")
    inputs = assemble_inputs(dataset, model.uses_nouns, noun_vectors)
    return _accuracy_from_inputs(model, inputs, code_targets(dataset))


def write_history_csv(history: list[dict], path: str | Path) -> None:
    """One row per epoch; column order follows the first row's keys."""
    if not history:
        raise ValueError("empty history")
    with Path(path).open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(history[0].keys()))
        writer.writeheader()
        for row in history:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})


def save_motion_model(
    path: str | Path,
    model: MotionModel,
    config_hash: str = "",
    optimizer: nn.AdamState | None = None,
) -> None:
    payload = {
        "config_hash": config_hash,
        "meta": {
            "uses_nouns": model.uses_nouns,
            "noun_dim": model.noun_dim,
            "feature_dim": model.feature_dim,
        },
        "trunk": nn.dense_to_jsonable(model.trunk),
        "heads": [nn.dense_to_jsonable(h) for h in model.heads],
        "optimizer": nn.adam_to_jsonable(optimizer) if optimizer else None,
    }
    nn.write_checkpoint(path, "motion_model", payload)


def load_motion_model(path: str | Path) -> MotionModel:
    doc = nn.read_checkpoint(path, "motion_model")
    return MotionModel(
        trunk=nn.dense_from_jsonable(doc["trunk"]),
        heads=[nn.dense_from_jsonable(h) for h in doc["heads"]],
        uses_nouns=doc["meta"]["uses_nouns"],
        noun_dim=doc["meta"]["noun_dim"],
    )
