"""Baseline verb classifier, fusion MLP, and motion-embedding sources.

The fusion model consumes the concatenation of the frozen baseline's verb
probabilities and a 15-dimensional motion embedding drawn from one of three
sources: a trained motion model, ground-truth one-hot codes, or ground truth
corrupted at a per-component rate (for accuracy-vs-quality ablations).
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence, Union

import numpy as np

from . import nn
from .config import TrainConfig
from .data import Dataset, Example, WordVectorTable
from .embedding import (
    EmptyDatasetError,
    MissingCodeError,
    MotionModel,
    NounRequiredError,
    assemble_inputs,
    embed,
)
from .taxonomy import (
    EMBEDDING_DIM,
    code_to_class_indices,
    component_classes,
    one_hot_embedding,
)


class UnknownVerbLabelError(ValueError):
    pass


@dataclass
class VerbClassifier:
    """Trunk plus a single softmax head over the verb vocabulary."""

    trunk: nn.DenseParams
    head: nn.DenseParams
    vocabulary: tuple[str, ...]
    uses_nouns: bool = False
    noun_dim: int = 0

    def __post_init__(self) -> None:
        self.vocabulary = tuple(self.vocabulary)
        if len(set(self.vocabulary)) != len(self.vocabulary):
            raise ValueError("verb vocabulary contains duplicates")
        if self.head.output_dim != len(self.vocabulary):
            raise ValueError("head output width must equal vocabulary size")

    @property
    def feature_dim(self) -> int:
        return self.trunk.input_dim - self.noun_dim


@dataclass
class FusionMLP:
    """Exactly two fully connected layers: |verbs|+15 -> hidden -> |verbs|."""

    params: nn.DenseParams
    vocabulary: tuple[str, ...]

    def __post_init__(self) -> None:
        self.vocabulary = tuple(self.vocabulary)
        if len(self.params.layers) != 2:
            raise ValueError("fusion MLP must have exactly 2 layers")
        expected_in = len(self.vocabulary) + EMBEDDING_DIM
        if self.params.input_dim != expected_in:
            raise nn.DimensionMismatchError(
                f"fusion input {self.params.input_dim} != |verbs|+15 = {expected_in}"
            )
        if self.params.output_dim != len(self.vocabulary):
            raise nn.DimensionMismatchError("fusion output must equal |verbs|")


@dataclass(frozen=True)
class Predicted:
    """Motion features from a trained embedding model."""

    model: MotionModel
    noun_vectors: WordVectorTable | None = None


@dataclass(frozen=True)
class GroundTruth:
    """Motion features are the true one-hot code blocks."""


@dataclass(frozen=True)
class Corrupted:
    """Ground truth with each component independently resampled at rate p.

    A resampled component is forced to a uniformly random *different* class,
    so the blocks stay valid one-hots.  Draws are a pure function of
    (seed, example id).
    """

    rate: float
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError("corruption rate must lie in [0, 1]")


MotionSource = Union[Predicted, GroundTruth, Corrupted]


def verb_targets(dataset: Dataset, vocabulary: Sequence[str]) -> np.ndarray:
    index = {verb: i for i, verb in enumerate(vocabulary)}
    rows = []
    for ex in dataset.examples:
        if ex.verb not in index:
            raise UnknownVerbLabelError(f"verb {ex.verb!r} not in model vocabulary")
        rows.append(index[ex.verb])
    return np.asarray(rows, dtype=int)


def init_verb_classifier(
    feature_dim: int,
    vocabulary: tuple[str, ...],
    config: TrainConfig,
    noun_dim: int = 0,
) -> VerbClassifier:
    uses_nouns = config.use_nouns
    if uses_nouns and noun_dim < 1:
        raise NounRequiredError("use_nouns requires a positive noun_dim")
    in_dim = feature_dim + (noun_dim if uses_nouns else 0)
    rng = np.random.default_rng([config.seed, 2])
    trunk = nn.init_dense(rng, [in_dim, config.hidden_dim], [nn.RELU])
    head = nn.init_dense(rng, [config.hidden_dim, len(vocabulary)], [nn.IDENTITY])
    return VerbClassifier(trunk, head, vocabulary, uses_nouns, noun_dim if uses_nouns else 0)


def train_baseline(
    train: Dataset,
    val: Dataset,
    config: TrainConfig,
    noun_vectors: WordVectorTable | None = None,
) -> tuple[VerbClassifier, list[dict]]:
    """Adam on verb cross-entropy with the standard decayed schedule."""
    if not train.examples or not val.examples:
        raise EmptyDatasetError("train and val datasets must be non-empty")
    clf = init_verb_classifier(
        train.feature_dim,
        train.verb_vocab,
        config,
        noun_dim=noun_vectors.dim if (config.use_nouns and noun_vectors) else 0,
    )
    inputs = assemble_inputs(train, config.use_nouns, noun_vectors)
    targets = verb_targets(train, clf.vocabulary)[:, None]
    val_inputs = assemble_inputs(val, config.use_nouns, noun_vectors)
    val_targets = verb_targets(val, clf.vocabulary)

    def epoch_end(_epoch: int) -> dict:
        probs = _verb_probs_from_inputs(clf, val_inputs)
        return {"val_top1_acc": float((probs.argmax(axis=1) == val_targets).mean())}

    history, _ = nn.fit_multihead(
        clf.trunk,
        [clf.head],
        inputs,
        targets,
        [1.0],
        epochs=config.epochs,
        batch_size=config.batch_size,
        lr=config.learning_rate,
        lr_decay=config.lr_decay,
        lr_decay_every=config.lr_decay_every,
        seed=[config.seed, 3],
        epoch_end=epoch_end,
    )
    return clf, history


def _verb_probs_from_inputs(clf: VerbClassifier, inputs: np.ndarray) -> np.ndarray:
    hidden, _ = nn.forward(clf.trunk, inputs)
    logits, _ = nn.forward(clf.head, hidden)
    return nn.softmax(logits)


def predict_verb(
    clf: VerbClassifier, features: np.ndarray, noun: np.ndarray | None = None
) -> np.ndarray:
    """Probability distribution over the verb vocabulary for one example."""
    feats = np.asarray(features, dtype=float)
    if clf.uses_nouns:
        if noun is None:
            raise NounRequiredError("classifier is noun-conditioned")
        feats = np.concatenate([feats, np.asarray(noun, dtype=float)])
    elif noun is not None:
        raise nn.DimensionMismatchError("classifier does not take noun vectors")
    return _verb_probs_from_inputs(clf, feats[None, :])[0]


def predict_verb_batch(
    clf: VerbClassifier,
    dataset: Dataset,
    noun_vectors: WordVectorTable | None = None,
) -> np.ndarray:
    return _verb_probs_from_inputs(
        clf, assemble_inputs(dataset, clf.uses_nouns, noun_vectors)
    )


def _example_rng(seed: int, example_id: str) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(example_id.encode())])


def motion_features(source: MotionSource, example: Example) -> np.ndarray:
    """The 15-dimensional motion embedding of one example under a source."""
    if isinstance(source, Predicted):
        noun_vec = None
        if source.model.uses_nouns:
            if source.noun_vectors is None:
                raise NounRequiredError("predicted source needs a noun-vector table")
            noun_vec = source.noun_vectors.lookup(example.noun)
        return embed(source.model, example.features, noun_vec)
    if example.code is None:
        raise MissingCodeError(f"example {example.id!r} has no ground-truth code")
    if isinstance(source, GroundTruth):
        return one_hot_embedding(example.code)
    if isinstance(source, Corrupted):
        indices = list(code_to_class_indices(example.code))
        counts = component_classes()
        rng = _example_rng(source.seed, example.id)
        out = np.zeros(EMBEDDING_DIM)
        offset = 0
        for k, count in enumerate(counts):
            idx = indices[k]
            if rng.random() < source.rate:
                idx = (idx + int(rng.integers(1, count))) % count
            out[offset + idx] = 1.0
            offset += count
        return out
    raise TypeError(f"unknown motion source {source!r}")


def motion_features_batch(source: MotionSource, dataset: Dataset) -> np.ndarray:
    if isinstance(source, Predicted):
        inputs = assemble_inputs(dataset, source.model.uses_nouns, source.noun_vectors)
        hidden, _ = nn.forward(source.model.trunk, inputs)
        blocks = [nn.softmax(nn.forward(h, hidden)[0]) for h in source.model.heads]
        return np.hstack(blocks)
    return np.stack([motion_features(source, ex) for ex in dataset.examples])


def fusion_inputs(
    baseline: VerbClassifier,
    source: MotionSource,
    dataset: Dataset,
    noun_vectors: WordVectorTable | None = None,
) -> np.ndarray:
    """Concatenated (verb probabilities, motion features): width |verbs|+15."""
    return np.hstack(
        [
            predict_verb_batch(baseline, dataset, noun_vectors),
            motion_features_batch(source, dataset),
        ]
    )


def train_fusion(
    baseline: VerbClassifier,
    source: MotionSource,
    train: Dataset,
    val: Dataset,
    config: TrainConfig,
    noun_vectors: WordVectorTable | None = None,
) -> tuple[FusionMLP, list[dict]]:
    """Train the 2-layer fusion MLP; baseline and source stay frozen.

    Fusion inputs are precomputed once, so no gradient can reach the
    baseline or the motion source.
    """
    if not train.examples or not val.examples:
        raise EmptyDatasetError("train and val datasets must be non-empty")
    vocab = baseline.vocabulary
    inputs = fusion_inputs(baseline, source, train, noun_vectors)
    targets = verb_targets(train, vocab)[:, None]
    val_inputs = fusion_inputs(baseline, source, val, noun_vectors)
    val_targets = verb_targets(val, vocab)

    rng = np.random.default_rng([config.seed, 4])
    layers = nn.init_dense(
        rng,
        [inputs.shape[1], config.hidden_dim, len(vocab)],
        [nn.RELU, nn.IDENTITY],
    ).layers
    trunk = nn.DenseParams([layers[0]])
    head = nn.DenseParams([layers[1]])
    fusion = FusionMLP(nn.DenseParams(layers), vocab)  # shares the layer arrays

    def epoch_end(_epoch: int) -> dict:
        hidden, _ = nn.forward(trunk, val_inputs)
        logits, _ = nn.forward(head, hidden)
        return {"val_top1_acc": float((logits.argmax(axis=1) == val_targets).mean())}

    history, _ = nn.fit_multihead(
        trunk,
        [head],
        inputs,
        targets,
        [1.0],
        epochs=config.epochs,
        batch_size=config.batch_size,
        lr=config.learning_rate,
        lr_decay=config.lr_decay,
        lr_decay_every=config.lr_decay_every,
        seed=[config.seed, 5],
        epoch_end=epoch_end,
    )
    return fusion, history


def predict_fused(
    fusion: FusionMLP,
    baseline: VerbClassifier,
    source: MotionSource,
    example: Example,
    noun_vectors: WordVectorTable | None = None,
) -> np.ndarray:
    """Final verb probability distribution for one example."""
    noun_vec = noun_vectors.lookup(example.noun) if baseline.uses_nouns and noun_vectors else None
    if baseline.uses_nouns and noun_vec is None:
        raise NounRequiredError("baseline is noun-conditioned")
    verb_probs = predict_verb(baseline, example.features, noun_vec)
    combined = np.concatenate([verb_probs, motion_features(source, example)])
    out, _ = nn.forward(fusion.params, combined)
    return nn.softmax(out)


def predict_fused_batch(
    fusion: FusionMLP,
    baseline: VerbClassifier,
    source: MotionSource,
    dataset: Dataset,
    noun_vectors: WordVectorTable | None = None,
) -> np.ndarray:
    out, _ = nn.forward(fusion.params, fusion_inputs(baseline, source, dataset, noun_vectors))
    return nn.softmax(out)


@dataclass(frozen=True)
class VerbPredictor:
    """A vocabulary plus a batch label predictor, for model comparisons."""

    vocabulary: tuple[str, ...]
    probs_fn: Callable[[Dataset], np.ndarray]

    def predict_labels(self, dataset: Dataset) -> list[str]:
        probs = self.probs_fn(dataset)
        return [self.vocabulary[i] for i in probs.argmax(axis=1)]


def baseline_predictor(
    clf: VerbClassifier, noun_vectors: WordVectorTable | None = None
) -> VerbPredictor:
    return VerbPredictor(clf.vocabulary, lambda ds: predict_verb_batch(clf, ds, noun_vectors))


def fused_predictor(
    fusion: FusionMLP,
    baseline: VerbClassifier,
    source: MotionSource,
    noun_vectors: WordVectorTable | None = None,
) -> VerbPredictor:
    return VerbPredictor(
        fusion.vocabulary,
        lambda ds: predict_fused_batch(fusion, baseline, source, ds, noun_vectors),
    )


# --- checkpoints ---------------------------------------------------------------

def save_verb_classifier(
    path: str | Path, clf: VerbClassifier, config_hash: str = ""
) -> None:
    nn.write_checkpoint(
        path,
        "verb_classifier",
        {
            "config_hash": config_hash,
            "meta": {
                "uses_nouns": clf.uses_nouns,
                "noun_dim": clf.noun_dim,
                "vocabulary": list(clf.vocabulary),
            },
            "trunk": nn.dense_to_jsonable(clf.trunk),
            "head": nn.dense_to_jsonable(clf.head),
            "optimizer": None,
        },
    )


def load_verb_classifier(path: str | Path) -> VerbClassifier:
    doc = nn.read_checkpoint(path, "verb_classifier")
    return VerbClassifier(
        trunk=nn.dense_from_jsonable(doc["trunk"]),
        head=nn.dense_from_jsonable(doc["head"]),
        vocabulary=tuple(doc["meta"]["vocabulary"]),
        uses_nouns=doc["meta"]["uses_nouns"],
        noun_dim=doc["meta"]["noun_dim"],
    )


def save_fusion(path: str | Path, fusion: FusionMLP, config_hash: str = "") -> None:
    nn.write_checkpoint(
        path,
        "fusion_mlp",
        {
            "config_hash": config_hash,
            "meta": {"vocabulary": list(fusion.vocabulary)},
            "net": nn.dense_to_jsonable(fusion.params),
            "optimizer": None,
        },
    )


def load_fusion(path: str | Path) -> FusionMLP:
    doc = nn.read_checkpoint(path, "fusion_mlp")
    return FusionMLP(
        params=nn.dense_from_jsonable(doc["net"]),
        vocabulary=tuple(doc["meta"]["vocabulary"]),
    )
