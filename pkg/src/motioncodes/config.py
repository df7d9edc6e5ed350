"""Training and run configuration: dataclasses, strict JSON loading, hashing."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    """Schedule and architecture knobs for one training run.

    Defaults: Adam at 3e-4 decayed by x0.6 every 5 epochs for 50 epochs,
    batches of 32, one 128-unit hidden layer, unit per-head loss weights.
    """

    seed: int = 0
    epochs: int = 50
    batch_size: int = 32
    learning_rate: float = 3e-4
    lr_decay: float = 0.6
    lr_decay_every: int = 5
    hidden_dim: int = 128
    use_nouns: bool = False
    lambda_weights: tuple[float, ...] = (1.0, 1.0, 1.0, 1.0, 1.0)

    def __post_init__(self) -> None:
        if self.epochs < 1 or self.batch_size < 1 or self.hidden_dim < 1:
            raise ConfigError("epochs, batch_size and hidden_dim must be >= 1")
        if self.learning_rate <= 0 or self.lr_decay <= 0 or self.lr_decay_every < 1:
            raise ConfigError("invalid learning-rate schedule")
        object.__setattr__(self, "lambda_weights", tuple(self.lambda_weights))
        if len(self.lambda_weights) != 5 or any(w < 0 for w in self.lambda_weights):
            raise ConfigError("lambda_weights must be 5 non-negative reals")

    def lr_at(self, epoch: int) -> float:
        return self.learning_rate * self.lr_decay ** (epoch // self.lr_decay_every)


def fusion_defaults(seed: int = 0, hidden_dim: int = 64) -> TrainConfig:
    """Default fusion schedule: 200 epochs at a flat 5e-4."""
    return TrainConfig(
        seed=seed,
        epochs=200,
        learning_rate=5e-4,
        lr_decay=1.0,
        lr_decay_every=1,
        hidden_dim=hidden_dim,
    )


_SOURCE_KINDS = ("ground_truth", "predicted", "corrupted")


@dataclass(frozen=True)
class RunConfig:
    """One experiment manifest: dataset paths, variant flags, schedules, outputs."""

    train_path: str
    val_path: str
    out_dir: str
    seed: int = 0
    epochs: int = 50
    batch_size: int = 32
    learning_rate: float = 3e-4
    lr_decay: float = 0.6
    lr_decay_every: int = 5
    hidden_dim: int = 128
    lambda_weights: tuple[float, ...] = (1.0, 1.0, 1.0, 1.0, 1.0)
    fusion_epochs: int = 200
    fusion_learning_rate: float = 5e-4
    fusion_hidden_dim: int = 64
    use_nouns_verb: bool = False
    use_nouns_motion: bool = False
    noun_vectors_path: str | None = None
    baseline_checkpoint: str | None = None
    motion_checkpoint: str | None = None
    fusion_checkpoint: str | None = None
    motion_source: dict = field(default_factory=lambda: {"kind": "ground_truth"})
    p_grid: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 1.0)
    sweep_seeds: tuple[int, ...] = (0, 1, 2, 3, 4)

    def __post_init__(self) -> None:
        object.__setattr__(self, "lambda_weights", tuple(self.lambda_weights))
        object.__setattr__(self, "p_grid", tuple(self.p_grid))
        object.__setattr__(self, "sweep_seeds", tuple(self.sweep_seeds))
        kind = self.motion_source.get("kind")
        if kind not in _SOURCE_KINDS:
            raise ConfigError(
                f"motion_source.kind must be one of {_SOURCE_KINDS}, got {kind!r}"
            )
        extra = set(self.motion_source) - {"kind", "rate", "seed"}
        if extra:
            raise ConfigError(f"unknown motion_source keys: {sorted(extra)}")
        if kind == "corrupted":
            rate = self.motion_source.get("rate")
            if not isinstance(rate, (int, float)) or not 0 <= rate <= 1:
                raise ConfigError("corrupted motion_source requires rate in [0, 1]")
        if any(not 0 <= p <= 1 for p in self.p_grid):
            raise ConfigError("p_grid values must lie in [0, 1]")

    def train_config(self, *, use_nouns: bool = False) -> TrainConfig:
        return TrainConfig(
            seed=self.seed,
            epochs=self.epochs,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            lr_decay=self.lr_decay,
            lr_decay_every=self.lr_decay_every,
            hidden_dim=self.hidden_dim,
            use_nouns=use_nouns,
            lambda_weights=self.lambda_weights,
        )

    def fusion_config(self) -> TrainConfig:
        return TrainConfig(
            seed=self.seed,
            epochs=self.fusion_epochs,
            batch_size=self.batch_size,
            learning_rate=self.fusion_learning_rate,
            lr_decay=1.0,
            lr_decay_every=1,
            hidden_dim=self.fusion_hidden_dim,
        )

    def as_dict(self) -> dict[str, Any]:
        doc = asdict(self)
        doc["lambda_weights"] = list(self.lambda_weights)
        doc["p_grid"] = list(self.p_grid)
        doc["sweep_seeds"] = list(self.sweep_seeds)
        return doc


def load_run_config(path: str | Path) -> RunConfig:
    """Parse a RunConfig JSON document, rejecting unknown keys."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    known = {f.name for f in fields(RunConfig)}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"{path}: unknown config keys: {sorted(unknown)}")
    missing = {"train_path", "val_path", "out_dir"} - set(doc)
    if missing:
        raise ConfigError(f"{path}: missing required keys: {sorted(missing)}")
    try:
        return RunConfig(**doc)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def config_hash(obj: Any) -> str:
    """Stable sha256 hex digest of a JSON-serializable configuration."""
    if hasattr(obj, "as_dict"):
        obj = obj.as_dict()
    elif hasattr(obj, "__dataclass_fields__"):
        obj = asdict(obj)
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
