"""Dataset ingestion, word-vector tables, and the planted-structure generator.

Datasets are line-delimited JSON, one example per line::

    {"id": "clip-001", "verb": "chop", "noun": "cucumber",
     "code": "111-0-01-00-1" | null, "features": [0.1, ...]}

Feature vectors may instead be referenced out of line with
``"features_ref": {"file": "feats.npy", "row": 17}`` pointing into a 2-D
``.npy`` sidecar next to the dataset file.  Records carrying neither field
parse as feature-less (length-0 vectors), which is the shape produced by the
annotation-export endpoint.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .taxonomy import (
    CodeError,
    MotionCode,
    codes_for_verb,
    default_table,
    enumerate_codes,
    parse_code,
)

SPLITS = ("train", "val", "test")


class DatasetError(ValueError):
    """Ingest failure; carries the 1-based line number when applicable."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class RecordParseError(DatasetError):
    pass


class InvalidCodeError(DatasetError):
    pass


class DimMismatchError(DatasetError):
    pass


class DuplicateIdError(DatasetError):
    pass


class HeaderMismatchError(DatasetError):
    pass


class BadVectorLengthError(DatasetError):
    pass


class MissingTokenError(DatasetError):
    pass


class InvalidConfigError(DatasetError):
    pass


@dataclass(frozen=True)
class Example:
    id: str
    features: np.ndarray
    noun: str
    verb: str
    code: MotionCode | None = None


@dataclass(frozen=True)
class Dataset:
    examples: tuple[Example, ...]
    verb_vocab: tuple[str, ...]
    noun_vocab: tuple[str, ...]
    feature_dim: int
    split: str = "train"

    def __post_init__(self) -> None:
        if self.split not in SPLITS:
            raise DatasetError(f"split must be one of {SPLITS}, got {self.split!r}")
        seen: set[str] = set()
        verbs = set(self.verb_vocab)
        for ex in self.examples:
            if ex.id in seen:
                raise DuplicateIdError(f"duplicate example id {ex.id!r}")
            seen.add(ex.id)
            if ex.verb not in verbs:
                raise DatasetError(f"verb {ex.verb!r} not in vocabulary")
            if ex.features.shape != (self.feature_dim,):
                raise DimMismatchError(
                    f"example {ex.id!r} has {ex.features.shape[0]} features, "
                    f"expected {self.feature_dim}"
                )

    @classmethod
    def from_examples(
        cls,
        examples: list[Example],
        split: str = "train",
        verb_vocab: tuple[str, ...] | None = None,
        noun_vocab: tuple[str, ...] | None = None,
    ) -> "Dataset":
        if verb_vocab is None:
            verb_vocab = tuple(sorted({ex.verb for ex in examples}))
        if noun_vocab is None:
            noun_vocab = tuple(sorted({ex.noun for ex in examples}))
        feature_dim = examples[0].features.shape[0] if examples else 0
        return cls(tuple(examples), verb_vocab, noun_vocab, feature_dim, split)

    def __len__(self) -> int:
        return len(self.examples)

    def feature_matrix(self) -> np.ndarray:
        return np.stack([ex.features for ex in self.examples]) if self.examples else np.zeros((0, self.feature_dim))


def _infer_split(path: Path) -> str:
    return path.stem if path.stem in SPLITS else "train"


def load_dataset(path: str | Path, split: str | None = None) -> Dataset:
    """Load and validate a JSONL dataset; every malformed line is a located error."""
    path = Path(path)
    examples: list[Example] = []
    seen_ids: set[str] = set()
    feature_dim: int | None = None
    sidecars: dict[str, np.ndarray] = {}
    with path.open() as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text:
                continue
            try:
                record = json.loads(text)
            except json.JSONDecodeError as exc:
                raise RecordParseError(f"invalid JSON ({exc.msg})", lineno) from None
            if not isinstance(record, dict):
                raise RecordParseError("record must be a JSON object", lineno)
            for key in ("id", "verb", "noun"):
                if not isinstance(record.get(key), str):
                    raise RecordParseError(f"missing or non-string {key!r}", lineno)
            code = None
            if record.get("code") is not None:
                if not isinstance(record["code"], str):
                    raise RecordParseError("code must be a string or null", lineno)
                try:
                    code = parse_code(record["code"])
                except CodeError as exc:
                    raise InvalidCodeError(str(exc), lineno) from None
            features = _read_features(record, path, sidecars, lineno)
            if feature_dim is None:
                feature_dim = features.shape[0]
            elif features.shape[0] != feature_dim:
                raise DimMismatchError(
                    f"feature dim {features.shape[0]} != {feature_dim}", lineno
                )
            if record["id"] in seen_ids:
                raise DuplicateIdError(f"duplicate id {record['id']!r}", lineno)
            seen_ids.add(record["id"])
            examples.append(
                Example(record["id"], features, record["noun"], record["verb"], code)
            )
    return Dataset.from_examples(examples, split or _infer_split(path))


def _read_features(
    record: dict, path: Path, sidecars: dict[str, np.ndarray], lineno: int
) -> np.ndarray:
    inline = record.get("features")
    ref = record.get("features_ref")
    if inline is not None and ref is not None:
        raise RecordParseError("record has both features and features_ref", lineno)
    if inline is not None:
        if not isinstance(inline, list) or not all(
            isinstance(v, (int, float)) and math.isfinite(v) for v in inline
        ):
            raise RecordParseError("features must be a list of finite numbers", lineno)
        return np.asarray(inline, dtype=float)
    if ref is not None:
        if not isinstance(ref, dict) or not isinstance(ref.get("file"), str) or not isinstance(ref.get("row"), int):
            raise RecordParseError('features_ref must be {"file": str, "row": int}', lineno)
        name = ref["file"]
        if name not in sidecars:
            sidecar_path = path.parent / name
            if not sidecar_path.exists():
                raise RecordParseError(f"sidecar file {name!r} not found", lineno)
            arr = np.load(sidecar_path)
            if arr.ndim != 2:
                raise RecordParseError(f"sidecar {name!r} must be a 2-D array", lineno)
            sidecars[name] = arr
        table = sidecars[name]
        if not 0 <= ref["row"] < table.shape[0]:
            raise RecordParseError(f"row {ref['row']} outside sidecar {name!r}", lineno)
        return np.asarray(table[ref["row"]], dtype=float)
    return np.zeros(0)


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    """Write the dataset in the JSONL record format (features inline)."""
    with Path(path).open("w") as fh:
        for ex in dataset.examples:
            record = {
                "id": ex.id,
                "verb": ex.verb,
                "noun": ex.noun,
                "code": ex.code.canonical() if ex.code is not None else None,
                "features": ex.features.tolist(),
            }
            fh.write(json.dumps(record) + "\n")


@dataclass(frozen=True)
class WordVectorTable:
    """Token -> vector lookup of a single dimension; missing tokens are errors."""

    vectors: dict[str, np.ndarray]
    dim: int

    def lookup(self, token: str) -> np.ndarray:
        try:
            return self.vectors[token]
        except KeyError:
            raise MissingTokenError(f"no vector for token {token!r}") from None

    def __contains__(self, token: str) -> bool:
        return token in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)

    @classmethod
    def one_hot(cls, vocab: tuple[str, ...]) -> "WordVectorTable":
        eye = np.eye(len(vocab))
        return cls({tok: eye[i] for i, tok in enumerate(vocab)}, len(vocab))


def load_word_vectors(path: str | Path) -> WordVectorTable:
    """Load a text word-vector table: header "count dim", then token rows."""
    with Path(path).open() as fh:
        header = fh.readline().split()
        if len(header) != 2 or not all(p.isdigit() for p in header):
            raise HeaderMismatchError('expected header "<count> <dim>"', 1)
        count, dim = int(header[0]), int(header[1])
        vectors: dict[str, np.ndarray] = {}
        for lineno, raw in enumerate(fh, start=2):
            if not raw.strip():
                continue
            parts = raw.split()
            if len(parts) != dim + 1:
                raise BadVectorLengthError(
                    f"expected {dim} values for token {parts[0] if parts else '?'!r}",
                    lineno,
                )
            try:
                vec = np.asarray([float(v) for v in parts[1:]])
            except ValueError:
                raise BadVectorLengthError("non-numeric vector entry", lineno) from None
            vectors[parts[0]] = vec
    if len(vectors) != count:
        raise HeaderMismatchError(
            f"header promised {count} tokens, file holds {len(vectors)}"
        )
    return WordVectorTable(vectors, dim)


@dataclass(frozen=True)
class SynthConfig:
    """Planted-structure generator settings.

    Every (verb, code) pair gets a unit-norm prototype; examples are
    prototypes plus isotropic Gaussian noise.  Noun tokens name the true code
    with probability ``noun_informativeness`` and are random vocabulary
    tokens otherwise.  ``code_count`` pins the number of distinct codes used
    across the whole vocabulary (at most verb_count * codes_per_verb).
    """

    n_train: int
    n_val: int
    feature_dim: int = 64
    noise: float = 0.1
    verb_count: int = 33
    codes_per_verb: int = 1
    code_count: int | None = None
    noun_informativeness: float = 0.9
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_train < 1 or self.n_val < 0 or self.feature_dim < 1:
            raise InvalidConfigError("n_train, n_val and feature_dim must be positive")
        if self.noise < 0:
            raise InvalidConfigError("noise must be >= 0")
        if self.verb_count < 1 or self.codes_per_verb < 1:
            raise InvalidConfigError("verb_count and codes_per_verb must be >= 1")
        if not 0 <= self.noun_informativeness <= 1:
            raise InvalidConfigError("noun_informativeness must lie in [0, 1]")
        if self.code_count is not None:
            lo, hi = self.codes_per_verb, self.verb_count * self.codes_per_verb
            if not lo <= self.code_count <= min(hi, 180):
                raise InvalidConfigError(
                    f"code_count must lie in [{lo}, {min(hi, 180)}]"
                )


def _noun_token(code: MotionCode) -> str:
    return f"obj{code.compact()}"


def _choose_verbs(rng: np.random.Generator, count: int) -> list[str]:
    table_verbs = list(default_table().verbs())
    if count <= len(table_verbs):
        picked = rng.choice(len(table_verbs), size=count, replace=False)
        return sorted(table_verbs[i] for i in picked)
    extra = [f"verb{i:02d}" for i in range(count - len(table_verbs))]
    return sorted(table_verbs + extra)


def _assign_codes(
    rng: np.random.Generator, verbs: list[str], cfg: SynthConfig
) -> dict[str, list[MotionCode]]:
    """Seeded verb -> codes map, preferring each verb's built-in table codes."""
    universe = list(enumerate_codes())
    if cfg.code_count is None:
        assignment = {}
        for verb in verbs:
            own = sorted(codes_for_verb(verb), key=lambda c: c.compact())
            own = [own[i] for i in rng.permutation(len(own))]
            chosen = own[: cfg.codes_per_verb]
            while len(chosen) < cfg.codes_per_verb:
                cand = universe[rng.integers(len(universe))]
                if cand not in chosen:
                    chosen.append(cand)
            assignment[verb] = chosen
        return assignment
    # Build a pool of exactly code_count codes, seeded from the verbs' own
    # table codes, then assign least-used first so every pool code is used.
    pool: list[MotionCode] = []
    table_codes = sorted(
        {c for v in verbs for c in codes_for_verb(v)}, key=lambda c: c.compact()
    )
    table_codes = [table_codes[i] for i in rng.permutation(len(table_codes))]
    pool.extend(table_codes[: cfg.code_count])
    remaining = [c for c in universe if c not in pool]
    while len(pool) < cfg.code_count:
        pool.append(remaining.pop(int(rng.integers(len(remaining)))))
    usage = {c.compact(): 0 for c in pool}
    assignment = {}
    for verb in verbs:
        own = {c.compact() for c in codes_for_verb(verb)}
        chosen: list[MotionCode] = []
        for _ in range(cfg.codes_per_verb):
            candidates = [c for c in pool if c not in chosen]
            jitter = rng.random(len(candidates))
            best = min(
                range(len(candidates)),
                key=lambda i: (
                    usage[candidates[i].compact()],
                    0 if candidates[i].compact() in own else 1,
                    jitter[i],
                ),
            )
            chosen.append(candidates[best])
            usage[candidates[best].compact()] += 1
        assignment[verb] = chosen
    return assignment


def synth_generate(cfg: SynthConfig) -> tuple[Dataset, Dataset]:
    """Deterministic (train, val) pair with planted feature/noun structure."""
    rng = np.random.default_rng(cfg.seed)
    verbs = _choose_verbs(rng, cfg.verb_count)
    assignment = _assign_codes(rng, verbs, cfg)
    pairs = [(verb, code) for verb in verbs for code in assignment[verb]]
    prototypes = []
    for _ in pairs:
        vec = rng.normal(size=cfg.feature_dim)
        prototypes.append(vec / np.linalg.norm(vec))
    used_codes = sorted({c.compact() for _, c in pairs})
    noun_vocab = tuple(_noun_token(parse_code(c)) for c in used_codes)

    total = cfg.n_train + cfg.n_val
    examples: list[Example] = []
    for i in range(total):
        j = int(rng.integers(len(pairs)))
        verb, code = pairs[j]
        features = prototypes[j] + cfg.noise * rng.normal(size=cfg.feature_dim)
        if rng.random() < cfg.noun_informativeness:
            noun = _noun_token(code)
        else:
            noun = noun_vocab[int(rng.integers(len(noun_vocab)))]
        examples.append(Example(f"syn-{i:06d}", features, noun, verb, code))

    verb_vocab = tuple(verbs)
    train = Dataset.from_examples(
        examples[: cfg.n_train], "train", verb_vocab, noun_vocab
    )
    val = Dataset.from_examples(examples[cfg.n_train :], "val", verb_vocab, noun_vocab)
    return train, val


@dataclass(frozen=True)
class DatasetStats:
    n_examples: int
    n_with_code: int
    unique_codes: int
    unique_verbs: int
    unique_nouns: int
    verb_histogram: dict[str, int]
    code_histogram: dict[str, int]
    underrepresented_verbs: tuple[str, ...]  # verbs with < 3 examples

    def as_dict(self) -> dict:
        return {
            "n_examples": self.n_examples,
            "n_with_code": self.n_with_code,
            "unique_codes": self.unique_codes,
            "unique_verbs": self.unique_verbs,
            "unique_nouns": self.unique_nouns,
            "verb_histogram": self.verb_histogram,
            "code_histogram": self.code_histogram,
            "underrepresented_verbs": list(self.underrepresented_verbs),
        }


def dataset_stats(dataset: Dataset) -> DatasetStats:
    verb_hist: dict[str, int] = {}
    code_hist: dict[str, int] = {}
    n_with_code = 0
    for ex in dataset.examples:
        verb_hist[ex.verb] = verb_hist.get(ex.verb, 0) + 1
        if ex.code is not None:
            n_with_code += 1
            key = ex.code.canonical()
            code_hist[key] = code_hist.get(key, 0) + 1
    return DatasetStats(
        n_examples=len(dataset.examples),
        n_with_code=n_with_code,
        unique_codes=len(code_hist),
        unique_verbs=len({ex.verb for ex in dataset.examples}),
        unique_nouns=len({ex.noun for ex in dataset.examples}),
        verb_histogram=dict(sorted(verb_hist.items())),
        code_histogram=dict(sorted(code_hist.items())),
        underrepresented_verbs=tuple(
            sorted(v for v, n in verb_hist.items() if n < 3)
        ),
    )
