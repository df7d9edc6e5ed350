"""Motion-code grammar: parsing, enumeration, embeddings, distances, verb map.

A motion code is a 9-bit descriptor of one manipulation action, written
canonically as five hyphen-separated groups::

    interaction(3) - recurrence(1) - prismatic(2) - revolute(2) - passive(1)

e.g. ``111-0-01-00-1`` for a soft continuous-contact action with an acyclical
1-DOF translational trajectory whose passive object moves relative to the
active one.  The compact form drops the hyphens (``111001001``).  Exactly 180
codes are valid: 5 interaction values x 2 recurrence x 3 prismatic DOF
classes x 3 revolute DOF classes x 2 passive-motion values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from itertools import product
from typing import Iterable, Literal

import numpy as np

GROUP_WIDTHS = (3, 1, 2, 2, 1)
COMPONENT_NAMES = ("interaction", "recurrence", "prismatic", "revolute", "passive")

# Fixed lexicographic class orderings; these define head/index order everywhere.
INTERACTION_ORDER = ("000", "100", "101", "110", "111")
DOF_ORDER = ("00", "01", "11")

CODE_BITS = sum(GROUP_WIDTHS)
EMBEDDING_DIM = 15


class CodeError(ValueError):
    """A string or index tuple that does not denote a valid motion code."""


class WrongLengthError(CodeError):
    pass


class NonBinaryCharacterError(CodeError):
    pass


class InvalidInteractionError(CodeError):
    pass


class InvalidGroupError(CodeError):
    pass


class IndexOutOfRangeError(CodeError):
    pass


class NegativeWeightError(CodeError):
    pass


class Engagement(Enum):
    RIGID = "0"
    SOFT = "1"


class ContactDuration(Enum):
    DISCONTINUOUS = "0"
    CONTINUOUS = "1"


class DofClass(Enum):
    """Coarse degree-of-freedom class of a trajectory; ``10`` is not a value."""

    ZERO = "00"
    ONE = "01"
    MANY = "11"


@dataclass(frozen=True)
class InteractionType:
    """Contact vs non-contact; contact carries engagement and duration.

    Serializes to one of exactly five 3-bit groups: ``000`` (non-contact) or
    ``1`` + engagement bit (0=rigid, 1=soft) + duration bit
    (0=discontinuous, 1=continuous).  Non-contact zero-fills the trailing
    bits, so ``001``..``011`` are invalid.
    """

    contact: bool
    engagement: Engagement | None = None
    duration: ContactDuration | None = None

    def __post_init__(self) -> None:
        if self.contact:
            if self.engagement is None or self.duration is None:
                raise InvalidInteractionError(
                    "contact interaction requires engagement and duration"
                )
        elif self.engagement is not None or self.duration is not None:
            raise InvalidInteractionError(
                "non-contact interaction admits no engagement or duration"
            )

    @classmethod
    def non_contact(cls) -> "InteractionType":
        return cls(contact=False)

    @classmethod
    def from_bits(cls, bits: str) -> "InteractionType":
        if bits not in INTERACTION_ORDER:
            raise InvalidInteractionError(f"invalid interaction group {bits!r}")
        if bits == "000":
            return cls.non_contact()
        return cls(True, Engagement(bits[1]), ContactDuration(bits[2]))

    def bits(self) -> str:
        if not self.contact:
            return "000"
        assert self.engagement is not None and self.duration is not None
        return "1" + self.engagement.value + self.duration.value


@dataclass(frozen=True)
class MotionCode:
    """Structured 9-bit motion code over the five taxonomy components."""

    interaction: InteractionType
    recurrence: bool  # True = cyclical trajectory
    prismatic: DofClass
    revolute: DofClass
    passive_moves: bool  # True = passive object moves w.r.t. the active one

    def groups(self) -> tuple[str, str, str, str, str]:
        return (
            self.interaction.bits(),
            "1" if self.recurrence else "0",
            self.prismatic.value,
            self.revolute.value,
            "1" if self.passive_moves else "0",
        )

    def compact(self) -> str:
        return "".join(self.groups())

    def canonical(self) -> str:
        return "-".join(self.groups())

    def __str__(self) -> str:
        return self.canonical()


CodeStyle = Literal["hyphenated", "compact"]


def _split_groups(text: str) -> tuple[str, ...]:
    if "-" in text:
        groups = tuple(text.split("-"))
        if len(groups) != len(GROUP_WIDTHS) or any(
            len(g) != w for g, w in zip(groups, GROUP_WIDTHS)
        ):
            raise WrongLengthError(
                f"expected groups of widths {'-'.join(map(str, GROUP_WIDTHS))}, got {text!r}"
            )
        return groups
    if len(text) != CODE_BITS:
        raise WrongLengthError(f"expected {CODE_BITS} bits, got {len(text)} in {text!r}")
    out, pos = [], 0
    for w in GROUP_WIDTHS:
        out.append(text[pos : pos + w])
        pos += w
    return tuple(out)


def parse_code(text: str) -> MotionCode:
    """Parse a hyphenated canonical or compact 9-character code string.

    Raises WrongLengthError, NonBinaryCharacterError, InvalidInteractionError
    or InvalidGroupError; valid inputs round-trip through ``format_code``.
    """
    groups = _split_groups(text)
    if any(ch not in "01" for g in groups for ch in g):
        raise NonBinaryCharacterError(f"non-binary character in {text!r}")
    interaction = InteractionType.from_bits(groups[0])
    try:
        prismatic = DofClass(groups[2])
    except ValueError:
        raise InvalidGroupError(f"invalid prismatic group {groups[2]!r}") from None
    try:
        revolute = DofClass(groups[3])
    except ValueError:
        raise InvalidGroupError(f"invalid revolute group {groups[3]!r}") from None
    return MotionCode(
        interaction=interaction,
        recurrence=groups[1] == "1",
        prismatic=prismatic,
        revolute=revolute,
        passive_moves=groups[4] == "1",
    )


def format_code(code: MotionCode, style: CodeStyle = "hyphenated") -> str:
    """Render a code in the canonical hyphenated or compact style."""
    if style == "hyphenated":
        return code.canonical()
    if style == "compact":
        return code.compact()
    raise ValueError(f"unknown style {style!r}")


@lru_cache(maxsize=1)
def enumerate_codes() -> tuple[MotionCode, ...]:
    """All 180 valid codes, in lexicographic order of their compact form."""
    codes = [
        MotionCode(
            InteractionType.from_bits(inter),
            rec == "1",
            DofClass(pri),
            DofClass(rev),
            pas == "1",
        )
        for inter, rec, pri, rev, pas in product(
            INTERACTION_ORDER, "01", DOF_ORDER, DOF_ORDER, "01"
        )
    ]
    codes.sort(key=lambda c: c.compact())
    return tuple(codes)


def component_classes() -> list[int]:
    """Class counts per component head: [5, 2, 3, 3, 2]."""
    return [len(INTERACTION_ORDER), 2, len(DOF_ORDER), len(DOF_ORDER), 2]


def code_to_class_indices(code: MotionCode) -> tuple[int, int, int, int, int]:
    """Per-component class indices under the fixed lexicographic orderings."""
    return (
        INTERACTION_ORDER.index(code.interaction.bits()),
        int(code.recurrence),
        DOF_ORDER.index(code.prismatic.value),
        DOF_ORDER.index(code.revolute.value),
        int(code.passive_moves),
    )


def class_indices_to_code(indices: Iterable[int]) -> MotionCode:
    """Inverse of ``code_to_class_indices``; any in-range 5-tuple is valid."""
    idx = tuple(indices)
    counts = component_classes()
    if len(idx) != len(counts):
        raise IndexOutOfRangeError(f"expected {len(counts)} indices, got {len(idx)}")
    for k, (i, c) in enumerate(zip(idx, counts)):
        if not 0 <= i < c:
            raise IndexOutOfRangeError(
                f"index {i} out of range [0, {c}) for component {COMPONENT_NAMES[k]}"
            )
    return MotionCode(
        InteractionType.from_bits(INTERACTION_ORDER[idx[0]]),
        idx[1] == 1,
        DofClass(DOF_ORDER[idx[2]]),
        DofClass(DOF_ORDER[idx[3]]),
        idx[4] == 1,
    )


def one_hot_embedding(code: MotionCode) -> np.ndarray:
    """Concatenated one-hot blocks of sizes [5, 2, 3, 3, 2]; 15 entries."""
    out = np.zeros(EMBEDDING_DIM)
    offset = 0
    for idx, count in zip(code_to_class_indices(code), component_classes()):
        out[offset + idx] = 1.0
        offset += count
    return out


def hamming(a: MotionCode, b: MotionCode) -> int:
    """Count of differing bit positions in the compact 9-bit forms."""
    return sum(x != y for x, y in zip(a.compact(), b.compact()))


def weighted_distance(a: MotionCode, b: MotionCode, weights: Iterable[float]) -> float:
    """Sum of per-component weights over components whose class differs.

    With unit weights this is the number of differing components (0..5).
    """
    w = list(weights)
    if len(w) != len(GROUP_WIDTHS):
        raise NegativeWeightError(f"expected {len(GROUP_WIDTHS)} weights, got {len(w)}")
    if any(x < 0 for x in w):
        raise NegativeWeightError("weights must be non-negative")
    ia, ib = code_to_class_indices(a), code_to_class_indices(b)
    return float(sum(wk for wk, xa, xb in zip(w, ia, ib) if xa != xb))


# Built-in verb <-> code reference map for common household manipulations.
# Verb tokens are normalized: parenthetical qualifiers dropped, slash pairs
# split into separate verbs, multi-word verbs kept intact.  Rows sharing a
# code are merged into the union of their verbs.
_TABLE_ROWS: tuple[tuple[str, tuple[str, ...]], ...] = (
    ("000-0-00-01-1", ("pour",)),
    ("000-1-01-00-1", ("sprinkle",)),
    ("100-0-01-00-0", ("poke", "press", "tap", "adjust")),
    ("101-0-00-00-0", ("grasp", "hold")),
    ("101-0-00-01-0", ("open", "close", "rotate", "turn", "twist")),
    ("101-0-01-00-0", ("spread", "wipe", "move", "push")),
    ("101-0-01-01-0", ("flip",)),
    ("101-0-11-00-1", ("open", "close")),
    ("101-1-00-01-0", ("shake",)),
    ("101-1-01-00-0", ("shake",)),
    ("110-0-01-01-0", ("scoop",)),
    ("110-0-01-00-0", ("crack",)),
    ("111-0-01-00-0", ("insert", "pierce")),
    ("111-0-00-00-0", ("squeeze",)),
    ("111-0-01-01-0", ("fold", "unwrap", "wrap")),
    ("111-1-11-00-1", ("beat", "mix", "stir")),
    (
        "111-0-01-00-1",
        (
            "flatten",
            "press",
            "squeeze",
            "pull apart",
            "peel",
            "chop",
            "cut",
            "mash",
            "scrape",
            "shave",
            "slice",
        ),
    ),
    ("111-0-01-00-0", ("roll",)),
    ("111-0-11-00-1", ("saw", "cut", "slice")),
    ("111-0-01-00-1", ("brush", "sweep", "spread")),
    ("111-0-11-00-1", ("brush", "sweep")),
    ("111-0-00-00-1", ("grate",)),
)


@dataclass(frozen=True)
class VerbCodeTable:
    """Many-to-many verb <-> motion-code map with lookups in both directions."""

    entries: tuple[tuple[MotionCode, frozenset[str]], ...]

    @classmethod
    def from_rows(cls, rows: Iterable[tuple[str, Iterable[str]]]) -> "VerbCodeTable":
        merged: dict[str, set[str]] = {}
        for code_text, verbs in rows:
            canonical = parse_code(code_text).canonical()
            merged.setdefault(canonical, set()).update(verbs)
        entries = tuple(
            (parse_code(c), frozenset(vs)) for c, vs in sorted(merged.items())
        )
        return cls(entries=entries)

    def verbs_for_code(self, code: MotionCode) -> frozenset[str]:
        for c, verbs in self.entries:
            if c == code:
                return verbs
        return frozenset()

    def codes_for_verb(self, verb: str) -> frozenset[MotionCode]:
        return frozenset(c for c, verbs in self.entries if verb in verbs)

    def verbs(self) -> tuple[str, ...]:
        return tuple(sorted(set().union(*(vs for _, vs in self.entries))))

    def codes(self) -> tuple[MotionCode, ...]:
        return tuple(c for c, _ in self.entries)

    def to_json(self) -> str:
        rows = [
            {"code": c.canonical(), "verbs": sorted(vs)} for c, vs in self.entries
        ]
        return json.dumps(rows, indent=2, sort_keys=True)


@lru_cache(maxsize=1)
def default_table() -> VerbCodeTable:
    return VerbCodeTable.from_rows(_TABLE_ROWS)


def verbs_for_code(code: MotionCode | str) -> frozenset[str]:
    """Verbs listed for the code in the built-in table; empty set if unlisted."""
    if isinstance(code, str):
        code = parse_code(code)
    return default_table().verbs_for_code(code)


def codes_for_verb(verb: str) -> frozenset[MotionCode]:
    """Codes listed for the verb in the built-in table; empty set if unknown."""
    return default_table().codes_for_verb(verb)


def decision_tree() -> dict:
    """The annotation decision tree as nested JSON-ready dicts.

    Each node is {"question", "options": [{"label", "bits", "next"|"leaf"}]}
    (plus an optional "help" string); following options appends their bits,
    and every leaf yields a complete 9-bit compact code.
    """
    passive = {
        "question": "Does the passive object move with respect to the active object?",
        "options": [
            {"label": "stays (no relative motion)", "bits": "0", "leaf": True},
            {"label": "moves relative to the active object", "bits": "1", "leaf": True},
        ],
    }
    revolute = {
        "question": "How many rotational degrees of freedom does the active trajectory have?",
        "options": [
            {"label": "none", "bits": "00", "next": passive},
            {"label": "one", "bits": "01", "next": passive},
            {"label": "many", "bits": "11", "next": passive},
        ],
    }
    prismatic = {
        "question": "How many translational degrees of freedom does the active trajectory have?",
        "options": [
            {"label": "none", "bits": "00", "next": revolute},
            {"label": "one", "bits": "01", "next": revolute},
            {"label": "many", "bits": "11", "next": revolute},
        ],
    }
    recurrence = {
        "question": "Is the active object's trajectory cyclical (repetitive)?",
        "options": [
            {"label": "acyclical", "bits": "0", "next": prismatic},
            {"label": "cyclical", "bits": "1", "next": prismatic},
        ],
    }
    duration = {
        "question": "Does contact persist for most of the action?",
        "help": (
            "Treat contact as continuous when it persists for roughly 80% of "
            "the action or more."
        ),
        "options": [
            {"label": "discontinuous contact", "bits": "0", "next": recurrence},
            {"label": "continuous contact", "bits": "1", "next": recurrence},
        ],
    }
    engagement = {
        "question": "Does the action deform either object-in-action (state, shape or structure)?",
        "options": [
            {"label": "rigid engagement (no deformation)", "bits": "0", "next": duration},
            {"label": "soft engagement (deformation)", "bits": "1", "next": duration},
        ],
    }
    interaction = {
        "question": "Do the active and passive objects make contact during the action?",
        "options": [
            {"label": "non-contact", "bits": "000", "next": recurrence},
            {"label": "contact", "bits": "1", "next": engagement},
        ],
    }
    return interaction
