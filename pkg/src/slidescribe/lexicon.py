"""Corpus data model and domain-specific ("special") word extraction.

A word is special when it never occurs in a general-domain vocabulary;
membership is a pure presence test, not threshold-based. The vocabulary is
typically built from a large general presentation corpus and acts as the
negative filter for every talk scored here.
"""

from __future__ import annotations

import json
import warnings
from collections import Counter
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from pathlib import Path

from .textnorm import DEFAULT_POLICY, NormalizationPolicy, Token, normalize

# Above this segment duration the one-slide-per-segment assumption gets
# shaky, so loaders warn (but never fail).
MAX_UNWARNED_DURATION_S = 30.0


class SegmentDurationWarning(UserWarning):
    """A segment is longer than the single-slide assumption supports."""


@dataclass(frozen=True)
class Segment:
    """One time-aligned transcript segment of a recording."""

    id: str
    offset: float
    duration: float
    text: str

    def __post_init__(self) -> None:
        if self.offset < 0:
            raise ValueError(f"segment {self.id!r}: offset must be >= 0, got {self.offset}")
        if self.duration <= 0:
            raise ValueError(f"segment {self.id!r}: duration must be > 0, got {self.duration}")
        if self.duration > MAX_UNWARNED_DURATION_S:
            warnings.warn(
                f"segment {self.id!r} is {self.duration:.1f}s long; slide context "
                f"assumes segments under {MAX_UNWARNED_DURATION_S:.0f}s",
                SegmentDurationWarning,
                stacklevel=2,
            )

    def tokens(self, policy: NormalizationPolicy = DEFAULT_POLICY) -> list[Token]:
        return normalize(self.text, policy)


@dataclass(frozen=True)
class Media:
    """Optional file references for a talk's recording."""

    video: str | None = None
    audio: str | None = None
    video_duration_s: float | None = None

    def __post_init__(self) -> None:
        if self.video_duration_s is not None and self.video_duration_s <= 0:
            raise ValueError("video_duration_s must be positive when given")


@dataclass(frozen=True)
class Talk:
    """A recording with its ordered transcript segments."""

    id: str
    segments: tuple[Segment, ...]
    media: Media = field(default_factory=Media)

    def __post_init__(self) -> None:
        seen: set[str] = set()
        previous = 0.0
        for segment in self.segments:
            if segment.id in seen:
                raise ValueError(f"talk {self.id!r}: duplicate segment id {segment.id!r}")
            seen.add(segment.id)
            if segment.offset < previous:
                raise ValueError(f"talk {self.id!r}: segments not ordered by offset")
            previous = segment.offset

    @property
    def transcript(self) -> str:
        return " ".join(segment.text for segment in self.segments)

    def tokens(self, policy: NormalizationPolicy = DEFAULT_POLICY) -> list[Token]:
        out: list[Token] = []
        for segment in self.segments:
            out.extend(segment.tokens(policy))
        return out


@dataclass(frozen=True)
class Vocabulary:
    """Immutable token -> occurrence-count map over a corpus."""

    counts: Mapping[Token, int]

    def __post_init__(self) -> None:
        for token, count in self.counts.items():
            if count < 1:
                raise ValueError(f"vocabulary count for {token!r} must be >= 1, got {count}")

    def __contains__(self, token: Token) -> bool:
        return token in self.counts

    def __len__(self) -> int:
        return len(self.counts)

    def count(self, token: Token) -> int:
        return self.counts.get(token, 0)


@dataclass(frozen=True)
class SpecialWordSet:
    """Domain-specific words of one reference, with occurrence counts."""

    words: frozenset[Token]
    occurrences: Mapping[Token, int]

    def __post_init__(self) -> None:
        if set(self.occurrences) != set(self.words):
            raise ValueError("occurrence keys must equal the word set")

    @property
    def total(self) -> int:
        return sum(self.occurrences.values())

    @property
    def unique(self) -> int:
        return len(self.words)


def build_vocabulary(
    corpus: Iterable[Talk], policy: NormalizationPolicy = DEFAULT_POLICY
) -> Vocabulary:
    """Count token occurrences over all segments of all talks.

    Raises on an empty corpus: an empty negative filter would mark every
    word as special.
    """
    counts: Counter[Token] = Counter()
    seen_talk = False
    for talk in corpus:
        seen_talk = True
        counts.update(talk.tokens(policy))
    if not seen_talk:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    return Vocabulary(dict(counts))


def extract_special_words(
    reference: Talk, vocab: Vocabulary, policy: NormalizationPolicy = DEFAULT_POLICY
) -> SpecialWordSet:
    """Words of the reference that are absent from the vocabulary."""
    if len(vocab) == 0:
        raise ValueError("special-word extraction needs a non-empty vocabulary")
    occurrences: Counter[Token] = Counter(
        token for token in reference.tokens(policy) if token not in vocab
    )
    return SpecialWordSet(frozenset(occurrences), dict(occurrences))


def special_word_stats(sets: Iterable[SpecialWordSet]) -> tuple[int, int]:
    """(total, unique) over per-talk sets: totals add, word sets union."""
    total = 0
    union: set[Token] = set()
    for special in sets:
        total += special.total
        union |= special.words
    return total, len(union)


# --- file formats -----------------------------------------------------------
#
# Talk manifest (JSON, one file per talk):
#   {"talk_id": str,
#    "media": {"video": str?, "audio": str?,            # optional
#              "video_duration_s": float?},
#    "segments": [{"id": str, "offset_s": float,
#                  "duration_s": float, "text": str}, ...]}
# Relative media paths are resolved against the manifest's directory.
#
# Vocabulary file: UTF-8, one token per line, optional "\t<count>".


def load_talk_manifest(path: str | Path) -> Talk:
    path = Path(path)
    with open(path, encoding="utf-8") as f:
        doc = json.load(f)
    media_doc = doc.get("media") or {}
    duration = media_doc.get("video_duration_s")
    media = Media(
        video=_resolve_media_path(media_doc.get("video"), path.parent),
        audio=_resolve_media_path(media_doc.get("audio"), path.parent),
        video_duration_s=float(duration) if duration is not None else None,
    )
    segments = [
        Segment(
            id=str(entry["id"]),
            offset=float(entry["offset_s"]),
            duration=float(entry["duration_s"]),
            text=str(entry["text"]),
        )
        for entry in doc["segments"]
    ]
    segments.sort(key=lambda segment: segment.offset)
    return Talk(id=str(doc["talk_id"]), segments=tuple(segments), media=media)


def save_talk_manifest(talk: Talk, path: str | Path) -> None:
    doc = {
        "talk_id": talk.id,
        "media": {
            key: value
            for key, value in (
                ("video", talk.media.video),
                ("audio", talk.media.audio),
                ("video_duration_s", talk.media.video_duration_s),
            )
            if value is not None
        },
        "segments": [
            {
                "id": segment.id,
                "offset_s": segment.offset,
                "duration_s": segment.duration,
                "text": segment.text,
            }
            for segment in talk.segments
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _resolve_media_path(value: str | None, base: Path) -> str | None:
    if value is None:
        return None
    candidate = Path(value)
    if not candidate.is_absolute():
        candidate = base / candidate
    return str(candidate)


def load_vocabulary(
    path: str | Path, policy: NormalizationPolicy = DEFAULT_POLICY
) -> Vocabulary:
    """Read a token-per-line vocabulary file, normalizing each entry."""
    counts: Counter[Token] = Counter()
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line.strip():
                continue
            raw, _, count_text = line.partition("\t")
            count = int(count_text) if count_text.strip() else 1
            for token in normalize(raw, policy):
                counts[token] += count
    return Vocabulary(dict(counts))


def save_vocabulary(vocab: Vocabulary, path: str | Path) -> None:
    lines = [f"{token}\t{count}" for token, count in sorted(vocab.counts.items())]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
