"""Distill raw slide-text extractions into per-talk context word lists.

Extracted slide text is noisy: OCR misreads, boilerplate, ordinary prose.
Two filtering regimes turn it into usable context. The evaluation regime
keeps words that recur within a talk and are absent from a general-domain
vocabulary; the augmentation regime instead keeps words unique to a single
talk within the corpus. Both are pure set pipelines with recorded
provenance, so any result can be replayed from its raw extraction.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Callable, Mapping, Sequence, Set
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from types import MappingProxyType

from .lexicon import Vocabulary
from .textnorm import DEFAULT_POLICY, NormalizationPolicy, Token, normalize

DEFAULT_FREQUENCY_THRESHOLD = 2


@dataclass(frozen=True)
class RawExtraction:
    """Token counts pooled over every frame of one talk, before filtering."""

    talk_id: str
    counts: Mapping[Token, int]
    backend_id: str

    def __post_init__(self) -> None:
        for token, count in self.counts.items():
            if count < 1:
                raise ValueError(f"count for {token!r} must be >= 1, got {count}")
        object.__setattr__(self, "counts", MappingProxyType(dict(self.counts)))

    def to_dict(self) -> dict:
        return {
            "talk_id": self.talk_id,
            "backend_id": self.backend_id,
            "counts": dict(sorted(self.counts.items())),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> RawExtraction:
        return cls(
            talk_id=data["talk_id"],
            counts=dict(data["counts"]),
            backend_id=data["backend_id"],
        )


@dataclass(frozen=True)
class ContextWords:
    """Ordered, deduplicated context words for one talk plus how they were made."""

    talk_id: str
    words: tuple[Token, ...]
    provenance: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(set(self.words)) != len(self.words):
            raise ValueError("context words must not contain duplicates")
        object.__setattr__(self, "provenance", MappingProxyType(dict(self.provenance)))

    def to_dict(self) -> dict:
        return {
            "talk_id": self.talk_id,
            "words": list(self.words),
            "provenance": dict(self.provenance),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> ContextWords:
        return cls(
            talk_id=data["talk_id"],
            words=tuple(data["words"]),
            provenance=dict(data.get("provenance", {})),
        )


def frequency_filter(extraction: RawExtraction, threshold: int) -> set[Token]:
    """Keep tokens seen at least ``threshold`` times across the talk's frames."""
    if threshold < 1:
        raise ValueError(f"threshold must be >= 1, got {threshold}")
    return {t for t, c in extraction.counts.items() if c >= threshold}


def general_corpus_filter(tokens: Set[Token], vocab: Vocabulary) -> set[Token]:
    """Drop every token that the general-domain vocabulary knows."""
    return {t for t in tokens if t not in vocab}


def per_talk_unique_filter(
    extractions: Mapping[str, Set[Token]], mode: str = "any"
) -> dict[str, set[Token]]:
    """Keep, per talk, only words other talks do not share.

    mode "any" (default): a word survives for talk T iff no other talk has
    it, so the outputs are pairwise disjoint. mode "all": a word is dropped
    only when every other talk has it, the literal reading of sharing with
    all others. Undefined below two talks.
    """
    if len(extractions) < 2:
        raise ValueError("per-talk uniqueness needs at least 2 talks")
    if mode not in ("any", "all"):
        raise ValueError(f"unknown mode {mode!r}")
    talk_count = Counter()
    for tokens in extractions.values():
        talk_count.update(set(tokens))
    result: dict[str, set[Token]] = {}
    n_others = len(extractions) - 1
    for talk_id, tokens in extractions.items():
        if mode == "any":
            result[talk_id] = {t for t in tokens if talk_count[t] == 1}
        else:
            result[talk_id] = {t for t in tokens if talk_count[t] - 1 < n_others}
    return result


def order_words(words: Set[Token], counts: Mapping[Token, int]) -> list[Token]:
    """Deterministic prompt order: frequent first, ties alphabetical."""
    return sorted(words, key=lambda t: (-counts.get(t, 0), t))


def extract_from_images(
    talk_id: str,
    images: Sequence[str],
    extract: Callable[[str], str],
    backend_id: str,
    policy: NormalizationPolicy = DEFAULT_POLICY,
    max_workers: int = 4,
) -> tuple[RawExtraction, dict[str, str]]:
    """Run slide-text extraction over a talk's frames and pool the tokens.

    ``extract`` maps an image path to raw text. A failing image is recorded
    in the returned error map and excluded from the counts; the extraction
    is built from whatever images survive.
    """
    errors: dict[str, str] = {}
    counts: Counter[Token] = Counter()

    def run(image: str) -> tuple[str, str | None, str | None]:
        try:
            return image, extract(image), None
        except Exception as exc:
            return image, None, str(exc)

    if images:
        with ThreadPoolExecutor(max_workers=max(1, max_workers)) as pool:
            results = list(pool.map(run, images))
    else:
        results = []
    for image, text, error in results:
        if error is not None:
            errors[image] = error
        else:
            counts.update(normalize(text, policy))
    return RawExtraction(talk_id, dict(counts), backend_id), errors


def evaluation_context(
    extraction: RawExtraction,
    vocab: Vocabulary,
    threshold: int = DEFAULT_FREQUENCY_THRESHOLD,
) -> ContextWords:
    """Evaluation regime: frequency filter, then general-corpus filter."""
    frequent = frequency_filter(extraction, threshold)
    kept = general_corpus_filter(frequent, vocab)
    provenance = {
        "backend": extraction.backend_id,
        "filters": ["frequency", "general_corpus"],
        "frequency_threshold": threshold,
        "raw_unique": len(extraction.counts),
        "after_frequency": len(frequent),
        "after_general_corpus": len(kept),
    }
    if not extraction.counts:
        provenance["warning"] = "no extracted text"
    return ContextWords(
        talk_id=extraction.talk_id,
        words=tuple(order_words(kept, extraction.counts)),
        provenance=provenance,
    )


def augmentation_contexts(
    extractions: Mapping[str, RawExtraction],
    threshold: int = DEFAULT_FREQUENCY_THRESHOLD,
    unique_mode: str = "any",
) -> dict[str, ContextWords]:
    """Augmentation regime: frequency filter, then per-talk uniqueness.

    Needs the whole corpus at once because uniqueness is relative to the
    other talks.
    """
    frequent = {
        talk_id: frequency_filter(extraction, threshold)
        for talk_id, extraction in extractions.items()
    }
    unique = per_talk_unique_filter(frequent, mode=unique_mode)
    out: dict[str, ContextWords] = {}
    for talk_id, extraction in extractions.items():
        provenance = {
            "backend": extraction.backend_id,
            "filters": ["frequency", "talk_unique"],
            "frequency_threshold": threshold,
            "unique_mode": unique_mode,
            "raw_unique": len(extraction.counts),
            "after_frequency": len(frequent[talk_id]),
            "after_talk_unique": len(unique[talk_id]),
        }
        if not extraction.counts:
            provenance["warning"] = "no extracted text"
        out[talk_id] = ContextWords(
            talk_id=talk_id,
            words=tuple(order_words(unique[talk_id], extraction.counts)),
            provenance=provenance,
        )
    return out


def replay(
    extraction: RawExtraction,
    provenance: Mapping[str, object],
    vocab: Vocabulary | None = None,
    corpus: Mapping[str, RawExtraction] | None = None,
) -> tuple[Token, ...]:
    """Re-run the filter chain a ContextWords provenance records.

    Returns the words the chain produces now; equality with the stored
    words is the integrity check.
    """
    threshold = int(provenance["frequency_threshold"])
    filters = list(provenance["filters"])
    if filters == ["frequency", "general_corpus"]:
        if vocab is None:
            raise ValueError("general_corpus replay needs the vocabulary")
        kept = general_corpus_filter(frequency_filter(extraction, threshold), vocab)
    elif filters == ["frequency", "talk_unique"]:
        if corpus is None:
            raise ValueError("talk_unique replay needs the full corpus")
        frequent = {
            talk_id: frequency_filter(e, threshold) for talk_id, e in corpus.items()
        }
        kept = per_talk_unique_filter(frequent, mode=str(provenance["unique_mode"]))[
            extraction.talk_id
        ]
    else:
        raise ValueError(f"unknown filter chain {filters!r}")
    return tuple(order_words(kept, extraction.counts))
