"""WER plus the two special-word error rates.

The reference-centric rate answers "how many domain-specific words in the
manual transcript were missed or mangled" (recall-style); the
hypothesis-centric rate answers "how many domain-specific words the model
emitted are wrong" (precision-style):

    rate_ref = (substituted + deleted)  / (recognized + substituted + deleted)
    rate_hyp = (substituted + inserted) / (recognized + substituted + inserted)

both counted over special-word occurrences only. Zero denominators yield an
explicit undefined flag instead of a silent zero so aggregate tables can
tell "perfect" from "vacuous". Aggregation is micro-averaged: counts are
summed over all segments of a split before the division.
"""

from __future__ import annotations

from collections.abc import Iterable, Set
from dataclasses import dataclass

from .alignment import DELETE, INSERT, MATCH, SUBSTITUTE, Alignment, align
from .lexicon import SpecialWordSet
from .textnorm import Token


@dataclass(frozen=True)
class Rate:
    """A fraction plus a flag for zero-denominator cases."""

    value: float
    defined: bool = True

    def as_percent(self) -> str:
        return f"{100.0 * self.value:.2f}" if self.defined else "n/a"


@dataclass(frozen=True)
class ErrorCounts:
    """Error tallies of one or more aligned segments.

    ``matches``/``substitutions``/``deletions``/``insertions`` cover all
    words; the ``ref_*`` and ``hyp_*`` fields cover only special-word
    occurrences, attributed to the side the special token appears on.
    Addition merges counts field-wise (associative and commutative), so
    per-segment counts can be reduced in any order.
    """

    matches: int = 0
    substitutions: int = 0
    deletions: int = 0
    insertions: int = 0
    ref_recognized: int = 0
    ref_substituted: int = 0
    ref_deleted: int = 0
    hyp_recognized: int = 0
    hyp_substituted: int = 0
    hyp_inserted: int = 0

    def __add__(self, other: "ErrorCounts") -> "ErrorCounts":
        return ErrorCounts(
            self.matches + other.matches,
            self.substitutions + other.substitutions,
            self.deletions + other.deletions,
            self.insertions + other.insertions,
            self.ref_recognized + other.ref_recognized,
            self.ref_substituted + other.ref_substituted,
            self.ref_deleted + other.ref_deleted,
            self.hyp_recognized + other.hyp_recognized,
            self.hyp_substituted + other.hyp_substituted,
            self.hyp_inserted + other.hyp_inserted,
        )

    @property
    def ref_length(self) -> int:
        return self.matches + self.substitutions + self.deletions

    @property
    def ref_special_total(self) -> int:
        return self.ref_recognized + self.ref_substituted + self.ref_deleted

    @property
    def hyp_special_total(self) -> int:
        return self.hyp_recognized + self.hyp_substituted + self.hyp_inserted

    def to_dict(self) -> dict[str, int]:
        return {
            "matches": self.matches,
            "substitutions": self.substitutions,
            "deletions": self.deletions,
            "insertions": self.insertions,
            "ref_special": {
                "recognized": self.ref_recognized,
                "substituted": self.ref_substituted,
                "deleted": self.ref_deleted,
            },
            "hyp_special": {
                "recognized": self.hyp_recognized,
                "substituted": self.hyp_substituted,
                "inserted": self.hyp_inserted,
            },
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ErrorCounts":
        ref = doc.get("ref_special", {})
        hyp = doc.get("hyp_special", {})
        return cls(
            matches=doc["matches"],
            substitutions=doc["substitutions"],
            deletions=doc["deletions"],
            insertions=doc["insertions"],
            ref_recognized=ref.get("recognized", 0),
            ref_substituted=ref.get("substituted", 0),
            ref_deleted=ref.get("deleted", 0),
            hyp_recognized=hyp.get("recognized", 0),
            hyp_substituted=hyp.get("substituted", 0),
            hyp_inserted=hyp.get("inserted", 0),
        )


@dataclass(frozen=True)
class MetricReport:
    """WER and both special-word rates for one talk or one split."""

    wer: Rate
    wer_t_ref: Rate
    wer_t_hyp: Rate
    counts: ErrorCounts

    def to_dict(self) -> dict:
        return {
            "wer": {"value": self.wer.value, "defined": self.wer.defined},
            "wer_t_ref": {"value": self.wer_t_ref.value, "defined": self.wer_t_ref.defined},
            "wer_t_hyp": {"value": self.wer_t_hyp.value, "defined": self.wer_t_hyp.defined},
            "counts": self.counts.to_dict(),
        }


def wer(alignment: Alignment, ref_len: int) -> Rate:
    """(substitutions + deletions + insertions) / reference length.

    ``ref_len`` must equal the number of ref-side tokens in the alignment.
    An empty reference scores 0 against an empty hypothesis and is
    undefined against a non-empty one.
    """
    actual = len(alignment.ref_tokens)
    if ref_len != actual:
        raise ValueError(f"ref_len {ref_len} != alignment's reference length {actual}")
    errors = alignment.cost
    if ref_len == 0:
        if errors == 0:
            return Rate(0.0)
        return Rate(0.0, defined=False)
    return Rate(errors / ref_len)


def _special_tokens(special: SpecialWordSet | Set[Token]) -> Set[Token]:
    if isinstance(special, SpecialWordSet):
        return special.words
    return special


def special_error_counts(
    alignment: Alignment, special: SpecialWordSet | Set[Token]
) -> ErrorCounts:
    """Tally overall and special-word errors off one alignment.

    Ref-side attribution: a substitution or deletion counts as a special
    error iff its reference token is special. Hyp-side: a substitution or
    insertion counts iff its hypothesis token is special. A match is
    recognized on both sides or neither (matched tokens are equal).
    """
    words = _special_tokens(special)
    matches = substitutions = deletions = insertions = 0
    ref_recognized = ref_substituted = ref_deleted = 0
    hyp_substituted = hyp_inserted = 0
    for op in alignment.ops:
        if op.kind == MATCH:
            matches += 1
            if op.ref in words:
                ref_recognized += 1
        elif op.kind == SUBSTITUTE:
            substitutions += 1
            if op.ref in words:
                ref_substituted += 1
            if op.hyp in words:
                hyp_substituted += 1
        elif op.kind == DELETE:
            deletions += 1
            if op.ref in words:
                ref_deleted += 1
        else:
            insertions += 1
            if op.hyp in words:
                hyp_inserted += 1
    return ErrorCounts(
        matches=matches,
        substitutions=substitutions,
        deletions=deletions,
        insertions=insertions,
        ref_recognized=ref_recognized,
        ref_substituted=ref_substituted,
        ref_deleted=ref_deleted,
        hyp_recognized=ref_recognized,
        hyp_substituted=hyp_substituted,
        hyp_inserted=hyp_inserted,
    )


def wer_t_ref(counts: ErrorCounts) -> Rate:
    """Reference-side special-word error rate."""
    errors = counts.ref_substituted + counts.ref_deleted
    denominator = counts.ref_special_total
    if denominator == 0:
        return Rate(0.0, defined=False)
    return Rate(errors / denominator)


def wer_t_hyp(counts: ErrorCounts) -> Rate:
    """Hypothesis-side special-word error rate."""
    errors = counts.hyp_substituted + counts.hyp_inserted
    denominator = counts.hyp_special_total
    if denominator == 0:
        return Rate(0.0, defined=False)
    return Rate(errors / denominator)


def overall_wer(counts: ErrorCounts) -> Rate:
    """WER from summed counts (micro-average over segments)."""
    errors = counts.substitutions + counts.deletions + counts.insertions
    if counts.ref_length == 0:
        if errors == 0:
            return Rate(0.0)
        return Rate(0.0, defined=False)
    return Rate(errors / counts.ref_length)


def metric_report(counts: ErrorCounts) -> MetricReport:
    return MetricReport(
        wer=overall_wer(counts),
        wer_t_ref=wer_t_ref(counts),
        wer_t_hyp=wer_t_hyp(counts),
        counts=counts,
    )


def recognized_tally(counts: Iterable[ErrorCounts]) -> tuple[int, int]:
    """(times recognized, times not recognized) over reference special words."""
    recognized = 0
    missed = 0
    for item in counts:
        recognized += item.ref_recognized
        missed += item.ref_substituted + item.ref_deleted
    return recognized, missed


def score_segment(
    ref_tokens: list[Token],
    hyp_tokens: list[Token],
    special: SpecialWordSet | Set[Token] = frozenset(),
) -> tuple[Alignment, ErrorCounts]:
    """Align one segment pair and tally its errors."""
    alignment = align(ref_tokens, hyp_tokens)
    return alignment, special_error_counts(alignment, special)
