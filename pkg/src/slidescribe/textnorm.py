"""Text normalization primitives shared by scoring and context extraction.

All word-level counting in this package happens over normalized tokens, so
reference transcripts, ASR hypotheses and OCR output must all pass through
the same policy before they are compared.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass

# A Token is a normalized word: non-empty, lowercase under the default
# policy, free of edge punctuation.
Token = str


@dataclass(frozen=True)
class NormalizationPolicy:
    """Configurable tokenization rules.

    The default policy: Unicode NFC, casefold, split on whitespace, strip
    punctuation/symbol characters from token edges (intra-word hyphens and
    apostrophes survive), drop tokens that are left empty. Number tokens are
    kept verbatim.
    """

    unicode_form: str = "NFC"
    lowercase: bool = True
    strip_edge_punctuation: bool = True


DEFAULT_POLICY = NormalizationPolicy()

# Unicode categories stripped from token edges: punctuation (P*) and
# symbols (S*).
_STRIPPED_CATEGORIES = ("P", "S")


def _is_strippable(char: str) -> bool:
    return unicodedata.category(char).startswith(_STRIPPED_CATEGORIES)


def _strip_edges(piece: str) -> str:
    start = 0
    end = len(piece)
    while start < end and _is_strippable(piece[start]):
        start += 1
    while end > start and _is_strippable(piece[end - 1]):
        end -= 1
    return piece[start:end]


def normalize(text: str, policy: NormalizationPolicy = DEFAULT_POLICY) -> list[Token]:
    """Turn raw text into the token sequence used for all counting.

    Deterministic, order-preserving and idempotent: normalizing the
    space-joined output reproduces it. Empty input yields an empty list.
    """
    text = unicodedata.normalize(policy.unicode_form, text)
    if policy.lowercase:
        text = text.casefold()
    tokens = []
    for piece in text.split():
        if policy.strip_edge_punctuation:
            piece = _strip_edges(piece)
        if piece:
            tokens.append(piece)
    return tokens


def join(tokens: list[Token]) -> str:
    """Inverse-ish of :func:`normalize`: one space between tokens."""
    return " ".join(tokens)
