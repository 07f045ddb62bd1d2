"""Word-level minimum edit alignment between reference and hypothesis.

Every metric in this package is counted off these alignments, so the
backtrace tie-break is fixed and documented: walking back from the terminal
cell, a diagonal step (match/substitute) is preferred over a deletion,
which is preferred over an insertion. Minimal cost is unaffected by the
tie-break; the per-category split of equal-cost alignments is.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .textnorm import Token

MATCH = "match"
SUBSTITUTE = "substitute"
DELETE = "delete"
INSERT = "insert"

_KINDS = (MATCH, SUBSTITUTE, DELETE, INSERT)


@dataclass(frozen=True)
class AlignmentOp:
    """One aligned step: a reference token, a hypothesis token, or both."""

    kind: str
    ref: Token | None = None
    hyp: Token | None = None

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown op kind {self.kind!r}")
        if self.kind == MATCH and (self.ref is None or self.ref != self.hyp):
            raise ValueError("match requires identical ref and hyp tokens")
        if self.kind == SUBSTITUTE and (
            self.ref is None or self.hyp is None or self.ref == self.hyp
        ):
            raise ValueError("substitute requires differing ref and hyp tokens")
        if self.kind == DELETE and (self.ref is None or self.hyp is not None):
            raise ValueError("delete carries only a ref token")
        if self.kind == INSERT and (self.hyp is None or self.ref is not None):
            raise ValueError("insert carries only a hyp token")


@dataclass(frozen=True)
class Alignment:
    """An ordered op sequence with minimal total edit cost."""

    ops: tuple[AlignmentOp, ...]
    cost: int

    def __post_init__(self) -> None:
        edits = sum(1 for op in self.ops if op.kind != MATCH)
        if edits != self.cost:
            raise ValueError(f"cost {self.cost} != number of edit ops {edits}")

    @property
    def ref_tokens(self) -> list[Token]:
        return [op.ref for op in self.ops if op.ref is not None]

    @property
    def hyp_tokens(self) -> list[Token]:
        return [op.hyp for op in self.ops if op.hyp is not None]

    def count(self, kind: str) -> int:
        return sum(1 for op in self.ops if op.kind == kind)


def align(ref: list[Token], hyp: list[Token]) -> Alignment:
    """Minimum edit alignment with unit substitution/deletion/insertion costs.

    Parameters
    ----------
    ref, hyp : list of Token
        Normalized token sequences; either side may be empty.

    Returns
    -------
    Alignment
        Deterministic under the documented backtrace tie-break; projecting
        the ref (hyp) side of the ops reproduces ``ref`` (``hyp``) exactly.
    """
    m, n = len(ref), len(hyp)
    cost = np.zeros((m + 1, n + 1), dtype=np.int32)
    cost[:, 0] = np.arange(m + 1)
    cost[0, :] = np.arange(n + 1)
    for i in range(1, m + 1):
        ref_token = ref[i - 1]
        above = cost[i - 1]
        row = cost[i]
        for j in range(1, n + 1):
            diagonal = above[j - 1] + (ref_token != hyp[j - 1])
            row[j] = min(diagonal, above[j] + 1, row[j - 1] + 1)

    ops: list[AlignmentOp] = []
    i, j = m, n
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            substituted = ref[i - 1] != hyp[j - 1]
            if cost[i, j] == cost[i - 1, j - 1] + substituted:
                kind = SUBSTITUTE if substituted else MATCH
                ops.append(AlignmentOp(kind, ref[i - 1], hyp[j - 1]))
                i -= 1
                j -= 1
                continue
        if i > 0 and cost[i, j] == cost[i - 1, j] + 1:
            ops.append(AlignmentOp(DELETE, ref[i - 1], None))
            i -= 1
            continue
        ops.append(AlignmentOp(INSERT, None, hyp[j - 1]))
        j -= 1
    ops.reverse()
    return Alignment(tuple(ops), int(cost[m, n]))
