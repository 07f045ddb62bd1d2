"""Matched-pair significance test on per-segment error counts.

Two systems are compared on the same segments; the null hypothesis is that
their per-segment error-count differences are symmetric around zero. Small
samples (n <= 20 by default) get an exact sign-flip permutation test; larger
samples use the standard normal approximation mean / (stddev / sqrt(n)).
The reported statistic is always the mean per-segment difference a - b.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

EXACT_THRESHOLD = 20

# Enumerated sign vectors are processed in blocks this large.
_BLOCK = 1 << 16


@dataclass(frozen=True)
class SignificanceResult:
    statistic: float
    p_value: float
    n_segments: int
    method: str
    defined: bool = True

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "n_segments": self.n_segments,
            "method": self.method,
            "defined": self.defined,
        }


def matched_pair_test(
    errors_a: Sequence[float],
    errors_b: Sequence[float],
    method: str = "auto",
    exact_threshold: int = EXACT_THRESHOLD,
    n_resamples: int = 10000,
    seed: int | None = None,
) -> SignificanceResult:
    """Two-sided matched-pair test for error counts.

    Parameters
    ----------
    errors_a, errors_b : sequence of number
        Per-segment error counts of the two systems, paired by position.
    method : str
        "auto" (exact up to ``exact_threshold`` segments, else normal),
        "exact", "normal", or "sampled" (Monte Carlo sign flips drawn with
        ``seed``; only used when explicitly requested).

    Returns
    -------
    SignificanceResult
        ``statistic`` is mean(a - b); swapping the inputs negates it and
        leaves the p-value unchanged. Fewer than two segments yields
        ``defined=False`` with p 1.0.
    """
    if len(errors_a) != len(errors_b):
        raise ValueError(
            f"paired sequences differ in length: {len(errors_a)} vs {len(errors_b)}"
        )
    n = len(errors_a)
    differences = np.asarray(errors_a, dtype=np.float64) - np.asarray(
        errors_b, dtype=np.float64
    )
    if n < 2:
        return SignificanceResult(0.0, 1.0, n, "degenerate", defined=False)
    statistic = float(differences.mean())

    if method == "auto":
        method = "exact" if n <= exact_threshold else "normal"
    if method == "exact":
        p = _exact_sign_flip_p(differences)
    elif method == "normal":
        p = _normal_approximation_p(differences)
    elif method == "sampled":
        p = _sampled_sign_flip_p(differences, n_resamples, seed)
    else:
        raise ValueError(f"unknown method {method!r}")
    return SignificanceResult(statistic, p, n, method)


def _exact_sign_flip_p(differences: np.ndarray) -> float:
    """Enumerate all 2^n sign assignments of the differences.

    Counts assignments whose |sum| reaches the observed |sum|; exact for
    integer-valued error counts (float64 sums are exact well past any
    realistic corpus size).
    """
    n = len(differences)
    observed = abs(float(differences.sum()))
    total = 1 << n
    shifts = np.arange(n, dtype=np.int64)
    hits = 0
    for start in range(0, total, _BLOCK):
        codes = np.arange(start, min(start + _BLOCK, total), dtype=np.int64)
        signs = (((codes[:, None] >> shifts) & 1) * 2 - 1).astype(np.float64)
        sums = signs @ differences
        hits += int((np.abs(sums) >= observed).sum())
    return hits / total


def _normal_approximation_p(differences: np.ndarray) -> float:
    n = len(differences)
    mean = float(differences.mean())
    stddev = float(differences.std(ddof=1))
    if stddev == 0.0:
        return 1.0 if mean == 0.0 else 0.0
    z = mean / (stddev / math.sqrt(n))
    return math.erfc(abs(z) / math.sqrt(2.0))


def _sampled_sign_flip_p(
    differences: np.ndarray, n_resamples: int, seed: int | None
) -> float:
    rng = np.random.default_rng(seed)
    observed = abs(float(differences.sum()))
    signs = rng.integers(0, 2, size=(n_resamples, len(differences))) * 2 - 1
    sums = signs.astype(np.float64) @ differences
    hits = int((np.abs(sums) >= observed).sum())
    # the observed assignment itself counts as one sample
    return (hits + 1) / (n_resamples + 1)
