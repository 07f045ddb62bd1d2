import itertools
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slidescribe.significance import SignificanceResult, matched_pair_test


def brute_force_p(differences):
    """Enumerate sign flips one by one, no vectorization."""
    observed = abs(sum(differences))
    hits = 0
    n = len(differences)
    for signs in itertools.product((-1, 1), repeat=n):
        total = sum(s * d for s, d in zip(signs, differences))
        if abs(total) >= observed:
            hits += 1
    return hits / 2**n


def test_frozen_four_segment_case():
    # constant shift of 4 on every segment: only the two all-same sign
    # vectors reach |16|, so p = 2 / 16.
    result = matched_pair_test([5, 4, 6, 5], [1, 0, 2, 1])
    assert result.method == "exact"
    assert result.statistic == pytest.approx(4.0)
    assert result.p_value == pytest.approx(0.125)
    assert result.n_segments == 4
    assert result.defined


def test_identical_inputs_give_p_one():
    errors = [3, 1, 4, 1, 5]
    result = matched_pair_test(errors, errors)
    assert result.statistic == 0.0
    assert result.p_value == 1.0


def test_swapping_inputs_negates_statistic_keeps_p():
    a = [5, 2, 7, 3, 6]
    b = [1, 2, 3, 0, 4]
    forward = matched_pair_test(a, b)
    backward = matched_pair_test(b, a)
    assert backward.statistic == pytest.approx(-forward.statistic)
    assert backward.p_value == pytest.approx(forward.p_value)


def test_exact_matches_brute_force_on_random_cases():
    rng = random.Random(42)
    for _ in range(25):
        n = rng.randint(2, 9)
        a = [rng.randint(0, 6) for _ in range(n)]
        b = [rng.randint(0, 6) for _ in range(n)]
        result = matched_pair_test(a, b, method="exact")
        expected = brute_force_p([x - y for x, y in zip(a, b)])
        assert result.p_value == pytest.approx(expected), (a, b)


def test_length_mismatch_raises():
    with pytest.raises(ValueError, match="differ in length"):
        matched_pair_test([1, 2], [1])


def test_fewer_than_two_segments_is_degenerate():
    for a, b in ([[], []], [[3], [1]]):
        result = matched_pair_test(a, b)
        assert not result.defined
        assert result.method == "degenerate"
        assert result.p_value == 1.0


def test_auto_switches_to_normal_above_threshold():
    rng = random.Random(0)
    a = [rng.randint(0, 10) for _ in range(21)]
    b = [rng.randint(0, 10) for _ in range(21)]
    result = matched_pair_test(a, b)
    assert result.method == "normal"
    exact_like = matched_pair_test(a, b, exact_threshold=21)
    assert exact_like.method == "exact"


def test_normal_approximation_formula():
    rng = random.Random(3)
    a = [rng.randint(0, 12) for _ in range(40)]
    b = [rng.randint(0, 12) for _ in range(40)]
    result = matched_pair_test(a, b, method="normal")
    d = np.array(a, dtype=float) - np.array(b, dtype=float)
    z = d.mean() / (d.std(ddof=1) / math.sqrt(len(d)))
    assert result.p_value == pytest.approx(math.erfc(abs(z) / math.sqrt(2.0)))


def test_normal_zero_variance_conventions():
    same_shift = matched_pair_test([4, 4, 4], [1, 1, 1], method="normal")
    assert same_shift.p_value == 0.0
    no_shift = matched_pair_test([2, 2, 2], [2, 2, 2], method="normal")
    assert no_shift.p_value == 1.0


def test_sampled_method_is_seeded_and_reproducible():
    a = [5, 2, 7, 3, 6, 1, 8]
    b = [1, 2, 3, 0, 4, 1, 5]
    first = matched_pair_test(a, b, method="sampled", seed=11)
    again = matched_pair_test(a, b, method="sampled", seed=11)
    other = matched_pair_test(a, b, method="sampled", seed=12)
    assert first.p_value == again.p_value
    assert 0.0 < first.p_value <= 1.0
    # different seeds may coincide but the result stays a valid estimate
    assert 0.0 < other.p_value <= 1.0


def test_sampled_approximates_exact():
    a = [6, 3, 5, 4, 7, 2]
    b = [1, 1, 2, 2, 3, 1]
    exact = matched_pair_test(a, b, method="exact")
    sampled = matched_pair_test(a, b, method="sampled", n_resamples=20000, seed=0)
    assert sampled.p_value == pytest.approx(exact.p_value, abs=0.02)


def test_unknown_method_rejected():
    with pytest.raises(ValueError, match="unknown method"):
        matched_pair_test([1, 2], [0, 1], method="bootstrap")


def test_result_serializes():
    result = matched_pair_test([5, 4, 6, 5], [1, 0, 2, 1])
    doc = result.to_dict()
    assert doc == {
        "statistic": 4.0,
        "p_value": 0.125,
        "n_segments": 4,
        "method": "exact",
        "defined": True,
    }
    assert isinstance(result, SignificanceResult)


@settings(max_examples=40)
@given(
    st.lists(st.integers(min_value=0, max_value=9), min_size=2, max_size=8),
    st.data(),
)
def test_exact_p_always_in_unit_interval_and_symmetric(a, data):
    b = data.draw(
        st.lists(
            st.integers(min_value=0, max_value=9), min_size=len(a), max_size=len(a)
        )
    )
    forward = matched_pair_test(a, b, method="exact")
    assert 0.0 < forward.p_value <= 1.0
    backward = matched_pair_test(b, a, method="exact")
    assert backward.p_value == forward.p_value
