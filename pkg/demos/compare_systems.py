"""
Is system B actually better than system A?
==========================================

A matched-pair significance test on per-segment error counts. Small
paired sets get the exact sign-flip distribution; larger ones switch
to a normal approximation automatically.
"""

import numpy as np

from slidescribe.significance import matched_pair_test

# per-segment error counts from two systems over the same four segments
errors_a = [5, 4, 6, 5]
errors_b = [1, 0, 2, 1]

result = matched_pair_test(errors_a, errors_b)
print(f"four segments: statistic {result.statistic:+.4f}, "
      f"p = {result.p_value:.6g} ({result.method})")

# the same gap over 200 segments is overwhelming evidence
rng = np.random.default_rng(7)
errors_a = rng.poisson(5.0, size=200).tolist()
errors_b = [max(0, a - int(rng.integers(0, 3))) for a in errors_a]
result = matched_pair_test(errors_a, errors_b)
print(f"200 segments:  statistic {result.statistic:+.4f}, "
      f"p = {result.p_value:.6g} ({result.method})")

# identical systems are never significant
result = matched_pair_test(errors_a, errors_a)
print(f"self vs self:  statistic {result.statistic:+.4f}, "
      f"p = {result.p_value:.6g} ({result.method})")
