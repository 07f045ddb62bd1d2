"""
Scoring a hypothesis against a reference
========================================

Word-level alignment, overall WER, and the two special-word error
rates, on a pair of sentences small enough to check by hand.
"""

from slidescribe.metrics import (
    ErrorCounts,
    metric_report,
    score_segment,
    wer_t_hyp,
    wer_t_ref,
)
from slidescribe.textnorm import normalize

reference = "The KinyaBERT model beats BERT."
hypothesis = "the kinyabert model beats kinyabert"

# words absent from a general vocabulary; here chosen by hand
special = {"kinyabert", "bert"}

alignment, counts = score_segment(
    normalize(reference), normalize(hypothesis), special
)

print("alignment ops:")
for op in alignment.ops:
    print(f"  {op.kind:<10} ref={op.ref!r:<14} hyp={op.hyp!r}")

report = metric_report(counts)
print(f"WER        {report.wer.as_percent()}")
print(f"WER_t_ref  {report.wer_t_ref.as_percent()}")
print(f"WER_t_hyp  {report.wer_t_hyp.as_percent()}")

# Error counts merge associatively, so corpus rates are micro-averages:
# summing per-talk tallies and dividing once. Two corpus-sized tallies:
ref_side = ErrorCounts(ref_recognized=251, ref_substituted=60, ref_deleted=22)
hyp_side = ErrorCounts(hyp_recognized=150, hyp_substituted=100, hyp_inserted=26)
print(f"corpus WER_t_ref {wer_t_ref(ref_side).as_percent()}")
print(f"corpus WER_t_hyp {wer_t_hyp(hyp_side).as_percent()}")
