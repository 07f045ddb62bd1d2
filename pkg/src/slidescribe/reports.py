"""Run report assembly and emission: machine JSON plus a human table.

The JSON document is fully deterministic for a fixed config and fixed
backend outputs: keys are sorted, numbers are full precision, and wall-time
measurements live in a separate timing sidecar so two identical runs emit
byte-identical reports. The text table rounds rates to two decimals for
eyeball comparison; the JSON keeps the exact fractions.
"""

from __future__ import annotations

import json
import os
from collections.abc import Mapping
from dataclasses import dataclass, field

from .metrics import ErrorCounts, MetricReport, metric_report
from .significance import SignificanceResult

REPORT_NAME = "report.json"
TABLE_NAME = "report.txt"
TIMING_NAME = "timing.json"


@dataclass(frozen=True)
class RunReport:
    config: Mapping[str, object]
    talks: Mapping[str, MetricReport]
    aggregate: MetricReport
    recognized: int
    not_recognized: int
    significance: SignificanceResult | None = None
    failures: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        merged = sum((r.counts for r in self.talks.values()), ErrorCounts())
        if merged != self.aggregate.counts:
            raise ValueError("aggregate counts do not equal the per-talk merge")

    def to_dict(self) -> dict:
        return {
            "config": dict(self.config),
            "talks": {talk: report.to_dict() for talk, report in self.talks.items()},
            "aggregate": self.aggregate.to_dict(),
            "recognized": {
                "recognized": self.recognized,
                "not_recognized": self.not_recognized,
            },
            "significance": None if self.significance is None else self.significance.to_dict(),
            "failures": dict(self.failures),
        }


def build_run_report(
    config_snapshot: Mapping[str, object],
    per_talk_counts: Mapping[str, ErrorCounts],
    significance: SignificanceResult | None = None,
    failures: Mapping[str, str] | None = None,
) -> RunReport:
    aggregate = sum(per_talk_counts.values(), ErrorCounts())
    return RunReport(
        config=dict(config_snapshot),
        talks={talk: metric_report(c) for talk, c in sorted(per_talk_counts.items())},
        aggregate=metric_report(aggregate),
        recognized=aggregate.ref_recognized,
        not_recognized=aggregate.ref_substituted + aggregate.ref_deleted,
        significance=significance,
        failures=dict(failures or {}),
    )


def render_table(report: RunReport) -> str:
    """Fixed-width table, one row per talk plus the aggregate."""
    header = f"{'scope':<28} {'WER':>8} {'WER_t_ref':>10} {'WER_t_hyp':>10} {'ref_words':>10} {'special':>8}"
    rows = [header, "-" * len(header)]

    def row(label: str, metric: MetricReport) -> str:
        counts = metric.counts
        return (
            f"{label:<28} {metric.wer.as_percent():>8} "
            f"{metric.wer_t_ref.as_percent():>10} {metric.wer_t_hyp.as_percent():>10} "
            f"{counts.ref_length:>10} {counts.ref_special_total:>8}"
        )

    for talk_id in sorted(report.talks):
        rows.append(row(talk_id, report.talks[talk_id]))
    rows.append("-" * len(header))
    rows.append(row("aggregate", report.aggregate))
    if report.significance is not None:
        s = report.significance
        rows.append("")
        rows.append(
            f"matched-pair test: statistic {s.statistic:+.4f}, "
            f"p = {s.p_value:.6g} ({s.method}, n = {s.n_segments})"
        )
    if report.failures:
        rows.append("")
        rows.append(f"failures ({len(report.failures)}):")
        for scope in sorted(report.failures):
            rows.append(f"  {scope}: {report.failures[scope]}")
    return "\n".join(rows) + "\n"


def write_run_report(
    out_dir: str, report: RunReport, timings: Mapping[str, float] | None = None
) -> str:
    """Emit report.json, report.txt and the timing sidecar; returns the JSON path.

    Any absolute reference to ``out_dir`` inside the document is rewritten
    relative to the output root, so reports from different output
    directories over the same inputs stay byte-identical.
    """
    os.makedirs(out_dir, exist_ok=True)
    root = os.path.abspath(out_dir)
    text = json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    text = text.replace(root + os.sep, "").replace(root, ".")
    json_path = os.path.join(out_dir, REPORT_NAME)
    with open(json_path, "w", encoding="utf-8") as handle:
        handle.write(text)
    table = render_table(report).replace(root + os.sep, "").replace(root, ".")
    with open(os.path.join(out_dir, TABLE_NAME), "w", encoding="utf-8") as handle:
        handle.write(table)
    if timings is not None:
        with open(os.path.join(out_dir, TIMING_NAME), "w", encoding="utf-8") as handle:
            json.dump(
                {"stages_s": dict(timings), "total_s": sum(timings.values())},
                handle,
                indent=2,
                sort_keys=True,
            )
            handle.write("\n")
    return json_path
