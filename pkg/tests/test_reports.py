import json

import pytest

from slidescribe.metrics import ErrorCounts, metric_report
from slidescribe.reports import (
    RunReport,
    build_run_report,
    render_table,
    write_run_report,
)
from slidescribe.significance import matched_pair_test

COUNTS = {
    "talk1": ErrorCounts(
        matches=7, substitutions=2, insertions=1,
        ref_recognized=1, ref_substituted=2,
        hyp_recognized=1, hyp_substituted=1,
    ),
    "talk2": ErrorCounts(
        matches=6, substitutions=1,
        ref_recognized=2, hyp_recognized=2,
    ),
}


def test_build_report_aggregates_counts():
    report = build_run_report({"seed": 0}, COUNTS)
    assert report.aggregate.counts.matches == 13
    assert report.aggregate.counts.substitutions == 3
    assert report.aggregate.wer.value == pytest.approx(4 / 16)
    assert report.recognized == 3
    assert report.not_recognized == 2
    assert sorted(report.talks) == ["talk1", "talk2"]


def test_report_rejects_inconsistent_aggregate():
    with pytest.raises(ValueError, match="aggregate"):
        RunReport(
            config={},
            talks={"t": metric_report(ErrorCounts(matches=3))},
            aggregate=metric_report(ErrorCounts(matches=99)),
            recognized=0,
            not_recognized=0,
        )


def test_render_table_shape():
    report = build_run_report({}, COUNTS)
    table = render_table(report)
    lines = table.splitlines()
    assert lines[0].split() == [
        "scope", "WER", "WER_t_ref", "WER_t_hyp", "ref_words", "special",
    ]
    talk1_row = next(line for line in lines if line.startswith("talk1"))
    assert "33.33" in talk1_row  # 3 errors over 9 reference words
    aggregate_row = next(line for line in lines if line.startswith("aggregate"))
    assert "25.00" in aggregate_row
    assert "40.00" in aggregate_row  # ref special: 2 errors of 5
    assert table.endswith("\n")


def test_render_table_significance_and_failures():
    significance = matched_pair_test([5, 4, 6, 5], [1, 0, 2, 1])
    report = build_run_report(
        {}, COUNTS, significance=significance, failures={"frames:t9": "no video"}
    )
    table = render_table(report)
    assert "matched-pair test: statistic +4.0000, p = 0.125 (exact, n = 4)" in table
    assert "failures (1):" in table
    assert "frames:t9: no video" in table


def test_undefined_rates_render_as_na():
    report = build_run_report({}, {"t": ErrorCounts(matches=2)})
    table = render_table(report)
    assert "n/a" in table


def test_write_report_rewrites_output_root(tmp_path):
    out = tmp_path / "out"
    report = build_run_report(
        {},
        COUNTS,
        failures={"frames:t1/s0": f"image missing: {out}/frames/t1/s0.png"},
    )
    write_run_report(str(out), report, timings={"frames": 1.25, "score": 0.5})
    doc = json.loads((out / "report.json").read_text(encoding="utf-8"))
    assert doc["failures"]["frames:t1/s0"] == "image missing: frames/t1/s0.png"
    table = (out / "report.txt").read_text(encoding="utf-8")
    assert str(out) not in table
    timing = json.loads((out / "timing.json").read_text(encoding="utf-8"))
    assert timing["stages_s"] == {"frames": 1.25, "score": 0.5}
    assert timing["total_s"] == pytest.approx(1.75)


def test_json_report_is_deterministic(tmp_path):
    report = build_run_report({"seed": 0}, COUNTS)
    write_run_report(str(tmp_path / "a"), report)
    write_run_report(str(tmp_path / "b"), report)
    assert (tmp_path / "a" / "report.json").read_bytes() == (
        tmp_path / "b" / "report.json"
    ).read_bytes()
