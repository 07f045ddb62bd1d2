import json
import os

import pytest

from slidescribe import cli
from slidescribe.stages import EXIT_OK, EXIT_PARTIAL, EXIT_TOTAL, EXIT_VALIDATION

from conftest import EXPECTED_SPECIAL, VOCABULARY_WORDS


def read_json(path):
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


def test_parser_requires_a_subcommand():
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args([])


def test_parser_wires_common_flags():
    args = cli.build_parser().parse_args(
        ["eval", "--config", "c.json", "--out", "o", "--jobs", "3",
         "--seed", "7", "--force-stage", "frames", "--force-stage", "score"]
    )
    assert args.config == "c.json"
    assert args.out == "o"
    assert args.jobs == 3
    assert args.seed == 7
    assert args.force_stage == ["frames", "score"]


# -- extract-terms ------------------------------------------------------------


def test_extract_terms_writes_files_and_stats(corpus, capsys):
    code = cli.main(["extract-terms", "--config", corpus["config"]])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "talk1: total 3, unique 2" in out
    assert "talk2: total 2, unique 2" in out
    assert "all talks: total 5, unique 4" in out

    terms = read_json(os.path.join(corpus["out"], "terms", "talk1.json"))
    assert terms["occurrences"] == EXPECTED_SPECIAL["talk1"]
    stats = read_json(os.path.join(corpus["out"], "terms", "stats.json"))
    assert stats["total"] == 5
    assert stats["unique"] == 4


def test_extract_terms_warns_when_vocabulary_covers_everything(corpus, capsys):
    full = list(VOCABULARY_WORDS) + ["kinyabert", "bert", "protein", "alphafold"]
    vocab = corpus["root"] / "vocab_full.txt"
    vocab.write_text("".join(f"{w}\n" for w in full), encoding="utf-8")
    config = read_json(corpus["config"])
    config["vocabulary"] = str(vocab)
    config_path = corpus["root"] / "config_full.json"
    config_path.write_text(json.dumps(config), encoding="utf-8")

    with pytest.warns(UserWarning, match="no special words"):
        code = cli.main(["extract-terms", "--config", str(config_path)])
    assert code == EXIT_OK
    captured = capsys.readouterr()
    assert "all talks: total 0, unique 0" in captured.out
    assert "warning: no special words found" in captured.err


# -- eval ----------------------------------------------------------------------


def test_eval_scores_stored_hypotheses(corpus, capsys):
    code = cli.main(["eval", "--config", corpus["config"]])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    aggregate_row = next(l for l in out.splitlines() if l.startswith("aggregate"))
    assert "25.00" in aggregate_row  # 4 errors over 16 reference words
    assert "40.00" in aggregate_row  # 2 of 5 special occurrences wrong
    # system B is the references themselves, so the paired test is one-sided
    assert "matched-pair test: statistic +1.0000, p = 0.25 (exact, n = 4)" in out

    report = read_json(os.path.join(corpus["out"], "report.json"))
    assert report["aggregate"]["wer"]["value"] == pytest.approx(0.25)
    assert report["aggregate"]["wer_t_hyp"]["value"] == pytest.approx(0.25)
    assert report["recognized"] == {"recognized": 3, "not_recognized": 2}
    assert report["failures"] == {}
    assert "out_dir" not in report["config"]


def test_eval_missing_segment_is_partial(corpus, capsys):
    hyp = read_json(corpus["hypotheses"])
    del hyp["talk1"]["t1s1"]
    (corpus["root"] / "hypotheses_a.json").write_text(
        json.dumps(hyp), encoding="utf-8"
    )
    code = cli.main(["eval", "--config", corpus["config"]])
    assert code == EXIT_PARTIAL
    report = read_json(os.path.join(corpus["out"], "report.json"))
    assert report["failures"]["talk1/t1s1"] == "segment missing from hypotheses"
    # the rest of talk1 and all of talk2 are still scored
    assert report["talks"]["talk2"]["counts"]["matches"] == 6


def test_eval_without_any_hypotheses_is_total_failure(corpus, capsys):
    (corpus["root"] / "hypotheses_a.json").write_text("{}", encoding="utf-8")
    code = cli.main(["eval", "--config", corpus["config"]])
    assert code == EXIT_TOTAL
    report = read_json(os.path.join(corpus["out"], "report.json"))
    assert report["failures"]["talk1"] == "no hypotheses for this talk"


def test_out_flag_overrides_config(corpus, capsys):
    other = corpus["root"] / "elsewhere"
    code = cli.main(
        ["eval", "--config", corpus["config"], "--out", str(other)]
    )
    assert code == EXIT_OK
    assert (other / "report.json").exists()
    assert not os.path.exists(os.path.join(corpus["out"], "report.json"))


# -- config validation ---------------------------------------------------------


def test_missing_config_file_exits_validation(tmp_path, capsys):
    code = cli.main(["eval", "--config", str(tmp_path / "nope.json")])
    assert code == EXIT_VALIDATION
    assert capsys.readouterr().err.startswith("config error:")


def test_unknown_config_key_exits_validation(tmp_path, capsys):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"talks": [], "wordcap": 3}), encoding="utf-8")
    code = cli.main(["eval", "--config", str(path)])
    assert code == EXIT_VALIDATION
    assert "unknown config keys: ['wordcap']" in capsys.readouterr().err


def test_malformed_config_exits_validation(tmp_path, capsys):
    path = tmp_path / "config.json"
    path.write_text("{not json", encoding="utf-8")
    code = cli.main(["eval", "--config", str(path)])
    assert code == EXIT_VALIDATION
    assert "config error:" in capsys.readouterr().err


def test_missing_required_entry_exits_validation(corpus, capsys):
    config = read_json(corpus["config"])
    del config["hypotheses"]
    del config["hypotheses_b"]
    path = corpus["root"] / "config_nohyp.json"
    path.write_text(json.dumps(config), encoding="utf-8")
    code = cli.main(["eval", "--config", str(path)])
    assert code == EXIT_VALIDATION
    assert "'hypotheses' is required" in capsys.readouterr().err


def test_dangling_path_exits_validation(corpus, capsys):
    config = read_json(corpus["config"])
    config["hypotheses"] = "missing.json"
    path = corpus["root"] / "config_dangling.json"
    path.write_text(json.dumps(config), encoding="utf-8")
    code = cli.main(["eval", "--config", str(path)])
    assert code == EXIT_VALIDATION
    assert "hypotheses path not found" in capsys.readouterr().err


# -- significance ----------------------------------------------------------------


def test_significance_between_hypothesis_sets(corpus, capsys):
    code = cli.main(["significance", "--config", corpus["config"]])
    assert code == EXIT_OK
    line = capsys.readouterr().out.strip()
    assert line == "statistic +1.0000, p = 0.25 (exact, n = 4)"
    doc = read_json(os.path.join(corpus["out"], "significance.json"))
    assert doc["result"]["p_value"] == pytest.approx(0.25)
    assert doc["paired_segments"] == [
        "talk1/t1s0", "talk1/t1s1", "talk2/t2s0", "talk2/t2s1",
    ]
