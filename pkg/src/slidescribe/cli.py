"""Command-line entry point.

Every subcommand reads one JSON config file (see stages.RunConfig for the
keys) and takes the same global flags. Exit codes: 0 success, 2 invalid
configuration, 3 completed with scoped failures, 4 total failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback

from . import stages
from .reports import render_table
from .stages import EXIT_TOTAL, EXIT_VALIDATION, ConfigError, RunConfig, load_config


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON run config file")
    common.add_argument("--out", help="output directory (overrides the config)")
    common.add_argument("--jobs", type=int, help="parallelism bound (overrides the config)")
    common.add_argument("--seed", type=int, help="random seed (overrides the config)")
    common.add_argument(
        "--force-stage",
        action="append",
        metavar="STAGE",
        help="re-run this stage even if its outputs are current ('all' forces every stage)",
    )
    return common


def _cmd_extract_terms(config: RunConfig) -> int:
    code, stats = stages.run_extract_terms(config)
    for talk_id in sorted(stats["per_talk"]):
        entry = stats["per_talk"][talk_id]
        print(f"{talk_id}: total {entry['total']}, unique {entry['unique']}")
    print(f"all talks: total {stats['total']}, unique {stats['unique']}")
    if stats["total"] == 0:
        print("warning: no special words found", file=sys.stderr)
    return code


def _cmd_eval(config: RunConfig) -> int:
    code, report = stages.run_eval(config)
    print(render_table(report), end="")
    return code


def _cmd_pipeline(config: RunConfig) -> int:
    code, report = stages.run_pipeline(config)
    print(render_table(report), end="")
    return code


def _cmd_augment(config: RunConfig) -> int:
    code, summary = stages.run_augment(config)
    for talk_id in sorted(summary["talks"]):
        counts = summary["talks"][talk_id]
        print(
            f"{talk_id}: ok {counts['ok']}, failed {counts['failed']}, "
            f"skipped {counts['skipped']}"
        )
    if summary["failures"]:
        print(f"extraction failures: {len(summary['failures'])}", file=sys.stderr)
    return code


def _cmd_significance(config: RunConfig) -> int:
    code, result = stages.run_significance(config)
    print(
        f"statistic {result.statistic:+.4f}, p = {result.p_value:.6g} "
        f"({result.method}, n = {result.n_segments})"
    )
    return code


def _stage_cmd(runner) -> object:
    def handler(config: RunConfig) -> int:
        code, outcome = runner(config)
        state = "resumed (outputs current)" if outcome.resumed else "ran"
        print(f"stage {outcome.name}: {state}, {len(outcome.outputs)} output files")
        for scope in sorted(outcome.failures):
            print(f"  failure {scope}: {outcome.failures[scope]}", file=sys.stderr)
        return code

    return handler


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slidescribe",
        description="slide-context ASR evaluation and augmentation pipeline",
    )
    common = _common_flags()
    commands = parser.add_subparsers(dest="command", required=True)

    def register(name: str, help_text: str, handler) -> None:
        sub = commands.add_parser(name, parents=[common], help=help_text)
        sub.set_defaults(run=handler)

    register("extract-terms", "per-talk special words and corpus stats", _cmd_extract_terms)
    register("eval", "score stored hypotheses against references", _cmd_eval)
    register("frames", "grab one video frame per segment", _stage_cmd(stages.run_frames))
    register("build-context", "OCR frames and filter context words", _stage_cmd(stages.run_build_context))
    register("render-prompts", "render per-talk context prompts", _stage_cmd(stages.run_render_prompts))
    register("transcribe", "run the ASR backend over all segments", _stage_cmd(stages.run_transcribe))
    register("pipeline", "frames, context, prompts, transcription, scoring", _cmd_pipeline)
    register("augment", "synthesize slides and talk-unique word lists", _cmd_augment)
    register("significance", "matched-pair test between two hypothesis sets", _cmd_significance)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(
            args.config,
            out_dir=args.out,
            jobs=args.jobs,
            seed=args.seed,
            force_stages=args.force_stage,
        )
    except (ConfigError, OSError, json.JSONDecodeError, TypeError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        return args.run(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception:
        traceback.print_exc()
        return EXIT_TOTAL


if __name__ == "__main__":
    sys.exit(main())
