"""Resumable pipeline stages: the work behind every CLI subcommand.

A run is a sequence of named stages (frames, context, prompts, transcribe,
score, ...) writing their artifacts under one output root. Each stage
records a fingerprint of its parameters and input files; re-running skips
any stage whose fingerprint matches and whose outputs still exist, so a
corpus run interrupted against a slow backend resumes without repeating a
single backend call. Failures are scoped to a talk or segment, recorded,
and never abort the rest of the batch.
"""

from __future__ import annotations

import glob as globbing
import hashlib
import json
import os
import time
import warnings
from collections.abc import Callable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace

from .backends import AsrRequest, BackendClient, load_backend_registry
from .context import (
    ContextWords,
    RawExtraction,
    augmentation_contexts,
    evaluation_context,
    extract_from_images,
)
from .frames import GrabberConfig, execute_plan, frame_manifest, plan_frames
from .lexicon import (
    SpecialWordSet,
    Talk,
    Vocabulary,
    extract_special_words,
    load_talk_manifest,
    load_vocabulary,
    special_word_stats,
)
from .metrics import ErrorCounts, score_segment
from .prompts import (
    RenderedPrompt,
    render_context_asr_prompt,
    render_ocr_instruction,
    render_plain_asr_prompt,
)
from .reports import RunReport, build_run_report, write_run_report
from .significance import SignificanceResult, matched_pair_test
from .slides import CompilerConfig, augment_talk, save_manifest
from .textnorm import normalize

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_PARTIAL = 3
EXIT_TOTAL = 4


class ConfigError(ValueError):
    """Bad or incomplete run configuration; reported before any work starts."""


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs, loadable from a JSON config file.

    Paths in the file resolve relative to the file's directory; ``talks``
    entries may be globs. A fixed config plus deterministic backends yields
    a byte-identical report.
    """

    talks: tuple[str, ...] = ()
    vocabulary: str | None = None
    hypotheses: str | None = None
    hypotheses_b: str | None = None
    terms_dir: str | None = None
    backend_registry: str | None = None
    asr_backend: str | None = None
    ocr_backend: str | None = None
    llm_backend: str | None = None
    prompt_family: str = "phi"
    image_context: bool = False
    frequency_threshold: int = 2
    word_cap: int = 50
    unique_mode: str = "any"
    chunk_size: int = 8
    grabber_command: str | None = None
    compile_command: str | None = None
    render_command: str | None = None
    compile_enabled: bool = True
    out_dir: str = "out"
    jobs: int = 4
    seed: int = 0
    significance_method: str = "auto"
    force_stages: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        doc = {f.name: getattr(self, f.name) for f in fields(self)}
        doc["talks"] = list(self.talks)
        doc["force_stages"] = list(self.force_stages)
        return doc

    def snapshot(self) -> dict:
        """Config as recorded in reports: no output root, no force flags."""
        doc = self.to_dict()
        del doc["out_dir"]
        del doc["force_stages"]
        return doc


def load_config(path: str, **overrides) -> RunConfig:
    with open(path, encoding="utf-8") as handle:
        doc = json.load(handle)
    base = os.path.dirname(os.path.abspath(path))
    known = {f.name for f in fields(RunConfig)}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    def resolve(value: str) -> str:
        return value if os.path.isabs(value) else os.path.join(base, value)

    kwargs: dict = {}
    path_keys = {
        "vocabulary", "hypotheses", "hypotheses_b", "terms_dir",
        "backend_registry", "out_dir",
    }
    for key, value in doc.items():
        if key == "talks":
            manifests: list[str] = []
            for pattern in value:
                pattern = resolve(pattern)
                matches = sorted(globbing.glob(pattern))
                manifests.extend(matches if matches else [pattern])
            kwargs["talks"] = tuple(manifests)
        elif key in path_keys and value is not None:
            kwargs[key] = resolve(value)
        elif key == "force_stages":
            kwargs[key] = tuple(value)
        else:
            kwargs[key] = value
    config = RunConfig(**kwargs)
    cleaned = {k: v for k, v in overrides.items() if v is not None}
    if "force_stages" in cleaned:
        cleaned["force_stages"] = tuple(cleaned["force_stages"])
    return replace(config, **cleaned) if cleaned else config


def require(config: RunConfig, *names: str) -> None:
    """Validate that the named config entries are set and their paths exist."""
    for name in names:
        value = getattr(config, name)
        if name == "talks":
            if not value:
                raise ConfigError("config names no talk manifests")
            for manifest in value:
                if not os.path.exists(manifest):
                    raise ConfigError(f"talk manifest not found: {manifest}")
            continue
        if value is None:
            raise ConfigError(f"config entry {name!r} is required for this command")
        if name in ("vocabulary", "hypotheses", "hypotheses_b", "backend_registry",
                    "terms_dir") and not os.path.exists(value):
            raise ConfigError(f"{name} path not found: {value}")


def load_talks(config: RunConfig) -> list[Talk]:
    talks = [load_talk_manifest(path) for path in config.talks]
    seen: set[str] = set()
    for talk in talks:
        if talk.id in seen:
            raise ConfigError(f"duplicate talk id {talk.id!r} across manifests")
        seen.add(talk.id)
    return talks


def make_client(config: RunConfig, kind: str) -> BackendClient:
    require(config, "backend_registry")
    backend_id = getattr(config, f"{kind}_backend")
    if backend_id is None:
        raise ConfigError(f"config entry {kind}_backend is required for this command")
    registry = load_backend_registry(config.backend_registry)
    if backend_id not in registry:
        raise ConfigError(f"backend {backend_id!r} not in registry")
    descriptor = registry[backend_id]
    if descriptor.kind != kind:
        raise ConfigError(
            f"backend {backend_id!r} is kind {descriptor.kind!r}, need {kind!r}"
        )
    return BackendClient(descriptor)


# -- stage machinery --------------------------------------------------------


@dataclass(frozen=True)
class StageOutcome:
    name: str
    resumed: bool
    duration_s: float
    failures: Mapping[str, str]
    outputs: tuple[str, ...]


def _digest_file(path: str) -> str:
    # Text inputs get content hashes; large media would be slow to hash,
    # so anything over 16 MiB is fingerprinted by size and mtime instead.
    stat = os.stat(path)
    if stat.st_size > 16 * 1024 * 1024:
        return f"stat:{stat.st_size}:{stat.st_mtime_ns}"
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def fingerprint(params: Mapping[str, object], input_files: Sequence[str]) -> str:
    digest = hashlib.sha256()
    digest.update(json.dumps(params, sort_keys=True, default=str).encode("utf-8"))
    for path in sorted(input_files):
        digest.update(path.encode("utf-8"))
        digest.update(_digest_file(path).encode("ascii") if os.path.exists(path) else b"missing")
    return digest.hexdigest()


def run_stage(
    out_dir: str,
    name: str,
    params: Mapping[str, object],
    input_files: Sequence[str],
    force: bool,
    work: Callable[[], tuple[list[str], dict[str, str]]],
) -> StageOutcome:
    """Execute (or skip) one stage.

    ``work`` returns (output paths, failures). The stage is skipped when a
    state file records the same fingerprint and every recorded output still
    exists; recorded failures are reported again on a skip so resumed runs
    do not hide earlier problems.
    """
    state_dir = os.path.join(out_dir, "state")
    os.makedirs(state_dir, exist_ok=True)
    state_path = os.path.join(state_dir, f"{name}.json")
    stamp = fingerprint(params, input_files)
    if not force and os.path.exists(state_path):
        with open(state_path, encoding="utf-8") as handle:
            state = json.load(handle)
        if state.get("fingerprint") == stamp and all(
            os.path.exists(p) for p in state.get("outputs", [])
        ):
            return StageOutcome(
                name=name,
                resumed=True,
                duration_s=0.0,
                failures=dict(state.get("failures", {})),
                outputs=tuple(state.get("outputs", [])),
            )
    started = time.monotonic()
    outputs, failures = work()
    duration = time.monotonic() - started
    with open(state_path, "w", encoding="utf-8") as handle:
        json.dump(
            {"fingerprint": stamp, "outputs": outputs, "failures": failures},
            handle,
            indent=2,
            sort_keys=True,
        )
        handle.write("\n")
    return StageOutcome(
        name=name,
        resumed=False,
        duration_s=duration,
        failures=failures,
        outputs=tuple(outputs),
    )


def _forced(config: RunConfig, stage: str) -> bool:
    return "all" in config.force_stages or stage in config.force_stages


def _write_json(path: str, doc: object) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(doc, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return path


def _map_talks(talks: Sequence[Talk], jobs: int, fn: Callable[[Talk], object]) -> list:
    if len(talks) <= 1 or jobs <= 1:
        return [fn(talk) for talk in talks]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, talks))


# -- term extraction ---------------------------------------------------------


def run_extract_terms(config: RunConfig) -> tuple[int, dict]:
    """Per-talk special-word files plus the (total, unique) stats table."""
    require(config, "talks", "vocabulary")
    talks = load_talks(config)
    vocab = load_vocabulary(config.vocabulary)
    terms_dir = os.path.join(config.out_dir, "terms")
    word_sets: dict[str, SpecialWordSet] = {}
    per_talk: dict[str, dict] = {}
    for talk in talks:
        special = extract_special_words(talk, vocab)
        word_sets[talk.id] = special
        _write_json(
            os.path.join(terms_dir, f"{talk.id}.json"),
            {"talk_id": talk.id, "occurrences": dict(sorted(special.occurrences.items()))},
        )
        per_talk[talk.id] = {"total": special.total, "unique": special.unique}
    total, unique = special_word_stats(word_sets.values())
    if total == 0:
        warnings.warn("no special words found in any talk", stacklevel=2)
    stats = {"total": total, "unique": unique, "per_talk": per_talk}
    _write_json(os.path.join(terms_dir, "stats.json"), stats)
    return EXIT_OK, stats


def load_special_words(config: RunConfig, talks: Sequence[Talk]) -> dict[str, frozenset]:
    """Special-word sets per talk: stored term files if given, else computed."""
    out: dict[str, frozenset] = {}
    if config.terms_dir is not None:
        for talk in talks:
            path = os.path.join(config.terms_dir, f"{talk.id}.json")
            if os.path.exists(path):
                with open(path, encoding="utf-8") as handle:
                    doc = json.load(handle)
                out[talk.id] = frozenset(doc["occurrences"])
            else:
                out[talk.id] = frozenset()
        return out
    if config.vocabulary is not None:
        vocab = load_vocabulary(config.vocabulary)
        for talk in talks:
            out[talk.id] = extract_special_words(talk, vocab).words
        return out
    return {talk.id: frozenset() for talk in talks}


# -- scoring -----------------------------------------------------------------


def load_hypotheses(path: str) -> dict[str, dict[str, str]]:
    """Hypothesis file: {"talk id": {"segment id": "hypothesis text"}}."""
    with open(path, encoding="utf-8") as handle:
        doc = json.load(handle)
    if not isinstance(doc, dict):
        raise ConfigError(f"hypothesis file {path} is not a JSON object")
    return {
        str(talk): {str(seg): str(text) for seg, text in segments.items()}
        for talk, segments in doc.items()
    }


@dataclass(frozen=True)
class Scoring:
    per_talk: Mapping[str, ErrorCounts]
    per_segment_errors: Mapping[str, int]  # "talk/segment" -> S+D+I
    failures: Mapping[str, str]


def score_corpus(
    talks: Sequence[Talk],
    hypotheses: Mapping[str, Mapping[str, str]],
    special: Mapping[str, frozenset],
) -> Scoring:
    per_talk: dict[str, ErrorCounts] = {}
    per_segment: dict[str, int] = {}
    failures: dict[str, str] = {}
    for talk in talks:
        talk_hyp = hypotheses.get(talk.id)
        if talk_hyp is None:
            failures[talk.id] = "no hypotheses for this talk"
            continue
        counts = ErrorCounts()
        talk_special = special.get(talk.id, frozenset())
        for segment in talk.segments:
            key = f"{talk.id}/{segment.id}"
            if segment.id not in talk_hyp:
                failures[key] = "segment missing from hypotheses"
                continue
            alignment, seg_counts = score_segment(
                normalize(segment.text),
                normalize(talk_hyp[segment.id]),
                talk_special,
            )
            counts = counts + seg_counts
            per_segment[key] = alignment.cost
        unknown = set(talk_hyp) - {s.id for s in talk.segments}
        for seg_id in sorted(unknown):
            failures[f"{talk.id}/{seg_id}"] = "hypothesis segment unknown to reference"
        per_talk[talk.id] = counts
    return Scoring(per_talk=per_talk, per_segment_errors=per_segment, failures=failures)


def paired_segment_errors(
    a: Scoring, b: Scoring
) -> tuple[list[int], list[int], list[str]]:
    keys = sorted(set(a.per_segment_errors) & set(b.per_segment_errors))
    return (
        [a.per_segment_errors[k] for k in keys],
        [b.per_segment_errors[k] for k in keys],
        keys,
    )


def run_eval(config: RunConfig) -> tuple[int, RunReport]:
    """Score stored hypotheses against the reference manifests."""
    require(config, "talks", "hypotheses")
    talks = load_talks(config)
    hypotheses = load_hypotheses(config.hypotheses)
    special = load_special_words(config, talks)
    scoring = score_corpus(talks, hypotheses, special)
    significance: SignificanceResult | None = None
    failures = dict(scoring.failures)
    if config.hypotheses_b is not None:
        require(config, "hypotheses_b")
        scoring_b = score_corpus(talks, load_hypotheses(config.hypotheses_b), special)
        errors_a, errors_b, _ = paired_segment_errors(scoring, scoring_b)
        significance = matched_pair_test(
            errors_a,
            errors_b,
            method=config.significance_method,
            seed=config.seed,
        )
        failures.update({f"b:{k}": v for k, v in scoring_b.failures.items()})
    report = build_run_report(
        config.snapshot(), scoring.per_talk, significance=significance, failures=failures
    )
    write_run_report(config.out_dir, report)
    if talks and not any(counts.ref_length for counts in scoring.per_talk.values()):
        return EXIT_TOTAL, report
    return (EXIT_PARTIAL if failures else EXIT_OK), report


# -- pipeline stages ----------------------------------------------------------


def _frames_dir(config: RunConfig) -> str:
    return os.path.join(config.out_dir, "frames")


def _frame_manifest_path(config: RunConfig, talk_id: str) -> str:
    return os.path.join(_frames_dir(config), f"{talk_id}.json")


def stage_frames(config: RunConfig, talks: Sequence[Talk]) -> StageOutcome:
    require(config, "grabber_command")
    grabber = GrabberConfig(command=config.grabber_command)

    def work() -> tuple[list[str], dict[str, str]]:
        outputs: list[str] = []
        failures: dict[str, str] = {}

        def one(talk: Talk) -> None:
            if talk.media.video is None:
                failures[talk.id] = "talk manifest has no video"
                return
            plan = plan_frames(
                talk,
                os.path.join(_frames_dir(config), talk.id),
                video_duration=talk.media.video_duration_s,
            )
            outcomes = execute_plan(plan, grabber, max_workers=config.jobs)
            for outcome in outcomes:
                if not outcome.ok:
                    failures[f"{talk.id}/{outcome.segment_id}"] = outcome.error
            outputs.append(
                _write_json(_frame_manifest_path(config, talk.id), frame_manifest(outcomes))
            )

        _map_talks(talks, 1, one)  # per-entry parallelism already inside execute_plan
        return sorted(outputs), failures

    return run_stage(
        config.out_dir,
        "frames",
        {"grabber": config.grabber_command},
        list(config.talks),
        _forced(config, "frames"),
        work,
    )


def _talk_frame_images(config: RunConfig, talk: Talk) -> dict[str, str]:
    """segment id -> grabbed image path, for segments whose grab succeeded."""
    path = _frame_manifest_path(config, talk.id)
    if not os.path.exists(path):
        return {}
    with open(path, encoding="utf-8") as handle:
        manifest = json.load(handle)
    return {
        seg: entry["image"] for seg, entry in manifest.items() if "image" in entry
    }


def _context_words_path(config: RunConfig, talk_id: str) -> str:
    return os.path.join(config.out_dir, "context", "words", f"{talk_id}.json")


def stage_context(config: RunConfig, talks: Sequence[Talk]) -> StageOutcome:
    require(config, "vocabulary")
    vocab = load_vocabulary(config.vocabulary)
    client = make_client(config, "ocr")
    instruction = render_ocr_instruction()

    def work() -> tuple[list[str], dict[str, str]]:
        outputs: list[str] = []
        failures: dict[str, str] = {}

        def one(talk: Talk) -> None:
            images = _talk_frame_images(config, talk)
            if not images:
                failures[talk.id] = "no frame images available"
                return
            ordered = [images[seg.id] for seg in talk.segments if seg.id in images]
            extraction, errors = extract_from_images(
                talk.id,
                ordered,
                lambda image: client.extract_text(image, instruction),
                backend_id=client.descriptor.id,
                max_workers=config.jobs,
            )
            for image, error in errors.items():
                failures[f"{talk.id}/{os.path.basename(image)}"] = error
            words = evaluation_context(extraction, vocab, config.frequency_threshold)
            outputs.append(
                _write_json(
                    os.path.join(config.out_dir, "context", "raw", f"{talk.id}.json"),
                    extraction.to_dict(),
                )
            )
            outputs.append(
                _write_json(_context_words_path(config, talk.id), words.to_dict())
            )

        _map_talks(talks, config.jobs, one)
        return sorted(outputs), failures

    frame_manifests = [
        _frame_manifest_path(config, talk.id)
        for talk in talks
        if os.path.exists(_frame_manifest_path(config, talk.id))
    ]
    return run_stage(
        config.out_dir,
        "context",
        {
            "ocr_backend": config.ocr_backend,
            "threshold": config.frequency_threshold,
            "vocabulary": config.vocabulary,
        },
        list(config.talks) + frame_manifests + [config.vocabulary],
        _forced(config, "context"),
        work,
    )


def _prompt_path(config: RunConfig, talk_id: str) -> str:
    return os.path.join(config.out_dir, "prompts", f"{talk_id}.json")


def stage_prompts(config: RunConfig, talks: Sequence[Talk]) -> StageOutcome:
    def work() -> tuple[list[str], dict[str, str]]:
        outputs: list[str] = []
        failures: dict[str, str] = {}
        for talk in talks:
            words_path = _context_words_path(config, talk.id)
            if os.path.exists(words_path):
                with open(words_path, encoding="utf-8") as handle:
                    words = ContextWords.from_dict(json.load(handle))
            else:
                failures[talk.id] = "no context words; rendered the plain prompt"
                words = ContextWords(talk_id=talk.id, words=())
            rendered = render_context_asr_prompt(
                config.prompt_family, words, cap=config.word_cap
            )
            outputs.append(
                _write_json(_prompt_path(config, talk.id), rendered.to_dict())
            )
        return sorted(outputs), failures

    word_files = [
        _context_words_path(config, talk.id)
        for talk in talks
        if os.path.exists(_context_words_path(config, talk.id))
    ]
    return run_stage(
        config.out_dir,
        "prompts",
        {"family": config.prompt_family, "cap": config.word_cap},
        list(config.talks) + word_files,
        _forced(config, "prompts"),
        work,
    )


def _load_rendered_prompt(path: str) -> RenderedPrompt:
    with open(path, encoding="utf-8") as handle:
        doc = json.load(handle)
    return RenderedPrompt(
        template_id=doc["template_id"],
        text=doc.get("text"),
        messages=tuple(doc.get("messages", ())),
        bound=doc.get("bound", {}),
        warnings=tuple(doc.get("warnings", ())),
    )


def _hypotheses_path(config: RunConfig) -> str:
    return os.path.join(config.out_dir, "hypotheses.json")


def stage_transcribe(config: RunConfig, talks: Sequence[Talk]) -> StageOutcome:
    client = make_client(config, "asr")

    def work() -> tuple[list[str], dict[str, str]]:
        outputs: list[str] = []
        failures: dict[str, str] = {}
        merged: dict[str, dict[str, str]] = {}

        def one(talk: Talk) -> None:
            if talk.media.audio is None:
                failures[talk.id] = "talk manifest has no audio"
                return
            frame_images = _talk_frame_images(config, talk) if config.image_context else {}
            talk_prompt: RenderedPrompt | None = None
            if not config.image_context:
                prompt_file = _prompt_path(config, talk.id)
                if os.path.exists(prompt_file):
                    talk_prompt = _load_rendered_prompt(prompt_file)
                else:
                    talk_prompt = render_plain_asr_prompt(config.prompt_family)
            segments: dict[str, str] = {}
            for segment in talk.segments:
                key = f"{talk.id}/{segment.id}"
                image = None
                if config.image_context:
                    image = frame_images.get(segment.id)
                    if image is None:
                        failures[key] = "no frame image for image-context transcription"
                        continue
                    prompt = render_plain_asr_prompt(config.prompt_family, image=True)
                else:
                    prompt = talk_prompt
                request = AsrRequest(
                    audio=talk.media.audio,
                    prompt=prompt,
                    image=image,
                    segment_id=segment.id,
                    offset_s=segment.offset,
                    duration_s=segment.duration,
                )
                try:
                    segments[segment.id] = client.transcribe(request).text
                except Exception as exc:
                    failures[key] = f"transcription failed: {exc}"
            merged[talk.id] = segments
            outputs.append(
                _write_json(
                    os.path.join(config.out_dir, "hyp", f"{talk.id}.json"),
                    {"talk_id": talk.id, "segments": segments},
                )
            )

        _map_talks(talks, config.jobs, one)
        outputs.append(
            _write_json(
                _hypotheses_path(config),
                {talk_id: merged[talk_id] for talk_id in sorted(merged)},
            )
        )
        return sorted(outputs), failures

    prompt_files = [
        _prompt_path(config, talk.id)
        for talk in talks
        if os.path.exists(_prompt_path(config, talk.id))
    ]
    frame_manifests = [
        _frame_manifest_path(config, talk.id)
        for talk in talks
        if config.image_context and os.path.exists(_frame_manifest_path(config, talk.id))
    ]
    return run_stage(
        config.out_dir,
        "transcribe",
        {
            "asr_backend": config.asr_backend,
            "family": config.prompt_family,
            "image_context": config.image_context,
        },
        list(config.talks) + prompt_files + frame_manifests,
        _forced(config, "transcribe"),
        work,
    )


def run_pipeline(config: RunConfig) -> tuple[int, RunReport]:
    """frames -> OCR context -> prompts -> transcribe -> score, resumably.

    A talk that fails a stage is excluded from later stages with an audit
    entry; everything else keeps going. The final report is deterministic
    for fixed inputs and backends.
    """
    require(config, "talks", "vocabulary")
    if config.image_context and config.prompt_family != "phi":
        raise ConfigError("image context needs the phi prompt family")
    talks = load_talks(config)
    timings: dict[str, float] = {}
    failures: dict[str, str] = {}
    stage_list = [stage_frames, stage_context, stage_prompts, stage_transcribe]
    if config.image_context:
        stage_list.remove(stage_context)
        stage_list.remove(stage_prompts)
    for stage in stage_list:
        outcome = stage(config, talks)
        timings[outcome.name] = outcome.duration_s
        for scope, reason in outcome.failures.items():
            failures[f"{outcome.name}:{scope}"] = reason

    started = time.monotonic()
    hypotheses = load_hypotheses(_hypotheses_path(config))
    special = load_special_words(config, talks)
    scoring = score_corpus(talks, hypotheses, special)
    timings["score"] = time.monotonic() - started
    failures.update({f"score:{k}": v for k, v in scoring.failures.items()})
    report = build_run_report(config.snapshot(), scoring.per_talk, failures=failures)
    write_run_report(config.out_dir, report, timings)
    if talks and not any(
        counts.ref_length for counts in scoring.per_talk.values()
    ):
        return EXIT_TOTAL, report
    return (EXIT_PARTIAL if failures else EXIT_OK), report


# -- augmentation -------------------------------------------------------------


def run_augment(config: RunConfig) -> tuple[int, dict]:
    """Chunk transcripts, synthesize slides, extract talk-unique word lists."""
    require(config, "talks")
    talks = load_talks(config)
    if len(talks) < 2:
        raise ConfigError("augmentation needs at least 2 talks (uniqueness filter)")
    llm = make_client(config, "llm")
    compiler: CompilerConfig | None = None
    if config.compile_enabled:
        require(config, "compile_command", "render_command")
        compiler = CompilerConfig(
            compile_command=config.compile_command,
            render_command=config.render_command,
        )
    augment_dir = os.path.join(config.out_dir, "augment")
    summary_path = os.path.join(augment_dir, "summary.json")

    def work() -> tuple[list[str], dict[str, str]]:
        outputs: list[str] = []

        def one(talk: Talk) -> tuple[str, dict]:
            manifest = augment_talk(
                talk.id,
                talk.transcript,
                generate=llm.complete,
                config=compiler,
                out_dir=os.path.join(augment_dir, talk.id),
                chunk_size=config.chunk_size,
                backend_workers=config.jobs,
                compile_workers=config.jobs,
            )
            path = os.path.join(augment_dir, f"{talk.id}.json")
            save_manifest(path, manifest)
            outputs.append(path)
            return talk.id, manifest.summary

        summaries = dict(_map_talks(talks, config.jobs, one))

        extractions: dict[str, RawExtraction] = {}
        failures: dict[str, str] = {}
        if compiler is not None:
            ocr = make_client(config, "ocr")
            instruction = render_ocr_instruction()
            for talk in talks:
                with open(
                    os.path.join(augment_dir, f"{talk.id}.json"), encoding="utf-8"
                ) as handle:
                    manifest_doc = json.load(handle)
                images = [
                    image
                    for artifact in manifest_doc["artifacts"]
                    for image in artifact["images"]
                ]
                extraction, errors = extract_from_images(
                    talk.id,
                    images,
                    lambda image: ocr.extract_text(image, instruction),
                    backend_id=ocr.descriptor.id,
                    max_workers=config.jobs,
                )
                extractions[talk.id] = extraction
                for image, error in errors.items():
                    failures[f"{talk.id}/{os.path.basename(image)}"] = error
            contexts = augmentation_contexts(
                extractions, config.frequency_threshold, config.unique_mode
            )
            for talk_id, words in contexts.items():
                outputs.append(
                    _write_json(
                        os.path.join(augment_dir, "words", f"{talk_id}.json"),
                        words.to_dict(),
                    )
                )

        summary = {
            "talks": summaries,
            "failed_chunks": sum(s["failed"] for s in summaries.values()),
            "failures": failures,
        }
        outputs.append(_write_json(summary_path, summary))
        return sorted(outputs), failures

    outcome = run_stage(
        config.out_dir,
        "augment",
        {
            "llm_backend": config.llm_backend,
            "ocr_backend": config.ocr_backend,
            "chunk_size": config.chunk_size,
            "threshold": config.frequency_threshold,
            "unique_mode": config.unique_mode,
            "compile": config.compile_enabled,
        },
        list(config.talks),
        _forced(config, "augment"),
        work,
    )
    with open(summary_path, encoding="utf-8") as handle:
        summary = json.load(handle)
    code = EXIT_PARTIAL if (outcome.failures or summary["failed_chunks"]) else EXIT_OK
    return code, summary


# -- single-stage commands -----------------------------------------------------


def _stage_command(
    config: RunConfig,
    stage_fn: Callable[[RunConfig, Sequence[Talk]], StageOutcome],
    *requirements: str,
) -> tuple[int, StageOutcome]:
    require(config, "talks", *requirements)
    talks = load_talks(config)
    outcome = stage_fn(config, talks)
    return (EXIT_PARTIAL if outcome.failures else EXIT_OK), outcome


def run_frames(config: RunConfig) -> tuple[int, StageOutcome]:
    return _stage_command(config, stage_frames)


def run_build_context(config: RunConfig) -> tuple[int, StageOutcome]:
    return _stage_command(config, stage_context, "vocabulary")


def run_render_prompts(config: RunConfig) -> tuple[int, StageOutcome]:
    return _stage_command(config, stage_prompts)


def run_transcribe(config: RunConfig) -> tuple[int, StageOutcome]:
    return _stage_command(config, stage_transcribe)


# -- standalone significance --------------------------------------------------


def run_significance(config: RunConfig) -> tuple[int, SignificanceResult]:
    """Matched-pair test between two stored hypothesis sets."""
    require(config, "talks", "hypotheses", "hypotheses_b")
    talks = load_talks(config)
    special = load_special_words(config, talks)
    scoring_a = score_corpus(talks, load_hypotheses(config.hypotheses), special)
    scoring_b = score_corpus(talks, load_hypotheses(config.hypotheses_b), special)
    errors_a, errors_b, keys = paired_segment_errors(scoring_a, scoring_b)
    result = matched_pair_test(
        errors_a, errors_b, method=config.significance_method, seed=config.seed
    )
    _write_json(
        os.path.join(config.out_dir, "significance.json"),
        {"result": result.to_dict(), "paired_segments": keys},
    )
    return EXIT_OK, result
