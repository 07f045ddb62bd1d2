"""Synthesize slide images from transcripts: chunk, generate, compile, render.

A transcript is split into sentences and grouped into fixed-size chunks; an
LLM backend turns each chunk into slide markup; an external compiler turns
the markup into a document; an external renderer turns document pages into
images. Every chunk ends in exactly one artifact whether or not its stages
succeeded, so a corpus run survives flaky generations and broken markup.
"""

from __future__ import annotations

import glob
import json
import math
import os
import re
import shlex
import shutil
import subprocess
import tempfile
import threading
import warnings
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .prompts import RenderedPrompt, render_slidegen_messages

DEFAULT_CHUNK_SIZE = 8
DEFAULT_COMPILE_TIMEOUT_S = 60.0

# Tokens ending with these are sentence-internal even before an uppercase word.
DEFAULT_ABBREVIATIONS = frozenset(
    {
        "e.g.", "i.e.", "etc.", "cf.", "vs.", "al.",
        "dr.", "mr.", "mrs.", "ms.", "prof.",
        "fig.", "eq.", "sec.", "no.",
    }
)

# A single unsplittable sentence longer than this draws a warning.
_NO_BOUNDARY_WORDS = 50

_BOUNDARY = re.compile(r"([.?!]+)(\s+)(?=\S)")
_FENCE = re.compile(r"```[^\n]*\n(.*?)```", re.DOTALL)

_DOC_BEGIN = "\\documentclass"
_DOC_END = "\\end{document}"

# Renderers may drop sidecar files (text layers, logs) next to the pages;
# only these count as page images.
_IMAGE_EXTENSIONS = (
    ".png", ".jpg", ".jpeg", ".ppm", ".pbm", ".pgm", ".tif", ".tiff", ".bmp", ".webp",
)


class NoSentenceBoundaryWarning(UserWarning):
    pass


def split_sentences(
    transcript: str, abbreviations: frozenset[str] = DEFAULT_ABBREVIATIONS
) -> list[str]:
    """Split prose into sentences on terminal punctuation.

    A boundary is a run of ``.?!`` followed by whitespace and an uppercase
    letter, unless the token ending the run is a known abbreviation.
    Joining the result with single spaces reproduces the input up to
    whitespace at the boundaries.
    """
    text = transcript.strip()
    if not text:
        return []
    cuts = [0]
    for match in _BOUNDARY.finditer(text):
        if not text[match.end()].isupper():
            continue
        token = text[: match.end(1)].rsplit(None, 1)[-1]
        if token.lower() in abbreviations:
            continue
        cuts.append(match.end())
    sentences = [text[a:b].strip() for a, b in zip(cuts, cuts[1:] + [len(text)])]
    if len(sentences) == 1 and len(text.split()) > _NO_BOUNDARY_WORDS:
        warnings.warn(
            "no sentence boundaries found in a long transcript; "
            "chunking degrades to one chunk",
            NoSentenceBoundaryWarning,
            stacklevel=2,
        )
    return sentences


@dataclass(frozen=True)
class SlideChunk:
    talk_id: str
    index: int
    sentences: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.sentences:
            raise ValueError("a chunk needs at least one sentence")
        if self.index < 0:
            raise ValueError("chunk index must be >= 0")

    @property
    def text(self) -> str:
        return " ".join(self.sentences)


def chunk(
    sentences: Sequence[str], size: int = DEFAULT_CHUNK_SIZE, talk_id: str = ""
) -> list[SlideChunk]:
    """Group sentences into ceil(n/size) chunks, all full except maybe the last."""
    if size < 1:
        raise ValueError(f"chunk size must be >= 1, got {size}")
    out = [
        SlideChunk(talk_id=talk_id, index=i, sentences=tuple(sentences[start : start + size]))
        for i, start in enumerate(range(0, len(sentences), size))
    ]
    assert len(out) == math.ceil(len(sentences) / size)
    return out


@dataclass(frozen=True)
class SlideArtifact:
    chunk_index: int
    source: str
    status: str  # "ok", "failed" or "skipped"
    reason: str | None = None
    images: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.status not in ("ok", "failed", "skipped"):
            raise ValueError(f"unknown status {self.status!r}")
        if self.status == "ok" and not self.images:
            raise ValueError("status ok requires at least one image")
        if self.status == "failed" and not self.reason:
            raise ValueError("status failed requires a reason")

    def to_dict(self) -> dict:
        return {
            "chunk_index": self.chunk_index,
            "source": self.source,
            "status": self.status,
            "reason": self.reason,
            "images": list(self.images),
        }


@dataclass(frozen=True)
class AugmentationManifest:
    talk_id: str
    artifacts: tuple[SlideArtifact, ...]

    @property
    def summary(self) -> dict[str, int]:
        counts = {"ok": 0, "failed": 0, "skipped": 0}
        for artifact in self.artifacts:
            counts[artifact.status] += 1
        return counts

    def to_dict(self) -> dict:
        return {
            "talk_id": self.talk_id,
            "artifacts": [a.to_dict() for a in self.artifacts],
            "summary": self.summary,
        }


def save_manifest(path: str, manifest: AugmentationManifest) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(manifest.to_dict(), handle, indent=2, sort_keys=True)
        handle.write("\n")


def extract_markup(text: str) -> str | None:
    """Isolate slide markup from a chatty backend response.

    First fenced code block wins; otherwise the span from the document
    preamble marker through the document end marker. None when neither is
    present.
    """
    fenced = _FENCE.search(text)
    if fenced:
        block = fenced.group(1).strip()
        return block or None
    begin = text.find(_DOC_BEGIN)
    if begin == -1:
        return None
    end = text.find(_DOC_END, begin)
    if end == -1:
        return None
    return text[begin : end + len(_DOC_END)].strip()


def generate_slide_source(
    chunk: SlideChunk, generate: Callable[[RenderedPrompt], str]
) -> str:
    """Ask the LLM backend for slide markup for one chunk.

    Raises ValueError when no markup block can be isolated from the reply;
    backend exceptions propagate for the caller to contain per chunk.
    """
    reply = generate(render_slidegen_messages(chunk.text))
    markup = extract_markup(reply)
    if markup is None:
        raise ValueError("no markup block found in backend reply")
    return markup


@dataclass(frozen=True)
class CompilerConfig:
    """External compile and render commands.

    ``compile_command`` takes {source} (markup file) and {outdir} and must
    leave ``<source stem>.pdf`` in {outdir}; ``render_command`` takes {pdf}
    and {prefix} and writes one ``<prefix>*`` image per page. Both are split
    shell-style with placeholders filled per token.
    """

    compile_command: str
    render_command: str
    timeout_s: float = DEFAULT_COMPILE_TIMEOUT_S
    keep_scratch: bool = False

    def __post_init__(self) -> None:
        for marker in ("{source}", "{outdir}"):
            if self.compile_command.count(marker) != 1:
                raise ValueError(f"compile command needs exactly one {marker}")
        for marker in ("{pdf}", "{prefix}"):
            if self.render_command.count(marker) != 1:
                raise ValueError(f"render command needs exactly one {marker}")
        if self.timeout_s <= 0:
            raise ValueError("timeout_s must be positive")


def _run_command(argv: list[str], timeout_s: float) -> tuple[bool, str]:
    try:
        proc = subprocess.run(argv, capture_output=True, text=True, timeout=timeout_s)
    except subprocess.TimeoutExpired:
        return False, f"timed out after {timeout_s}s"
    except FileNotFoundError:
        return False, f"tool missing: {argv[0]} is not on PATH or does not exist"
    except OSError as exc:
        return False, f"failed to start: {exc}"
    if proc.returncode != 0:
        detail = proc.stderr.strip() or proc.stdout.strip() or "no diagnostics"
        return False, f"exited {proc.returncode}: {detail}"
    return True, ""


def _fill_argv(template: str, **values: str) -> list[str]:
    return [token.format(**values) for token in shlex.split(template)]


def compile_and_render(
    source: str,
    config: CompilerConfig,
    out_dir: str,
    chunk_index: int,
    scratch_root: str | None = None,
) -> SlideArtifact:
    """Compile markup to a document and render its pages to images.

    Every call gets a private scratch directory (removed afterwards unless
    ``keep_scratch``); images land in ``out_dir`` as
    ``chunk_<index>-<page>.<ext>``.
    """
    if not source:
        return SlideArtifact(chunk_index, source, "failed", reason="empty source")
    os.makedirs(out_dir, exist_ok=True)
    scratch = tempfile.mkdtemp(prefix=f"chunk{chunk_index:04d}-", dir=scratch_root)
    try:
        tex = os.path.join(scratch, "slide.tex")
        with open(tex, "w", encoding="utf-8") as handle:
            handle.write(source)
        ok, diag = _run_command(
            _fill_argv(config.compile_command, source=tex, outdir=scratch),
            config.timeout_s,
        )
        if not ok:
            return SlideArtifact(chunk_index, source, "failed", reason=f"compile: {diag}")
        pdf = os.path.join(scratch, "slide.pdf")
        if not os.path.exists(pdf):
            return SlideArtifact(
                chunk_index, source, "failed", reason="compile: no output document"
            )
        prefix = os.path.join(out_dir, f"chunk_{chunk_index:04d}")
        ok, diag = _run_command(
            _fill_argv(config.render_command, pdf=pdf, prefix=prefix),
            config.timeout_s,
        )
        if not ok:
            return SlideArtifact(chunk_index, source, "failed", reason=f"render: {diag}")
        images = tuple(
            sorted(
                path
                for path in glob.glob(prefix + "*")
                if path.lower().endswith(_IMAGE_EXTENSIONS)
            )
        )
        if not images:
            return SlideArtifact(
                chunk_index, source, "failed", reason="render: no images produced"
            )
        return SlideArtifact(chunk_index, source, "ok", images=images)
    finally:
        if not config.keep_scratch:
            shutil.rmtree(scratch, ignore_errors=True)


def augment_talk(
    talk_id: str,
    transcript: str,
    generate: Callable[[RenderedPrompt], str],
    config: CompilerConfig | None,
    out_dir: str,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    backend_workers: int = 2,
    compile_workers: int = 2,
    scratch_root: str | None = None,
) -> AugmentationManifest:
    """Run the whole augmentation pipeline for one talk.

    ``config=None`` stops after generation (artifacts come back "skipped"
    with their source). A chunk whose markup fails to compile is regenerated
    once; a second failure is final. Backend calls and compiler processes
    are each bounded by their own worker budget.
    """
    chunks = chunk(split_sentences(transcript), size=chunk_size, talk_id=talk_id)
    backend_gate = threading.BoundedSemaphore(max(1, backend_workers))
    compile_gate = threading.BoundedSemaphore(max(1, compile_workers))

    def generate_once(one: SlideChunk) -> str:
        with backend_gate:
            return generate_slide_source(one, generate)

    def process(one: SlideChunk) -> SlideArtifact:
        try:
            source = generate_once(one)
        except Exception as exc:
            return SlideArtifact(one.index, "", "failed", reason=f"backend: {exc}")
        if config is None:
            return SlideArtifact(one.index, source, "skipped", reason="compile disabled")
        with compile_gate:
            artifact = compile_and_render(source, config, out_dir, one.index, scratch_root)
        if artifact.status == "ok":
            return artifact
        # fresh generation, then one more compile attempt
        try:
            source = generate_once(one)
        except Exception as exc:
            return SlideArtifact(
                one.index, artifact.source, "failed",
                reason=f"{artifact.reason}; retry backend: {exc}",
            )
        with compile_gate:
            retried = compile_and_render(source, config, out_dir, one.index, scratch_root)
        if retried.status == "ok":
            return retried
        return SlideArtifact(
            one.index, retried.source, "failed",
            reason=f"{artifact.reason}; retry {retried.reason}",
        )

    if not chunks:
        return AugmentationManifest(talk_id=talk_id, artifacts=())
    workers = max(1, backend_workers + compile_workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        artifacts = list(pool.map(process, chunks))
    artifacts.sort(key=lambda a: a.chunk_index)
    return AugmentationManifest(talk_id=talk_id, artifacts=tuple(artifacts))
