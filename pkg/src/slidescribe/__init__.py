"""Slide-aware ASR evaluation: scoring, context extraction, augmentation.

The package measures how well speech recognizers handle domain-specific
terminology and builds the slide-derived context that helps them do better:
word-level alignment and error rates (overall and special-word), frame
grabbing and OCR filtering pipelines, byte-exact prompt rendering, slide
synthesis for data augmentation, and a matched-pair significance test,
orchestrated by the ``slidescribe`` command-line tool.
"""

from __future__ import annotations

from .alignment import DELETE, INSERT, MATCH, SUBSTITUTE, Alignment, AlignmentOp, align
from .backends import (
    AsrRequest,
    AsrResponse,
    BackendClient,
    BackendDescriptor,
    BackendError,
    RetryPolicy,
    StubAsrBackend,
    StubLlmBackend,
    StubOcrBackend,
    load_backend_registry,
)
from .context import (
    ContextWords,
    RawExtraction,
    augmentation_contexts,
    evaluation_context,
    extract_from_images,
    frequency_filter,
    general_corpus_filter,
    order_words,
    per_talk_unique_filter,
)
from .frames import (
    FrameEntry,
    FrameOutcome,
    FramePlan,
    GrabberConfig,
    clamp_timestamp,
    execute_plan,
    midpoint_timestamp,
    plan_frames,
)
from .lexicon import (
    Media,
    Segment,
    SpecialWordSet,
    Talk,
    Vocabulary,
    build_vocabulary,
    extract_special_words,
    load_talk_manifest,
    load_vocabulary,
    save_talk_manifest,
    save_vocabulary,
    special_word_stats,
)
from .metrics import (
    ErrorCounts,
    MetricReport,
    Rate,
    metric_report,
    overall_wer,
    recognized_tally,
    score_segment,
    special_error_counts,
    wer,
    wer_t_hyp,
    wer_t_ref,
)
from .prompts import (
    PromptTemplate,
    RenderedPrompt,
    load_template,
    render_context_asr_prompt,
    render_ocr_instruction,
    render_plain_asr_prompt,
    render_slidegen_messages,
)
from .significance import SignificanceResult, matched_pair_test
from .slides import (
    AugmentationManifest,
    CompilerConfig,
    SlideArtifact,
    SlideChunk,
    augment_talk,
    chunk,
    compile_and_render,
    extract_markup,
    split_sentences,
)
from .textnorm import NormalizationPolicy, Token, join, normalize

__version__ = "0.1.0"

__all__ = [
    "Alignment", "AlignmentOp", "align", "MATCH", "SUBSTITUTE", "DELETE", "INSERT",
    "AsrRequest", "AsrResponse", "BackendClient", "BackendDescriptor", "BackendError",
    "RetryPolicy", "StubAsrBackend", "StubLlmBackend", "StubOcrBackend",
    "load_backend_registry",
    "ContextWords", "RawExtraction", "augmentation_contexts", "evaluation_context",
    "extract_from_images", "frequency_filter", "general_corpus_filter", "order_words",
    "per_talk_unique_filter",
    "FrameEntry", "FrameOutcome", "FramePlan", "GrabberConfig", "clamp_timestamp",
    "execute_plan", "midpoint_timestamp", "plan_frames",
    "Media", "Segment", "SpecialWordSet", "Talk", "Vocabulary", "build_vocabulary",
    "extract_special_words", "load_talk_manifest", "load_vocabulary",
    "save_talk_manifest", "save_vocabulary", "special_word_stats",
    "ErrorCounts", "MetricReport", "Rate", "metric_report", "overall_wer",
    "recognized_tally", "score_segment", "special_error_counts", "wer",
    "wer_t_hyp", "wer_t_ref",
    "PromptTemplate", "RenderedPrompt", "load_template", "render_context_asr_prompt",
    "render_ocr_instruction", "render_plain_asr_prompt", "render_slidegen_messages",
    "SignificanceResult", "matched_pair_test",
    "AugmentationManifest", "CompilerConfig", "SlideArtifact", "SlideChunk",
    "augment_talk", "chunk", "compile_and_render", "extract_markup", "split_sentences",
    "NormalizationPolicy", "Token", "join", "normalize",
    "__version__",
]
