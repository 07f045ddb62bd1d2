"""Clients for the three kinds of external model services: ASR, OCR, LLM.

Models never run in-process. A backend is either an HTTP endpoint speaking
the JSON document schema below, or a local command receiving that document
on stdin; deterministic in-process stubs cover tests. All clients share the
retry/backoff/rate-cap machinery and never alter payload text: hypothesis
and extraction strings reach downstream modules byte-identical to what the
backend produced (the subprocess transport strips exactly one trailing
newline, which is stdout framing, not payload).

HTTP wire schema, one POST per request:

    request body  {"backend_id": str, "kind": "asr"|"ocr"|"llm",
                   "prompt": RenderedPrompt.to_dict(),
                   "audio"?: {"path": str} | {"base64": str},
                   "image"?: {"path": str} | {"base64": str},
                   "segment"?: {"id": str, "offset_s": float, "duration_s": float}}
    response body {"text": str, ...}   (extra fields preserved as raw payload)

Retried: connection failures, timeouts, HTTP 5xx and 429. Other statuses
fail immediately. The subprocess transport gets the same request document on
stdin, may use {audio} and {image} argv placeholders, and must print the
text to stdout.
"""

from __future__ import annotations

import base64
import json
import os
import shlex
import subprocess
import threading
import time
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from pathlib import Path

import requests

from .prompts import RenderedPrompt

KINDS = ("asr", "ocr", "llm")
TRANSPORTS = ("http-endpoint", "subprocess-command")

DEFAULT_TIMEOUT_S = 60.0
DEFAULT_MAX_CONCURRENT = 4

_IMAGE_TAGS = ("<|image_1|>", "<image>")


class BackendError(Exception):
    """Terminal backend failure, carrying the per-attempt log."""

    def __init__(self, message: str, attempts: tuple[str, ...] = ()):
        super().__init__(message)
        self.attempts = attempts


class _Retryable(Exception):
    pass


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 3
    backoff_s: float = 0.5

    def __post_init__(self) -> None:
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        if self.backoff_s < 0:
            raise ValueError("backoff_s must be >= 0")


@dataclass(frozen=True)
class BackendDescriptor:
    id: str
    kind: str
    transport: str
    endpoint: str | None = None
    command: str | None = None
    timeout_s: float = DEFAULT_TIMEOUT_S
    retry: RetryPolicy = field(default_factory=RetryPolicy)
    max_concurrent: int = DEFAULT_MAX_CONCURRENT
    auth_token: str | None = None
    send_base64: bool = False

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.transport not in TRANSPORTS:
            raise ValueError(f"transport must be one of {TRANSPORTS}, got {self.transport!r}")
        if self.transport == "http-endpoint" and not (self.endpoint and not self.command):
            raise ValueError("http-endpoint transport needs endpoint and no command")
        if self.transport == "subprocess-command" and not (self.command and not self.endpoint):
            raise ValueError("subprocess-command transport needs command and no endpoint")
        if self.timeout_s <= 0:
            raise ValueError("timeout_s must be positive")
        if self.max_concurrent < 1:
            raise ValueError("max_concurrent must be >= 1")


def load_backend_registry(path: str) -> dict[str, BackendDescriptor]:
    """Read a registry config file: a JSON list of descriptor objects
    (or an object with a "backends" list)."""
    with open(path, encoding="utf-8") as handle:
        raw = json.load(handle)
    entries = raw["backends"] if isinstance(raw, dict) else raw
    registry: dict[str, BackendDescriptor] = {}
    for entry in entries:
        retry = RetryPolicy(
            max_attempts=int(entry.get("max_attempts", 3)),
            backoff_s=float(entry.get("backoff_s", 0.5)),
        )
        descriptor = BackendDescriptor(
            id=entry["id"],
            kind=entry["kind"],
            transport=entry["transport"],
            endpoint=entry.get("endpoint"),
            command=entry.get("command"),
            timeout_s=float(entry.get("timeout_s", DEFAULT_TIMEOUT_S)),
            retry=retry,
            max_concurrent=int(entry.get("max_concurrent", DEFAULT_MAX_CONCURRENT)),
            auth_token=entry.get("auth_token"),
            send_base64=bool(entry.get("send_base64", False)),
        )
        if descriptor.id in registry:
            raise ValueError(f"duplicate backend id {descriptor.id!r}")
        registry[descriptor.id] = descriptor
    return registry


def prompt_supports_image(prompt: RenderedPrompt) -> bool:
    if prompt.text is not None:
        return any(tag in prompt.text for tag in _IMAGE_TAGS)
    return any(
        tag in message["content"] for message in prompt.messages for tag in _IMAGE_TAGS
    )


@dataclass(frozen=True)
class AsrRequest:
    audio: str
    prompt: RenderedPrompt
    image: str | None = None
    segment_id: str | None = None
    offset_s: float | None = None
    duration_s: float | None = None

    def __post_init__(self) -> None:
        if self.image is not None and not prompt_supports_image(self.prompt):
            raise ValueError(
                "request carries an image but the prompt has no image slot"
            )


@dataclass(frozen=True)
class AsrResponse:
    text: str
    latency_s: float
    raw: Mapping[str, object]
    attempts: tuple[str, ...] = ()


def _media_field(path: str, send_base64: bool) -> dict:
    if send_base64:
        with open(path, "rb") as handle:
            return {"base64": base64.b64encode(handle.read()).decode("ascii")}
    return {"path": os.path.abspath(path)}


class BackendClient:
    """One client per configured backend; safe for concurrent use.

    In-flight requests are capped at the descriptor's max_concurrent; each
    transport attempt holds one slot, so backoff sleeps do not starve other
    callers.
    """

    def __init__(self, descriptor: BackendDescriptor):
        self.descriptor = descriptor
        self._gate = threading.BoundedSemaphore(descriptor.max_concurrent)

    # -- public operations ------------------------------------------------

    def transcribe(self, request: AsrRequest) -> AsrResponse:
        self._require_kind("asr")
        if not os.path.exists(request.audio):
            raise BackendError(f"audio file not found: {request.audio}")
        if request.image is not None:
            self._check_image(request.image)
        document = {
            "backend_id": self.descriptor.id,
            "kind": "asr",
            "prompt": request.prompt.to_dict(),
            "audio": _media_field(request.audio, self.descriptor.send_base64),
        }
        if request.image is not None:
            document["image"] = _media_field(request.image, self.descriptor.send_base64)
        if request.segment_id is not None:
            document["segment"] = {
                "id": request.segment_id,
                "offset_s": request.offset_s,
                "duration_s": request.duration_s,
            }
        text, raw, attempts, latency = self._call(
            document, audio=request.audio, image=request.image
        )
        return AsrResponse(text=text, latency_s=latency, raw=raw, attempts=attempts)

    def extract_text(self, image: str, instruction: RenderedPrompt) -> str:
        self._require_kind("ocr")
        self._check_image(image)
        document = {
            "backend_id": self.descriptor.id,
            "kind": "ocr",
            "prompt": instruction.to_dict(),
            "image": _media_field(image, self.descriptor.send_base64),
        }
        text, _, _, _ = self._call(document, image=image)
        return text

    def complete(self, messages: RenderedPrompt) -> str:
        self._require_kind("llm")
        document = {
            "backend_id": self.descriptor.id,
            "kind": "llm",
            "prompt": messages.to_dict(),
        }
        text, _, _, _ = self._call(document)
        return text

    # -- plumbing ----------------------------------------------------------

    def _require_kind(self, kind: str) -> None:
        if self.descriptor.kind != kind:
            raise BackendError(
                f"backend {self.descriptor.id!r} is kind {self.descriptor.kind!r}, "
                f"operation needs {kind!r}"
            )

    def _check_image(self, image: str) -> None:
        if not os.path.exists(image):
            raise BackendError(f"image file not found: {image}")
        if os.path.getsize(image) == 0:
            raise BackendError(f"image file is empty: {image}")

    def _call(
        self,
        document: dict,
        audio: str | None = None,
        image: str | None = None,
    ) -> tuple[str, dict, tuple[str, ...], float]:
        retry = self.descriptor.retry
        attempts: list[str] = []
        started = time.monotonic()
        for attempt in range(1, retry.max_attempts + 1):
            try:
                with self._gate:
                    if self.descriptor.transport == "http-endpoint":
                        text, raw = self._http_attempt(document)
                    else:
                        text, raw = self._subprocess_attempt(document, audio, image)
                attempts.append(f"attempt {attempt}: ok")
                return text, raw, tuple(attempts), time.monotonic() - started
            except _Retryable as exc:
                attempts.append(f"attempt {attempt}: {exc}")
                if attempt == retry.max_attempts:
                    raise BackendError(
                        f"backend {self.descriptor.id!r} failed after "
                        f"{attempt} attempts: {exc}",
                        attempts=tuple(attempts),
                    ) from exc
                time.sleep(retry.backoff_s * 2 ** (attempt - 1))
            except BackendError as exc:
                attempts.append(f"attempt {attempt}: {exc}")
                raise BackendError(str(exc), attempts=tuple(attempts)) from exc
        raise AssertionError("unreachable")

    def _http_attempt(self, document: dict) -> tuple[str, dict]:
        headers = {"Content-Type": "application/json"}
        if self.descriptor.auth_token:
            headers["Authorization"] = f"Bearer {self.descriptor.auth_token}"
        try:
            response = requests.post(
                self.descriptor.endpoint,
                json=document,
                headers=headers,
                timeout=self.descriptor.timeout_s,
            )
        except (requests.ConnectionError, requests.Timeout) as exc:
            raise _Retryable(f"connection failure: {exc}") from exc
        if response.status_code >= 500 or response.status_code == 429:
            raise _Retryable(f"HTTP {response.status_code}")
        if response.status_code != 200:
            raise BackendError(f"HTTP {response.status_code}: {response.text[:200]}")
        try:
            payload = response.json()
        except ValueError as exc:
            raise BackendError(
                f"non-JSON response: {response.text[:200]!r}"
            ) from exc
        if not isinstance(payload, dict) or "text" not in payload:
            raise BackendError(f"response lacks a text field: {str(payload)[:200]!r}")
        if not isinstance(payload["text"], str):
            raise BackendError(f"text field is not a string: {str(payload)[:200]!r}")
        return payload["text"], payload

    def _subprocess_attempt(
        self, document: dict, audio: str | None, image: str | None
    ) -> tuple[str, dict]:
        argv = []
        for token in shlex.split(self.descriptor.command):
            argv.append(token.format(audio=audio or "", image=image or ""))
        try:
            proc = subprocess.run(
                argv,
                input=json.dumps(document),
                capture_output=True,
                text=True,
                timeout=self.descriptor.timeout_s,
            )
        except subprocess.TimeoutExpired as exc:
            raise _Retryable(f"timed out after {self.descriptor.timeout_s}s") from exc
        except FileNotFoundError as exc:
            raise BackendError(f"command not found: {argv[0]}") from exc
        if proc.returncode != 0:
            detail = proc.stderr.strip() or "no diagnostics"
            raise _Retryable(f"exited {proc.returncode}: {detail}")
        text = proc.stdout
        if text.endswith("\n"):
            text = text[:-1]
        return text, {"text": text}


# -- deterministic stubs -------------------------------------------------


def _audio_key(audio: str, segment_id: str | None) -> str:
    stem = Path(audio).stem
    return f"{stem}/{segment_id}" if segment_id else stem


class StubAsrBackend:
    """Canned transcripts keyed by "<audio stem>" or "<audio stem>/<segment id>".

    A pure function of the request, so pipelines built on it are exactly
    reproducible offline.
    """

    kind = "asr"

    def __init__(self, table: Mapping[str, str], default: str | None = None):
        self.table = dict(table)
        self.default = default

    def transcribe(self, request: AsrRequest) -> AsrResponse:
        key = _audio_key(request.audio, request.segment_id)
        if key in self.table:
            text = self.table[key]
        elif self.default is not None:
            text = self.default
        else:
            raise BackendError(f"stub has no transcript for {key!r}")
        return AsrResponse(
            text=text, latency_s=0.0, raw={"text": text, "stub_key": key},
            attempts=("attempt 1: ok",),
        )


class StubOcrBackend:
    """Canned extractions keyed by image basename, with optional sidecar reads.

    When ``sidecar`` is on and ``<image>.txt`` exists, its content is the
    extraction; otherwise the table is consulted by basename.
    """

    kind = "ocr"

    def __init__(self, table: Mapping[str, str] | None = None, sidecar: bool = True):
        self.table = dict(table or {})
        self.sidecar = sidecar

    def extract_text(self, image: str, instruction: RenderedPrompt) -> str:
        if self.sidecar:
            sidecar_path = image + ".txt"
            if os.path.exists(sidecar_path):
                with open(sidecar_path, encoding="utf-8") as handle:
                    return handle.read()
        name = os.path.basename(image)
        if name in self.table:
            return self.table[name]
        raise BackendError(f"stub has no extraction for {name!r}")


class StubLlmBackend:
    """Wraps a pure reply function; ``canned`` builds a constant one."""

    kind = "llm"

    def __init__(self, reply: Callable[[RenderedPrompt], str]):
        self.reply = reply

    @classmethod
    def canned(cls, text: str) -> StubLlmBackend:
        return cls(lambda _prompt: text)

    def complete(self, messages: RenderedPrompt) -> str:
        return self.reply(messages)
