"""Byte-exact prompt rendering from the checked-in template registry.

Templates live as files under ``templates/``: plain ``.txt`` for flat string
prompts (one trailing newline is storage convention and is stripped on
load), ``.json`` for role/content message lists. Placeholders are ``<<name>>``
markers. Rendering splits the fixed scaffold on its markers and joins it
around the bound values, so values are inserted verbatim and never rescanned
for markers: a word list containing template delimiters cannot corrupt the
scaffold.

Two flat templates intentionally contain the two-character sequence
backslash-n rather than a newline; that is how the source prompt was fed to
the model and it is preserved byte-exactly, typos included.
"""

from __future__ import annotations

import json
import re
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType

from .context import ContextWords
from .textnorm import Token

_TEMPLATE_DIR = Path(__file__).parent / "templates"
_MARKER = re.compile(r"<<([a-z_]+)>>")

DEFAULT_WORD_CAP = 50
WORD_SEPARATOR = ", "


@dataclass(frozen=True)
class PromptTemplate:
    id: str
    kind: str  # "text" or "messages"
    text: str | None = None
    messages: tuple[tuple[str, str], ...] = ()
    placeholders: tuple[str, ...] = ()

    def render(self, bindings: Mapping[str, str]) -> RenderedPrompt:
        missing = set(self.placeholders) - set(bindings)
        if missing:
            raise ValueError(f"unbound placeholders: {sorted(missing)}")
        if self.kind == "text":
            return RenderedPrompt(
                template_id=self.id,
                text=_fill(self.text, bindings),
                bound=dict(bindings),
            )
        return RenderedPrompt(
            template_id=self.id,
            messages=tuple(
                {"role": role, "content": _fill(content, bindings)}
                for role, content in self.messages
            ),
            bound=dict(bindings),
        )


@dataclass(frozen=True)
class RenderedPrompt:
    """A finished prompt: flat text or a chat message list, never both."""

    template_id: str
    text: str | None = None
    messages: tuple[Mapping[str, str], ...] = ()
    bound: Mapping[str, str] = field(default_factory=dict)
    warnings: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if (self.text is None) == (not self.messages):
            raise ValueError("exactly one of text or messages must be set")
        object.__setattr__(self, "bound", MappingProxyType(dict(self.bound)))
        object.__setattr__(
            self,
            "messages",
            tuple(MappingProxyType(dict(m)) for m in self.messages),
        )

    def to_dict(self) -> dict:
        out: dict = {"template_id": self.template_id, "bound": dict(self.bound)}
        if self.text is not None:
            out["text"] = self.text
        else:
            out["messages"] = [dict(m) for m in self.messages]
        if self.warnings:
            out["warnings"] = list(self.warnings)
        return out


def _fill(scaffold: str, bindings: Mapping[str, str]) -> str:
    parts = _MARKER.split(scaffold)
    # odd indices hold placeholder names after re.split on one group
    return "".join(
        bindings[part] if i % 2 else part for i, part in enumerate(parts)
    )


def _placeholders(scaffold: str) -> tuple[str, ...]:
    seen: list[str] = []
    for name in _MARKER.findall(scaffold):
        if name not in seen:
            seen.append(name)
    return tuple(seen)


def load_template(template_id: str) -> PromptTemplate:
    txt = _TEMPLATE_DIR / f"{template_id}.txt"
    if txt.exists():
        text = txt.read_text(encoding="utf-8")
        if text.endswith("\n"):
            text = text[:-1]
        return PromptTemplate(
            id=template_id, kind="text", text=text, placeholders=_placeholders(text)
        )
    jsn = _TEMPLATE_DIR / f"{template_id}.json"
    if jsn.exists():
        raw = json.loads(jsn.read_text(encoding="utf-8"))
        messages = tuple((m["role"], m["content"]) for m in raw)
        names: list[str] = []
        for _, content in messages:
            for name in _placeholders(content):
                if name not in names:
                    names.append(name)
        return PromptTemplate(
            id=template_id,
            kind="messages",
            messages=messages,
            placeholders=tuple(names),
        )
    raise KeyError(f"no template named {template_id!r}")


def list_templates() -> list[str]:
    return sorted(p.stem for p in _TEMPLATE_DIR.iterdir() if p.suffix in (".txt", ".json"))


def _word_list(words: ContextWords | Sequence[Token]) -> tuple[Token, ...]:
    if isinstance(words, ContextWords):
        return words.words
    return tuple(words)


_PLAIN_IDS = {"salmonn": "salmonn_plain", "phi": "phi_plain"}
_CONTEXT_IDS = {"salmonn": "salmonn_context", "phi": "phi_context"}


def render_plain_asr_prompt(family: str, image: bool = False) -> RenderedPrompt:
    """The baseline transcription prompt, no context words.

    ``image=True`` selects the image+audio variant (phi family only).
    """
    if image:
        if family != "phi":
            raise ValueError(f"no image+audio prompt for family {family!r}")
        return load_template("phi_image_audio").render({})
    if family not in _PLAIN_IDS:
        raise ValueError(f"unknown prompt family {family!r}")
    return load_template(_PLAIN_IDS[family]).render({})


def render_context_asr_prompt(
    family: str,
    words: ContextWords | Sequence[Token],
    cap: int = DEFAULT_WORD_CAP,
) -> RenderedPrompt:
    """Transcription prompt carrying context words, joined with ", " in order.

    The list is truncated to ``cap`` words after ordering (recorded in a
    warning); an empty list falls back to the plain prompt with a warning
    rather than rendering a dangling separator.
    """
    if family not in _CONTEXT_IDS:
        raise ValueError(f"unknown prompt family {family!r}")
    if cap < 1:
        raise ValueError(f"cap must be >= 1, got {cap}")
    word_list = _word_list(words)
    if not word_list:
        fallback = render_plain_asr_prompt(family)
        return RenderedPrompt(
            template_id=fallback.template_id,
            text=fallback.text,
            messages=fallback.messages,
            bound=fallback.bound,
            warnings=("empty context word list, fell back to the plain prompt",),
        )
    warnings: tuple[str, ...] = ()
    if len(word_list) > cap:
        warnings = (f"context word list truncated from {len(word_list)} to {cap}",)
        word_list = word_list[:cap]
    rendered = load_template(_CONTEXT_IDS[family]).render(
        {"words": WORD_SEPARATOR.join(word_list)}
    )
    if warnings:
        return RenderedPrompt(
            template_id=rendered.template_id,
            text=rendered.text,
            messages=rendered.messages,
            bound=rendered.bound,
            warnings=warnings,
        )
    return rendered


def render_ocr_instruction() -> RenderedPrompt:
    return load_template("ocr_extract").render({})


def render_slidegen_messages(chunk_text: str) -> RenderedPrompt:
    """System + user instruction pair for LaTeX slide generation."""
    if not chunk_text:
        raise ValueError("chunk text must be non-empty")
    return load_template("slidegen").render({"chunk": chunk_text})
