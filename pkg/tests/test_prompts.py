import json
from pathlib import Path

import pytest

from slidescribe.context import ContextWords
from slidescribe.prompts import (
    DEFAULT_WORD_CAP,
    WORD_SEPARATOR,
    RenderedPrompt,
    list_templates,
    load_template,
    render_context_asr_prompt,
    render_ocr_instruction,
    render_plain_asr_prompt,
    render_slidegen_messages,
)

GOLDEN = Path(__file__).parent / "golden"

FOUR_WORDS = ["kinyarwanda", "kinyabert", "nlp", "pre-trained"]


def golden_bytes(name: str) -> bytes:
    return (GOLDEN / name).read_bytes()


def golden_messages(name: str) -> list[dict]:
    return json.loads((GOLDEN / name).read_text(encoding="utf-8"))


def test_salmonn_plain_matches_golden_bytes():
    rendered = render_plain_asr_prompt("salmonn")
    assert rendered.text.encode("utf-8") == golden_bytes("salmonn_plain.txt")
    # the two-character backslash-n sequence, not a newline
    assert "\\n" in rendered.text
    assert "\n" not in rendered.text


def test_salmonn_context_matches_golden_bytes():
    rendered = render_context_asr_prompt("salmonn", FOUR_WORDS)
    assert rendered.text.encode("utf-8") == golden_bytes("salmonn_context.txt")


def test_phi_plain_matches_golden_messages():
    rendered = render_plain_asr_prompt("phi")
    assert [dict(m) for m in rendered.messages] == golden_messages("phi_plain.json")
    # real newline after the audio tag
    assert rendered.messages[0]["content"].startswith("<|audio_1|>\n")


def test_phi_context_matches_golden_messages():
    rendered = render_context_asr_prompt("phi", FOUR_WORDS)
    assert [dict(m) for m in rendered.messages] == golden_messages("phi_context.json")
    assert "####" in rendered.messages[0]["content"]


def test_phi_image_audio_matches_golden_messages():
    rendered = render_plain_asr_prompt("phi", image=True)
    assert [dict(m) for m in rendered.messages] == golden_messages(
        "phi_image_audio.json"
    )
    content = rendered.messages[0]["content"]
    assert content.startswith("<|image_1|>\n<|audio_1|>\n")


def test_ocr_instruction_matches_golden_bytes():
    rendered = render_ocr_instruction()
    assert rendered.text.encode("utf-8") == golden_bytes("ocr_extract.txt")
    # the source instruction says "sides", not "slides"; preserved as-is
    assert "from the sides?" in rendered.text
    assert "slides" not in rendered.text


def test_slidegen_matches_golden_messages():
    chunk = "attention is all you need. the model uses multi-head attention."
    rendered = render_slidegen_messages(chunk)
    assert [dict(m) for m in rendered.messages] == golden_messages("slidegen.json")
    assert rendered.messages[0]["role"] == "system"
    assert rendered.messages[1]["role"] == "user"


def test_word_separator_and_single_word():
    rendered = render_context_asr_prompt("salmonn", ["kinyabert"])
    assert "needed: kinyabert?" in rendered.text
    assert WORD_SEPARATOR == ", "
    rendered_two = render_context_asr_prompt("salmonn", ["a", "b"])
    assert "needed: a, b?" in rendered_two.text


def test_context_words_object_accepted():
    words = ContextWords("t1", ("kinyabert", "nlp"))
    rendered = render_context_asr_prompt("phi", words)
    assert "#### kinyabert, nlp?" in rendered.messages[0]["content"]


def test_word_cap_truncates_after_ordering():
    many = [f"w{i:03d}" for i in range(60)]
    rendered = render_context_asr_prompt("phi", many)
    content = rendered.messages[0]["content"]
    assert "w049" in content
    assert "w050" not in content
    assert rendered.warnings == ("context word list truncated from 60 to 50",)
    assert DEFAULT_WORD_CAP == 50


def test_custom_cap():
    rendered = render_context_asr_prompt("salmonn", ["a", "b", "c"], cap=2)
    assert "needed: a, b?" in rendered.text
    assert rendered.warnings[0] == "context word list truncated from 3 to 2"
    with pytest.raises(ValueError):
        render_context_asr_prompt("salmonn", ["a"], cap=0)


def test_empty_word_list_falls_back_to_plain():
    rendered = render_context_asr_prompt("salmonn", [])
    assert rendered.text.encode("utf-8") == golden_bytes("salmonn_plain.txt")
    assert rendered.warnings == (
        "empty context word list, fell back to the plain prompt",
    )
    assert rendered.template_id == "salmonn_plain"


def test_injection_cannot_corrupt_scaffold():
    hostile = ["<<words>>", "normal", "<<chunk>>"]
    rendered = render_context_asr_prompt("salmonn", hostile)
    # the markers come through verbatim as words, not as placeholders
    assert "needed: <<words>>, normal, <<chunk>>?" in rendered.text
    # scaffold around them is intact and appears exactly once
    assert rendered.text.count("Please can you transcribe") == 1
    assert rendered.text.count("ASSISTANT:") == 1
    # rendering is idempotent: same inputs give identical bytes
    again = render_context_asr_prompt("salmonn", hostile)
    assert again.text == rendered.text


def test_injection_in_slidegen_chunk():
    chunk = "text with <<chunk>> marker inside. and more."
    rendered = render_slidegen_messages(chunk)
    user = rendered.messages[1]["content"]
    assert user.endswith("from the following text:" + chunk)
    assert user.count("generate one presentation slide") == 1


def test_unknown_family_and_template_rejected():
    with pytest.raises(ValueError, match="unknown prompt family"):
        render_plain_asr_prompt("whisper")
    with pytest.raises(ValueError, match="unknown prompt family"):
        render_context_asr_prompt("whisper", ["a"])
    with pytest.raises(ValueError, match="no image"):
        render_plain_asr_prompt("salmonn", image=True)
    with pytest.raises(KeyError):
        load_template("does_not_exist")


def test_template_registry_is_complete():
    assert set(list_templates()) == {
        "salmonn_plain",
        "salmonn_context",
        "phi_plain",
        "phi_context",
        "phi_image_audio",
        "ocr_extract",
        "slidegen",
    }


def test_unbound_placeholder_rejected():
    template = load_template("salmonn_context")
    assert template.placeholders == ("words",)
    with pytest.raises(ValueError, match="unbound"):
        template.render({})


def test_slidegen_rejects_empty_chunk():
    with pytest.raises(ValueError, match="non-empty"):
        render_slidegen_messages("")


def test_rendered_prompt_serialization():
    rendered = render_context_asr_prompt("salmonn", ["x"])
    doc = rendered.to_dict()
    assert doc["template_id"] == "salmonn_context"
    assert doc["text"] == rendered.text
    assert doc["bound"] == {"words": "x"}
    messages_doc = render_plain_asr_prompt("phi").to_dict()
    assert messages_doc["messages"][0]["role"] == "user"
    with pytest.raises(ValueError, match="exactly one"):
        RenderedPrompt(template_id="x")


def test_rendered_messages_are_read_only():
    rendered = render_plain_asr_prompt("phi")
    with pytest.raises(TypeError):
        rendered.messages[0]["content"] = "tampered"  # type: ignore[index]
