"""
Prompt rendering for every backend family
=========================================

The same context word list rendered three ways: a single-string prompt,
a chat message list, and the image-plus-audio variant. Word lists are
data, never markup, so a hostile word cannot break the scaffold.
"""

from slidescribe.prompts import (
    render_context_asr_prompt,
    render_ocr_instruction,
    render_plain_asr_prompt,
    render_slidegen_messages,
)

words = ["kinyarwanda", "kinyabert", "nlp", "pre-trained"]

print("-- salmonn, plain --")
print(render_plain_asr_prompt("salmonn").text)
print("-- salmonn, with context words --")
print(render_context_asr_prompt("salmonn", words).text)

print("-- phi, with context words --")
for message in render_context_asr_prompt("phi", words).messages:
    print(f"[{message['role']}] {message['content']}")

print("-- phi, image plus audio --")
for message in render_plain_asr_prompt("phi", image=True).messages:
    print(f"[{message['role']}] {message['content']}")

print("-- ocr instruction --")
print(render_ocr_instruction().text)

print("-- slide generation --")
for message in render_slidegen_messages("attention is all you need.").messages:
    print(f"[{message['role']}] {message['content']}")

# oversized lists are truncated with a warning; empty ones fall back
# to the plain prompt
many = [f"term{i:03d}" for i in range(80)]
rendered = render_context_asr_prompt("phi", many, cap=50)
print("warnings:", list(rendered.warnings))
rendered = render_context_asr_prompt("phi", [])
print("empty list renders:", rendered.template_id)
