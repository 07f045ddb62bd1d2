"""
Synthesizing slides from a transcript
=====================================

Chunk a transcript into slide-sized groups of sentences, generate
markup for each chunk, compile and render it, and read back the word
list that makes the synthesized talk unique. Everything runs offline:
generation, compilation and rendering are the bundled stand-in tools,
so the output images are minimal but the flow is the real one.
"""

import json
import shlex
import sys
import tempfile

from slidescribe.context import RawExtraction, augmentation_contexts
from slidescribe.slides import CompilerConfig, augment_talk, chunk, split_sentences
from slidescribe.stubtool import minimal_slide_markup, read_pdf_page_texts

STUB = f"{shlex.quote(sys.executable)} -m slidescribe.stubtool"

transcript = (
    "Attention is all you need. The model uses multi-head attention. "
    "Positional encodings replace recurrence. Training uses label smoothing. "
    "The encoder has six layers. The decoder mirrors the encoder. "
    "Beam search decodes the output. Results improve over recurrent baselines. "
    "Ablations isolate each component."
)

sentences = split_sentences(transcript)
chunks = chunk(sentences, size=4, talk_id="demo")
print(f"{len(sentences)} sentences -> {len(chunks)} slides")


def generate(prompt) -> str:
    # stand-in for an LLM call: wrap the chunk text in minimal markup
    text = prompt.messages[-1]["content"].rsplit(":", 1)[-1]
    return minimal_slide_markup(text)


config = CompilerConfig(
    compile_command=f"{STUB} compile-tex {{source}} {{outdir}}",
    render_command=f"{STUB} pdf-to-images {{pdf}} {{prefix}}",
)

out_dir = tempfile.mkdtemp(prefix="slides-demo-")
manifest = augment_talk("demo", transcript, generate, config, out_dir, chunk_size=4)
print("summary:", json.dumps(manifest.summary))
for artifact in manifest.artifacts:
    print(f"  chunk {artifact.chunk_index}: {artifact.status}, "
          f"{len(artifact.images)} image(s)")

# with several synthesized talks, the per-talk unique filter yields
# disjoint word lists suitable for augmentation training targets
extractions = {
    "demo": RawExtraction(
        talk_id="demo",
        counts={"attention": 3, "encoder": 2, "training": 2},
        backend_id="demo",
    ),
    "other": RawExtraction(
        talk_id="other",
        counts={"protein": 4, "folding": 2, "training": 3},
        backend_id="demo",
    ),
}
contexts = augmentation_contexts(extractions, threshold=2, unique_mode="any")
for talk_id, words in sorted(contexts.items()):
    print(f"unique to {talk_id}: {list(words.words)}")
