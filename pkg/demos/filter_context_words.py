"""
From raw slide text to a context word list
==========================================

Slide text extracted by an OCR or vision backend is noisy: misreads,
running heads, general vocabulary. The filter chain keeps the words
worth biasing an ASR system toward, and every run records enough
provenance to be replayed.
"""

from slidescribe.context import RawExtraction, evaluation_context, replay
from slidescribe.lexicon import Vocabulary

# pooled token counts over all frames of one talk, as an extractor
# would return them
extraction = RawExtraction(
    talk_id="demo-talk",
    counts={
        "kinyabert": 7,
        "kinyarwanda": 4,
        "morphology": 3,
        "model": 9,
        "the": 22,
        "glyph": 1,  # a misread; appears once
    },
    backend_id="demo-ocr",
)

# a general-domain vocabulary: words any talk might use
vocab = Vocabulary({"model": 1500, "the": 90000, "results": 800})

words = evaluation_context(extraction, vocab, threshold=2)
print("kept words, frequent first:", list(words.words))
print("provenance:")
for key, value in words.provenance.items():
    print(f"  {key}: {value}")

# the provenance is sufficient to reproduce the run
replayed = replay(extraction, words.provenance, vocab=vocab)
assert replayed == words.words
print("replay reproduces the word list")
