"""
The full pipeline, offline, twice
=================================

Builds a two-talk corpus from scratch (synthetic video, canned
transcripts, stand-in backends), runs the whole pipeline, then runs it
again to show that a completed run resumes without repeating any work.
Needs opencv-python-headless for the synthetic video, as installed by
the package's test extra.
"""

import json
import os
import shlex
import sys
import tempfile
import time

import cv2
import numpy as np

from slidescribe.lexicon import Media, Segment, Talk, save_talk_manifest
from slidescribe.reports import render_table
from slidescribe.stages import load_config, run_pipeline

STUB = f"{shlex.quote(sys.executable)} -m slidescribe.stubtool"

root = tempfile.mkdtemp(prefix="pipeline-demo-")
print("workspace:", root)

# a 2 second synthetic clip standing in for the talk recording
video = os.path.join(root, "talk.avi")
writer = cv2.VideoWriter(video, cv2.VideoWriter_fourcc(*"MJPG"), 10.0, (64, 48))
for i in range(20):
    writer.write(np.full((48, 64, 3), (i * 12) % 256, dtype=np.uint8))
writer.release()

references = {
    "talk1": [
        ("t1s0", 0.0, 0.8, "We present KinyaBERT today."),
        ("t1s1", 0.9, 0.8, "The KinyaBERT model beats BERT."),
    ],
    "talk2": [
        ("t2s0", 0.0, 0.8, "Protein folding is hard."),
        ("t2s1", 0.9, 0.8, "AlphaFold predicts structures."),
    ],
}
for talk_id, rows in references.items():
    audio = os.path.join(root, f"{talk_id}.wav")
    with open(audio, "wb") as handle:
        handle.write(b"RIFF0000WAVE")
    talk = Talk(
        id=talk_id,
        segments=tuple(Segment(*row) for row in rows),
        media=Media(video=video, audio=audio, video_duration_s=2.0),
    )
    save_talk_manifest(talk, os.path.join(root, f"{talk_id}.json"))

with open(os.path.join(root, "vocab.txt"), "w", encoding="utf-8") as handle:
    for word in ["we", "present", "today", "the", "model", "beats", "folding",
                 "is", "hard", "predicts", "structures", "structure",
                 "evaluation", "kenya", "bird"]:
        handle.write(f"{word}\t5\n")

# what the stand-in backends answer
with open(os.path.join(root, "asr_table.json"), "w", encoding="utf-8") as handle:
    json.dump({
        "talk1/t1s0": "we present kenya bird today",
        "talk1/t1s1": "the kinyabert model beats kinyabert",
        "talk2/t2s0": "protein folding is hard",
        "talk2/t2s1": "alphafold predicts structure",
    }, handle)
with open(os.path.join(root, "ocr_table.json"), "w", encoding="utf-8") as handle:
    json.dump({
        "t1s0.png": "KinyaBERT KinyaBERT evaluation",
        "t1s1.png": "KinyaBERT BERT model",
        "t2s0.png": "protein folding AlphaFold",
        "t2s1.png": "AlphaFold protein structures",
    }, handle)

with open(os.path.join(root, "backends.json"), "w", encoding="utf-8") as handle:
    json.dump([
        {"id": "stub-asr", "kind": "asr", "transport": "subprocess-command",
         "command": f"{STUB} asr --table {root}/asr_table.json"},
        {"id": "stub-ocr", "kind": "ocr", "transport": "subprocess-command",
         "command": f"{STUB} ocr --table {root}/ocr_table.json"},
    ], handle)

with open(os.path.join(root, "config.json"), "w", encoding="utf-8") as handle:
    json.dump({
        "talks": ["talk1.json", "talk2.json"],
        "vocabulary": "vocab.txt",
        "backend_registry": "backends.json",
        "asr_backend": "stub-asr",
        "ocr_backend": "stub-ocr",
        "grabber_command": f"{STUB} grab-frame {{video}} {{timestamp}} {{output}}",
        "out_dir": "out",
    }, handle)

config = load_config(os.path.join(root, "config.json"))

started = time.monotonic()
code, report = run_pipeline(config)
print(f"first run: exit {code} in {time.monotonic() - started:.1f}s")
print(render_table(report), end="")

started = time.monotonic()
code, report = run_pipeline(config)
print(f"second run: exit {code} in {time.monotonic() - started:.1f}s "
      "(all stages resumed)")

with open(os.path.join(root, "out", "timing.json"), encoding="utf-8") as handle:
    print("second-run stage timings:", json.dumps(json.load(handle)["stages_s"]))
