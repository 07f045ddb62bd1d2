import json
import sys

import pytest

from slidescribe.lexicon import Media, Segment, Talk, save_talk_manifest


@pytest.fixture(scope="session")
def stub_prefix() -> str:
    """Command prefix invoking the offline tool stand-ins."""
    return f"{sys.executable} -m slidescribe.stubtool"


@pytest.fixture(scope="session")
def tiny_video(tmp_path_factory) -> str:
    """A two-second synthetic clip for frame-extraction tests."""
    cv2 = pytest.importorskip("cv2")
    import numpy as np

    path = tmp_path_factory.mktemp("media") / "talk.avi"
    writer = cv2.VideoWriter(
        str(path), cv2.VideoWriter_fourcc(*"MJPG"), 10.0, (64, 48)
    )
    assert writer.isOpened(), "video writer failed to open"
    for i in range(20):
        frame = np.full((48, 64, 3), (i * 12) % 256, dtype=np.uint8)
        writer.write(frame)
    writer.release()
    return str(path)


# Two-talk corpus with hand-checked expected metrics, used by the CLI,
# pipeline and acceptance tests.  Expected aggregate over the stub ASR
# output: 13 matches, 3 substitutions, 1 insertion over 16 reference
# words (WER 25.00); special words kinyabert/bert/protein/alphafold
# give WER_t_ref 2/5 and WER_t_hyp 1/4.

REFERENCES = {
    "talk1": [
        ("t1s0", 0.0, 0.8, "We present KinyaBERT today."),
        ("t1s1", 0.9, 0.8, "The KinyaBERT model beats BERT."),
    ],
    "talk2": [
        ("t2s0", 0.0, 0.8, "Protein folding is hard."),
        ("t2s1", 0.9, 0.8, "AlphaFold predicts structures."),
    ],
}

STUB_TRANSCRIPTS = {
    "talk1/t1s0": "we present kenya bird today",
    "talk1/t1s1": "the kinyabert model beats kinyabert",
    "talk2/t2s0": "protein folding is hard",
    "talk2/t2s1": "alphafold predicts structure",
}

STUB_SLIDE_TEXT = {
    "t1s0.png": "KinyaBERT KinyaBERT evaluation",
    "t1s1.png": "KinyaBERT BERT model",
    "t2s0.png": "protein folding AlphaFold",
    "t2s1.png": "AlphaFold protein structures",
}

VOCABULARY_WORDS = [
    "we", "present", "today", "the", "model", "beats",
    "folding", "is", "hard", "predicts", "structures", "structure",
    "evaluation", "kenya", "bird",
]

# Computed from REFERENCES minus VOCABULARY_WORDS by hand.
EXPECTED_SPECIAL = {
    "talk1": {"kinyabert": 2, "bert": 1},
    "talk2": {"protein": 1, "alphafold": 1},
}


def build_corpus(root, tiny_video: str, stub_prefix: str) -> dict:
    """Write manifests, vocabulary, stub tables and a config under root.

    Returns the paths the tests need, keyed by role.
    """
    talks_dir = root / "talks"
    talks_dir.mkdir(parents=True, exist_ok=True)

    for talk_id, rows in REFERENCES.items():
        audio = talks_dir / f"{talk_id}.wav"
        audio.write_bytes(b"RIFF0000WAVE")
        segments = [
            Segment(id=seg, offset=offset, duration=duration, text=text)
            for seg, offset, duration, text in rows
        ]
        talk = Talk(
            id=talk_id,
            segments=tuple(segments),
            media=Media(
                video=tiny_video, audio=str(audio), video_duration_s=2.0
            ),
        )
        save_talk_manifest(talk, talks_dir / f"{talk_id}.json")

    vocab_path = root / "vocab.txt"
    vocab_path.write_text(
        "".join(f"{word}\t5\n" for word in VOCABULARY_WORDS), encoding="utf-8"
    )

    asr_table = root / "asr_table.json"
    asr_table.write_text(json.dumps(STUB_TRANSCRIPTS), encoding="utf-8")
    ocr_table = root / "ocr_table.json"
    ocr_table.write_text(json.dumps(STUB_SLIDE_TEXT), encoding="utf-8")

    registry = root / "backends.json"
    registry.write_text(
        json.dumps(
            [
                {
                    "id": "stub-asr",
                    "kind": "asr",
                    "transport": "subprocess-command",
                    "command": f"{stub_prefix} asr --table {asr_table}",
                },
                {
                    "id": "stub-ocr",
                    "kind": "ocr",
                    "transport": "subprocess-command",
                    "command": f"{stub_prefix} ocr --table {ocr_table}",
                },
                {
                    "id": "stub-llm",
                    "kind": "llm",
                    "transport": "subprocess-command",
                    "command": f"{stub_prefix} llm",
                },
            ]
        ),
        encoding="utf-8",
    )

    hypotheses = {
        talk: {
            key.split("/", 1)[1]: text
            for key, text in STUB_TRANSCRIPTS.items()
            if key.startswith(talk + "/")
        }
        for talk in REFERENCES
    }
    hyp_path = root / "hypotheses_a.json"
    hyp_path.write_text(json.dumps(hypotheses, indent=2), encoding="utf-8")

    perfect = {
        talk: {seg: text for seg, _, _, text in rows}
        for talk, rows in REFERENCES.items()
    }
    hyp_b_path = root / "hypotheses_b.json"
    hyp_b_path.write_text(json.dumps(perfect, indent=2), encoding="utf-8")

    config = {
        "talks": ["talks/*.json"],
        "vocabulary": "vocab.txt",
        "backend_registry": "backends.json",
        "asr_backend": "stub-asr",
        "ocr_backend": "stub-ocr",
        "llm_backend": "stub-llm",
        "prompt_family": "phi",
        "grabber_command": (
            f"{stub_prefix} grab-frame {{video}} {{timestamp}} {{output}}"
        ),
        "compile_command": f"{stub_prefix} compile-tex {{source}} {{outdir}}",
        "render_command": f"{stub_prefix} pdf-to-images {{pdf}} {{prefix}}",
        "hypotheses": "hypotheses_a.json",
        "hypotheses_b": "hypotheses_b.json",
        "out_dir": "out",
        "jobs": 2,
    }
    config_path = root / "config.json"
    config_path.write_text(json.dumps(config, indent=2), encoding="utf-8")

    return {
        "root": root,
        "config": str(config_path),
        "talks_dir": talks_dir,
        "vocabulary": str(vocab_path),
        "hypotheses": str(hyp_path),
        "hypotheses_b": str(hyp_b_path),
        "registry": str(registry),
        "out": str(root / "out"),
    }


@pytest.fixture()
def corpus(tmp_path, tiny_video, stub_prefix) -> dict:
    return build_corpus(tmp_path, tiny_video, stub_prefix)
