"""Plan and extract one representative video frame per transcript segment.

Each segment is mapped to the midpoint of its time span and an external
frame-grabbing command renders that instant to a still image. The grabber is
fully configurable (any media tool that can seek and dump a frame fits the
template); this module never decodes video itself.
"""

from __future__ import annotations

import json
import os
import shlex
import subprocess
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .lexicon import Segment, Talk

# Seek at least this far before the end of the video so the grabbed
# timestamp still lands on a decodable frame.
END_MARGIN_S = 0.1

_PLACEHOLDERS = ("{video}", "{timestamp}", "{output}")


def midpoint_timestamp(segment: Segment) -> float:
    return segment.offset + segment.duration / 2.0


def clamp_timestamp(timestamp: float, video_duration: float | None) -> float:
    """Clamp a seek target into the decodable range of the video.

    Timestamps past the end pull back to ``video_duration - END_MARGIN_S``;
    negative ones clamp to zero. With no known duration the timestamp passes
    through unchanged.
    """
    if video_duration is not None:
        timestamp = min(timestamp, max(video_duration - END_MARGIN_S, 0.0))
    return max(timestamp, 0.0)


@dataclass(frozen=True)
class FrameEntry:
    segment_id: str
    timestamp: float
    output: str


@dataclass(frozen=True)
class FramePlan:
    talk_id: str
    video: str
    entries: tuple[FrameEntry, ...]

    def to_dict(self) -> dict:
        return {
            "talk_id": self.talk_id,
            "video": self.video,
            "entries": [
                {
                    "segment_id": e.segment_id,
                    "timestamp": e.timestamp,
                    "output": e.output,
                }
                for e in self.entries
            ],
        }


@dataclass(frozen=True)
class GrabberConfig:
    """External frame-grab command.

    ``command`` must contain each of {video}, {timestamp} and {output}
    exactly once; it is split shell-style and the placeholders are filled
    per token, so paths with spaces survive without quoting games.
    """

    command: str
    timeout_s: float = 60.0
    image_format: str = "png"

    def __post_init__(self) -> None:
        for marker in _PLACEHOLDERS:
            if self.command.count(marker) != 1:
                raise ValueError(f"command template needs exactly one {marker}")
        if self.timeout_s <= 0:
            raise ValueError("timeout_s must be positive")

    def argv(self, video: str, timestamp: float, output: str) -> list[str]:
        return [
            token.format(video=video, timestamp=f"{timestamp:.3f}", output=output)
            for token in shlex.split(self.command)
        ]


@dataclass(frozen=True)
class FrameOutcome:
    segment_id: str
    image: str | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def plan_frames(
    talk: Talk,
    out_dir: str,
    video_duration: float | None = None,
    image_format: str = "png",
) -> FramePlan:
    """Build the deterministic segment -> frame extraction plan for a talk.

    One entry per segment, in segment order, each seeking the clamped
    midpoint and writing ``<segment id>.<format>`` under ``out_dir``. Talks
    without a video reference are rejected.
    """
    if talk.media.video is None:
        raise ValueError(f"talk {talk.id!r} has no video reference")
    entries = tuple(
        FrameEntry(
            segment_id=segment.id,
            timestamp=clamp_timestamp(midpoint_timestamp(segment), video_duration),
            output=os.path.join(out_dir, f"{segment.id}.{image_format}"),
        )
        for segment in talk.segments
    )
    return FramePlan(talk_id=talk.id, video=talk.media.video, entries=entries)


def _grab_one(plan: FramePlan, entry: FrameEntry, grabber: GrabberConfig) -> FrameOutcome:
    if not os.path.exists(plan.video):
        return FrameOutcome(entry.segment_id, error=f"video not found: {plan.video}")
    argv = grabber.argv(plan.video, entry.timestamp, entry.output)
    try:
        proc = subprocess.run(
            argv, capture_output=True, text=True, timeout=grabber.timeout_s
        )
    except subprocess.TimeoutExpired:
        return FrameOutcome(
            entry.segment_id, error=f"grabber timed out after {grabber.timeout_s}s"
        )
    except OSError as exc:
        return FrameOutcome(entry.segment_id, error=f"grabber failed to start: {exc}")
    if proc.returncode != 0:
        detail = proc.stderr.strip() or proc.stdout.strip() or "no diagnostics"
        return FrameOutcome(
            entry.segment_id,
            error=f"grabber exited {proc.returncode}: {detail}",
        )
    if not os.path.exists(entry.output) or os.path.getsize(entry.output) == 0:
        return FrameOutcome(
            entry.segment_id, error="grabber reported success but wrote no image"
        )
    return FrameOutcome(entry.segment_id, image=entry.output)


def execute_plan(
    plan: FramePlan, grabber: GrabberConfig, max_workers: int = 4
) -> list[FrameOutcome]:
    """Run the grabber for every entry, isolating per-entry failures.

    Entries execute concurrently up to ``max_workers``; the returned
    outcomes follow plan order regardless of completion order, and one
    failing entry never aborts the rest.
    """
    if not plan.entries:
        return []
    for entry in plan.entries:
        os.makedirs(os.path.dirname(entry.output) or ".", exist_ok=True)
    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as pool:
        return list(pool.map(lambda e: _grab_one(plan, e, grabber), plan.entries))


def frame_manifest(outcomes: list[FrameOutcome]) -> dict:
    """Per-segment record of where each frame landed (or why it did not)."""
    return {
        o.segment_id: ({"image": o.image} if o.ok else {"error": o.error})
        for o in outcomes
    }


def save_frame_manifest(path: str, outcomes: list[FrameOutcome]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(frame_manifest(outcomes), handle, indent=2, sort_keys=True)
        handle.write("\n")
