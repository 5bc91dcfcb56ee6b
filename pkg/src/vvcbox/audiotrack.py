"""Opaque audio track interchange: a JSON sidecar carrying a prebuilt
sample entry plus timed payloads. No codec parsing happens here; the
bytes pass through to MP4 or TS as-is."""
from __future__ import annotations

import base64
import json
from pathlib import Path

from .mp4 import AudioTrack
from .ts import PTS_FREQ


def save_audio_track(path: Path, track: AudioTrack) -> None:
    doc = {
        "timescale": track.timescale,
        "sample_entry_b64": base64.b64encode(track.sample_entry).decode("ascii"),
        "samples": [
            {"duration": dur, "data_b64": base64.b64encode(data).decode("ascii")}
            for dur, data in track.samples
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def load_audio_track(path: Path) -> AudioTrack:
    doc = json.loads(Path(path).read_text())
    return AudioTrack(
        timescale=int(doc["timescale"]),
        sample_entry=base64.b64decode(doc["sample_entry_b64"]),
        samples=[(int(s["duration"]), base64.b64decode(s["data_b64"])) for s in doc["samples"]],
    )


def frames_90k(track: AudioTrack) -> list[tuple[int, bytes]]:
    """(pts in 90 kHz, payload) with pts accumulated from durations."""
    frames = []
    ticks = 0
    for dur, data in track.samples:
        frames.append((ticks * PTS_FREQ // track.timescale, data))
        ticks += dur
    return frames
