"""HLS playlists over the fragmented MP4 output."""
from __future__ import annotations

import math

from .mpd import Representation
from .segmenting import SegmentPlan


def write_media_playlist(plan: SegmentPlan, init_name: str, seg_names: list[str]) -> str:
    if len(seg_names) != len(plan.segments):
        raise ValueError(f"{len(seg_names)} segment names for {len(plan.segments)} planned segments")
    target = math.ceil(plan.max_segment_s)
    lines = [
        "#EXTM3U",
        "#EXT-X-VERSION:7",
        f"#EXT-X-TARGETDURATION:{target}",
        "#EXT-X-PLAYLIST-TYPE:VOD",
        "#EXT-X-MEDIA-SEQUENCE:1",
        f'#EXT-X-MAP:URI="{init_name}"',
    ]
    for seg, name in zip(plan.segments, seg_names):
        dur = seg.duration_ticks / plan.timescale
        lines.append(f"#EXTINF:{dur:.5f},")
        lines.append(name)
    lines.append("#EXT-X-ENDLIST")
    return "\n".join(lines) + "\n"


def write_multivariant_playlist(reps: list[Representation], media_playlists: list[str]) -> str:
    lines = ["#EXTM3U", "#EXT-X-VERSION:7"]
    for rep, uri in zip(reps, media_playlists):
        lines.append(
            f"#EXT-X-STREAM-INF:BANDWIDTH={rep.bandwidth},"
            f"RESOLUTION={rep.width}x{rep.height},CODECS=\"{rep.codecs}\""
        )
        lines.append(uri)
    return "\n".join(lines) + "\n"


def write_hls(plan: SegmentPlan, init_name: str, seg_names: list[str],
              reps: list[Representation], media_playlist_name: str) -> tuple[str, str]:
    """(multivariant, media) playlist texts for a single-representation stream."""
    media = write_media_playlist(plan, init_name, seg_names)
    multi = write_multivariant_playlist(reps, [media_playlist_name])
    return multi, media
