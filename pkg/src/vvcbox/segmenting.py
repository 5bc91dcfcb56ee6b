"""IRAP-aligned segment planning; the single timing source for MPD,
playlists and file output."""
from __future__ import annotations

from dataclasses import dataclass

from .au import AccessUnit
from .errors import FirstAuNotIrap, NoIrap


@dataclass(frozen=True)
class Segment:
    first_au_index: int
    au_count: int
    duration_ticks: int
    earliest_pts_ticks: int


@dataclass(frozen=True)
class SegmentPlan:
    target_dur_ms: int
    timescale: int
    segments: tuple[Segment, ...]

    @property
    def total_duration_ticks(self) -> int:
        return sum(s.duration_ticks for s in self.segments)

    @property
    def total_duration_s(self) -> float:
        return self.total_duration_ticks / self.timescale

    def end_ticks(self, k: int) -> int:
        """Cumulative duration through 1-based segment k."""
        return sum(s.duration_ticks for s in self.segments[:k])

    @property
    def max_segment_s(self) -> float:
        return max(s.duration_ticks for s in self.segments) / self.timescale


def plan_segments(aus: list[AccessUnit], target_dur_ms: int, timescale: int) -> SegmentPlan:
    """New segment at the first IRAP whose pts is at or past the previous
    boundary plus the target duration; the last segment absorbs the tail."""
    if not aus:
        raise NoIrap("no access units")
    if not aus[0].is_irap:
        raise FirstAuNotIrap("stream must open with an IRAP picture")
    if any(au.pts_ticks is None or au.dts_ticks is None for au in aus):
        raise ValueError("access units must carry timing before planning")

    target_ticks = target_dur_ms * timescale // 1000
    boundaries = [0]
    boundary_pts = aus[0].pts_ticks
    for i, au in enumerate(aus[1:], start=1):
        if au.is_irap and au.pts_ticks >= boundary_pts + target_ticks:
            boundaries.append(i)
            boundary_pts = au.pts_ticks

    # end of stream in ticks: next AU's dts continues the last known cadence
    deltas = [b.dts_ticks - a.dts_ticks for a, b in zip(aus, aus[1:])]
    last_dur = deltas[-1] if deltas else target_ticks
    total_end = aus[-1].dts_ticks + last_dur

    segments = []
    for k, start in enumerate(boundaries):
        end_index = boundaries[k + 1] if k + 1 < len(boundaries) else len(aus)
        end_ticks = aus[end_index].dts_ticks if end_index < len(aus) else total_end
        segments.append(Segment(
            first_au_index=start,
            au_count=end_index - start,
            duration_ticks=end_ticks - aus[start].dts_ticks,
            earliest_pts_ticks=aus[start].pts_ticks,
        ))
    return SegmentPlan(target_dur_ms=target_dur_ms, timescale=timescale, segments=tuple(segments))
