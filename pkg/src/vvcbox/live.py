"""Synthetic-live session state: clocked segment availability.

All availability logic takes an injected clock so it stays deterministic
under test; nothing here reads wall time on its own.
"""
from __future__ import annotations

import time
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path

from .mpd import (DEFAULT_INIT_NAME, DEFAULT_MEDIA_TEMPLATE, LiveMpdOptions,
                  Representation, expand_template, write_mpd)
from .segmenting import Segment, SegmentPlan

MPD_NS = "urn:mpeg:dash:schema:mpd:2011"


class SystemClock:
    def now(self) -> float:
        return time.time()


class ManualClock:
    """Test clock: starts where you set it, moves when told."""

    def __init__(self, t: float = 0.0):
        self.t = t

    def now(self) -> float:
        return self.t

    def advance(self, dt: float) -> None:
        self.t += dt


def plan_from_durations(durations: list[int], timescale: int, target_dur_ms: int) -> SegmentPlan:
    """Rebuild a timing-only plan (AU indices unknown) from tick durations."""
    segments = []
    t = 0
    for d in durations:
        segments.append(Segment(first_au_index=0, au_count=0, duration_ticks=d, earliest_pts_ticks=t))
        t += d
    return SegmentPlan(target_dur_ms=target_dur_ms, timescale=timescale, segments=tuple(segments))


@dataclass
class LiveSession:
    plan: SegmentPlan
    session_start: float                      # UTC epoch seconds
    availability_offset_s: float = 0.0        # the asto analog
    loop: bool = False                        # the flop=-1 analog
    manifest_name: str = "live.mpd"
    init_name: str = DEFAULT_INIT_NAME
    media_template: str = DEFAULT_MEDIA_TEMPLATE
    representations: list[Representation] = field(default_factory=list)
    time_shift_buffer_depth_s: float = 30.0
    published_upto: int = 0                   # monotone non-decreasing

    @property
    def segment_count(self) -> int:
        return len(self.plan.segments)

    @property
    def period_ticks(self) -> int:
        return self.plan.total_duration_ticks

    def availability_time(self, k: int) -> float:
        """Instant at which 1-based (virtual, when looping) segment k opens."""
        n = self.segment_count
        wraps, idx = divmod(k - 1, n)
        end_ticks = wraps * self.period_ticks + self.plan.end_ticks(idx + 1)
        return self.session_start + end_ticks / self.plan.timescale - self.availability_offset_s

    def pace(self, now: float) -> int:
        """Number of segments available at `now`; advances published_upto."""
        n = self.segment_count
        upto = 0
        period_s = self.period_ticks / self.plan.timescale
        if self.loop and period_s > 0:
            full = int(max(now - self.session_start + self.availability_offset_s, 0.0) // period_s)
            upto = full * n
        probe = upto + 1
        while (self.loop or probe <= n) and now >= self.availability_time(probe):
            upto = probe
            probe += 1
        if not self.loop:
            upto = min(upto, n)
        if upto > self.published_upto:
            self.published_upto = upto
        return self.published_upto

    def resolve_segment(self, k: int) -> tuple[int, int]:
        """Virtual index -> (real 1-based index, tfdt shift in ticks)."""
        wraps, idx = divmod(k - 1, self.segment_count)
        return idx + 1, wraps * self.period_ticks

    def timeline_window(self, upto: int) -> tuple[list[tuple[int, int, int]], int]:
        """(t, d, r) rows and start number covering the time-shift window."""
        if upto <= 0:
            return [], 1
        window_segments = max(1, int(self.time_shift_buffer_depth_s * 1000 // max(self.plan.target_dur_ms, 1)))
        first = max(1, upto - window_segments + 1)
        rows: list[list[int]] = []
        for k in range(first, upto + 1):
            real, shift = self.resolve_segment(k)
            t = shift + self.plan.end_ticks(real - 1)
            d = self.plan.segments[real - 1].duration_ticks
            if rows and rows[-1][1] == d and rows[-1][0] + (rows[-1][2] + 1) * d == t:
                rows[-1][2] += 1
            else:
                rows.append([t, d, 0])
        return [tuple(r) for r in rows], first

    def dynamic_mpd(self, now: float) -> str:
        upto = self.pace(now)
        rows, start_number = self.timeline_window(upto)
        opts = LiveMpdOptions(
            availability_start_time=self.session_start,
            publish_time=now,
            availability_offset_s=self.availability_offset_s,
            time_shift_buffer_depth_s=self.time_shift_buffer_depth_s,
            timeline_window=rows,
            start_number=start_number,
        )
        return write_mpd(self.plan, self.representations, profile="live",
                         mode="dynamic", live_opts=opts, use_timeline=True)


def pace(plan: SegmentPlan, session_start: float, now: float,
         availability_offset_s: float = 0.0, loop: bool = False) -> list[int]:
    """Stateless convenience: available 1-based segment indices at `now`."""
    session = LiveSession(plan=plan, session_start=session_start,
                          availability_offset_s=availability_offset_s, loop=loop)
    return list(range(1, session.pace(now) + 1))


def load_presentation(root: Path, mpd_name: str) -> tuple[SegmentPlan, list[Representation], str, str]:
    """Recover plan and representation facts from a packaged live MPD."""
    root = Path(root)
    tree = ET.parse(root / mpd_name)
    mpd = tree.getroot()
    ns = {"d": MPD_NS}
    rep_el = mpd.find(".//d:Representation", ns)
    st_el = mpd.find(".//d:SegmentTemplate", ns)
    if rep_el is None or st_el is None:
        raise ValueError(f"{mpd_name} is not a live-profile manifest")
    timescale = int(st_el.get("timescale"))
    media_template = st_el.get("media", DEFAULT_MEDIA_TEMPLATE)
    init_name = st_el.get("initialization", DEFAULT_INIT_NAME)

    durations: list[int] = []
    timeline = st_el.find("d:SegmentTimeline", ns)
    if timeline is not None:
        for s in timeline.findall("d:S", ns):
            d = int(s.get("d"))
            durations.extend([d] * (int(s.get("r", "0")) + 1))
    else:
        dur = int(st_el.get("duration"))
        n = 1
        while (root / expand_template(media_template, n)).exists():
            n += 1
        durations = [dur] * (n - 1)

    min_buffer = mpd.get("minBufferTime", "PT2.000S")
    target_ms = int(float(min_buffer[2:-1]) * 1000)
    plan = plan_from_durations(durations, timescale, target_ms)
    rep = Representation(
        id=rep_el.get("id", "1"),
        bandwidth=int(rep_el.get("bandwidth", "0")),
        width=int(rep_el.get("width", "0")),
        height=int(rep_el.get("height", "0")),
        codecs=rep_el.get("codecs", ""),
        init_name=init_name,
        media_template=media_template,
    )
    return plan, [rep], init_name, media_template
