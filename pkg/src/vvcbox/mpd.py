"""DASH manifest generation: onDemand (SegmentBase+sidx), live
(SegmentTemplate @duration), SegmentTimeline, static and dynamic."""
from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from xml.sax.saxutils import escape, quoteattr

from .errors import InconsistentPlan
from .segmenting import SegmentPlan

PROFILE_URNS = {
    "ondemand": "urn:mpeg:dash:profile:isoff-on-demand:2011",
    "live": "urn:mpeg:dash:profile:isoff-live:2011",
}

DEFAULT_INIT_NAME = "init.mp4"
DEFAULT_MEDIA_TEMPLATE = "seg_$Number$.m4s"


@dataclass
class Representation:
    id: str
    bandwidth: int
    width: int
    height: int
    codecs: str
    media_file: str | None = None                    # onDemand BaseURL
    init_range: tuple[int, int] | None = None
    index_range: tuple[int, int] | None = None
    init_name: str = DEFAULT_INIT_NAME
    media_template: str = DEFAULT_MEDIA_TEMPLATE


@dataclass
class LiveMpdOptions:
    availability_start_time: float                   # UTC epoch seconds
    publish_time: float | None = None
    availability_offset_s: float = 0.0               # the asto analog
    time_shift_buffer_depth_s: float = 30.0
    suggested_presentation_delay_s: float | None = None
    minimum_update_period_s: float | None = None
    timeline_window: list[tuple[int, int, int]] | None = None  # (t, d, r) rows
    start_number: int = 1


def iso_duration(seconds: float) -> str:
    return f"PT{seconds:.3f}S"


def iso_instant(epoch_s: float) -> str:
    dt = datetime.fromtimestamp(int(epoch_s), tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


def timeline_runs(plan: SegmentPlan) -> list[tuple[int, int, int]]:
    """Run-length compressed (t, d, r) rows covering the whole plan."""
    rows: list[list[int]] = []
    t = 0
    for seg in plan.segments:
        if rows and rows[-1][1] == seg.duration_ticks:
            rows[-1][2] += 1
        else:
            rows.append([t, seg.duration_ticks, 0])
        t += seg.duration_ticks
    return [tuple(r) for r in rows]


def expand_timeline(rows: list[tuple[int, int, int]]) -> list[tuple[int, int]]:
    """(start, duration) per segment from (t, d, r) rows."""
    out = []
    for t, d, r in rows:
        for i in range(r + 1):
            out.append((t + i * d, d))
    return out


def _uniform_duration(plan: SegmentPlan) -> int:
    durs = [s.duration_ticks for s in plan.segments]
    head = durs[:-1] if len(durs) > 1 else durs
    if any(d != head[0] for d in head):
        raise InconsistentPlan(
            "segment durations vary; @duration addressing needs uniform segments, use the timeline variant")
    return head[0]


def write_mpd(plan: SegmentPlan, reps: list[Representation], profile: str = "ondemand",
              mode: str = "static", live_opts: LiveMpdOptions | None = None,
              use_timeline: bool = False) -> str:
    """Render the manifest; raises InconsistentPlan when the declared
    addressing cannot reproduce the plan."""
    if profile not in PROFILE_URNS:
        raise ValueError(f"unknown profile {profile!r}")
    if mode == "dynamic" and live_opts is None:
        raise ValueError("dynamic manifests need LiveMpdOptions")
    if profile == "ondemand" and mode == "dynamic":
        raise ValueError("onDemand profile is static by definition")

    total_s = plan.total_duration_ticks / plan.timescale
    lines: list[str] = ['<?xml version="1.0" encoding="utf-8"?>']
    mpd_attrs = [
        ('xmlns', "urn:mpeg:dash:schema:mpd:2011"),
        ('type', mode),
        ('profiles', PROFILE_URNS[profile]),
        ('minBufferTime', iso_duration(plan.target_dur_ms / 1000)),
    ]
    if mode == "static":
        mpd_attrs.append(('mediaPresentationDuration', iso_duration(total_s)))
    else:
        opts = live_opts
        mup = opts.minimum_update_period_s if opts.minimum_update_period_s is not None else plan.target_dur_ms / 1000
        spd = opts.suggested_presentation_delay_s
        if spd is None:
            spd = max(plan.target_dur_ms / 1000 - opts.availability_offset_s, 0.1)
        mpd_attrs += [
            ('availabilityStartTime', iso_instant(opts.availability_start_time)),
            ('publishTime', iso_instant(opts.publish_time if opts.publish_time is not None
                                        else opts.availability_start_time)),
            ('minimumUpdatePeriod', iso_duration(mup)),
            ('timeShiftBufferDepth', iso_duration(opts.time_shift_buffer_depth_s)),
            ('suggestedPresentationDelay', iso_duration(spd)),
        ]
    lines.append("<MPD " + " ".join(f"{k}={quoteattr(v)}" for k, v in mpd_attrs) + ">")
    lines.append('  <Period id="0" start="PT0.000S">')
    lines.append('    <AdaptationSet contentType="video" mimeType="video/mp4" segmentAlignment="true">')

    for rep in reps:
        attrs = (f'id={quoteattr(rep.id)} bandwidth="{rep.bandwidth}" '
                 f'width="{rep.width}" height="{rep.height}" codecs={quoteattr(rep.codecs)}')
        lines.append(f"      <Representation {attrs}>")
        if profile == "ondemand":
            if rep.media_file is None or rep.index_range is None or rep.init_range is None:
                raise InconsistentPlan("onDemand representation needs media file and byte ranges")
            lines.append(f"        <BaseURL>{escape(rep.media_file)}</BaseURL>")
            lines.append(f'        <SegmentBase indexRange="{rep.index_range[0]}-{rep.index_range[1]}">')
            lines.append(f'          <Initialization range="{rep.init_range[0]}-{rep.init_range[1]}"/>')
            lines.append("        </SegmentBase>")
        else:
            start_number = live_opts.start_number if (mode == "dynamic" and live_opts) else 1
            st_attrs = (f'timescale="{plan.timescale}" media={quoteattr(rep.media_template)} '
                        f'initialization={quoteattr(rep.init_name)} startNumber="{start_number}"')
            if mode == "dynamic" and live_opts and live_opts.availability_offset_s > 0:
                st_attrs += f' availabilityTimeOffset="{live_opts.availability_offset_s:.3f}"'
            if use_timeline:
                lines.append(f"        <SegmentTemplate {st_attrs}>")
                rows = (live_opts.timeline_window if (mode == "dynamic" and live_opts and
                                                      live_opts.timeline_window is not None)
                        else timeline_runs(plan))
                if mode == "static":
                    declared = sum(d * (r + 1) for _t, d, r in rows)
                    if declared != plan.total_duration_ticks:
                        raise InconsistentPlan(
                            f"timeline covers {declared} ticks, plan has {plan.total_duration_ticks}")
                lines.append("          <SegmentTimeline>")
                for t, d, r in rows:
                    if r > 0:
                        lines.append(f'            <S t="{t}" d="{d}" r="{r}"/>')
                    else:
                        lines.append(f'            <S t="{t}" d="{d}"/>')
                lines.append("          </SegmentTimeline>")
                lines.append("        </SegmentTemplate>")
            else:
                dur = _uniform_duration(plan)
                lines.append(f'        <SegmentTemplate {st_attrs} duration="{dur}"/>')
        lines.append("      </Representation>")

    lines.append("    </AdaptationSet>")
    lines.append("  </Period>")
    lines.append("</MPD>")
    return "\n".join(lines) + "\n"


def expand_template(template: str, number: int) -> str:
    return template.replace("$Number$", str(number))
