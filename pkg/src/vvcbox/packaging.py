"""End-to-end presentation packaging: ES/MP4/TS in, DASH and/or HLS out."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .au import AccessUnit, assemble_access_units, assign_timing
from .errors import VvcBoxError
from .fmp4 import FragmentedPresentation, fragment
from .mp4 import extract_annex_b, stream_properties
from .mpd import (DEFAULT_INIT_NAME, DEFAULT_MEDIA_TEMPLATE, LiveMpdOptions,
                  Representation, expand_template, write_mpd)
from .hls import write_hls
from .nal import scan_annex_b
from .probe import ContainerKind, probe_bytes
from .segmenting import SegmentPlan, plan_segments
from .ts import demux_ts


@dataclass
class PackagingResult:
    plan: SegmentPlan
    files: list[Path]
    mpd_path: Path | None = None
    playlist_paths: list[Path] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def load_elementary_stream(data: bytes, warnings: list[str] | None = None) -> bytes:
    """Normalize any supported container to an Annex B byte string."""
    kind = probe_bytes(data)
    if kind == ContainerKind.ANNEX_B:
        return data
    if kind == ContainerKind.ISO_BMFF:
        return extract_annex_b(data)
    if kind == ContainerKind.MPEG2_TS:
        cap = demux_ts(data)
        if warnings is not None:
            warnings.extend(cap.issues)
        stream = cap.vvc_stream()
        if stream is None:
            raise VvcBoxError("transport stream carries no VVC program")
        return stream.data
    raise VvcBoxError("input format not recognized")


def timed_access_units(es: bytes, fps: Fraction,
                       warnings: list[str] | None = None) -> tuple[list[AccessUnit], int]:
    nals = scan_annex_b(es, warnings=warnings)
    aus = assemble_access_units(nals, warnings=warnings)
    timescale = assign_timing(aus, fps)
    return aus, timescale


def representation_for(aus: list[AccessUnit], plan: SegmentPlan, media_bytes: int,
                       rep_id: str = "1", codecs: str | None = None) -> Representation:
    sps = stream_properties(aus)
    duration_s = plan.total_duration_ticks / plan.timescale
    bandwidth = math.ceil(media_bytes * 8 / duration_s) if duration_s else 0
    return Representation(
        id=rep_id,
        bandwidth=bandwidth,
        width=sps.width_luma,
        height=sps.height_luma,
        codecs=codecs if codecs is not None else sps.codecs_string,
    )


def package_presentation(data: bytes, out_mpd: Path, *, target_dur_ms: int = 2000,
                         profile: str = "ondemand", outputs: str = "dash",
                         fps: Fraction = Fraction(25), mode: str = "vvc1",
                         use_timeline: bool = False, dynamic: bool = False,
                         availability_start: float | None = None,
                         rep_id: str = "1", codecs: str | None = None) -> PackagingResult:
    """Probe, segment and emit a presentation next to out_mpd.

    outputs: 'dash', 'hls' or 'dual'. onDemand keeps everything in one
    self-indexed file; live profiles emit init.mp4 + seg_N.m4s.
    """
    if outputs not in ("dash", "hls", "dual"):
        raise ValueError(f"unknown outputs {outputs!r}")
    if profile == "ondemand" and outputs != "dash":
        raise VvcBoxError("HLS output needs the live profile (separate segment files)")
    if dynamic and profile == "ondemand":
        raise VvcBoxError("dynamic mode needs the live profile")

    out_mpd = Path(out_mpd)
    out_dir = out_mpd.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    warnings: list[str] = []
    es = load_elementary_stream(data, warnings)
    aus, timescale = timed_access_units(es, fps, warnings)
    plan = plan_segments(aus, target_dur_ms, timescale)
    frag = fragment(aus, plan, fps, mode)

    files: list[Path] = []
    playlists: list[Path] = []
    media_bytes = sum(len(s) for s in frag.segments)
    rep = representation_for(aus, plan, media_bytes, rep_id, codecs)

    if profile == "ondemand":
        media_path = out_dir / (out_mpd.stem + ".mp4")
        blob = frag.ondemand_file()
        media_path.write_bytes(blob)
        files.append(media_path)
        rep.media_file = media_path.name
        rep.init_range = (0, len(frag.init) - 1)
        rep.index_range = frag.index_range()
        mpd_text = write_mpd(plan, [rep], profile="ondemand", mode="static")
        out_mpd.write_text(mpd_text)
        files.append(out_mpd)
        return PackagingResult(plan=plan, files=files, mpd_path=out_mpd, warnings=warnings)

    # live-profile layout: init + one file per media segment
    init_path = out_dir / DEFAULT_INIT_NAME
    init_path.write_bytes(frag.init)
    files.append(init_path)
    seg_names = []
    for i, seg in enumerate(frag.segments, start=1):
        name = expand_template(DEFAULT_MEDIA_TEMPLATE, i)
        (out_dir / name).write_bytes(seg)
        files.append(out_dir / name)
        seg_names.append(name)

    mpd_path: Path | None = None
    if outputs in ("dash", "dual"):
        live_opts = None
        if dynamic:
            live_opts = LiveMpdOptions(
                availability_start_time=availability_start if availability_start is not None else 0.0,
            )
        mpd_text = write_mpd(plan, [rep], profile="live",
                             mode="dynamic" if dynamic else "static",
                             live_opts=live_opts, use_timeline=use_timeline)
        out_mpd.write_text(mpd_text)
        files.append(out_mpd)
        mpd_path = out_mpd
    if outputs in ("hls", "dual"):
        multi_name = out_mpd.name if out_mpd.suffix == ".m3u8" else out_mpd.stem + ".m3u8"
        media_name = multi_name[:-len(".m3u8")] + "_media.m3u8"
        multi, media = write_hls(plan, DEFAULT_INIT_NAME, seg_names, [rep], media_name)
        (out_dir / media_name).write_text(media)
        (out_dir / multi_name).write_text(multi)
        files += [out_dir / multi_name, out_dir / media_name]
        playlists = [out_dir / multi_name, out_dir / media_name]

    return PackagingResult(plan=plan, files=files, mpd_path=mpd_path,
                           playlist_paths=playlists, warnings=warnings)
