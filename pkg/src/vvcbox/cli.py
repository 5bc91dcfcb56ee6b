"""Command line front end; every subcommand also reads '-' (stdin) and
writes '-' (stdout) so the tools compose through pipes."""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .au import parse_fps
from .errors import VvcBoxError
from .probe import ContainerKind, probe_bytes


def _read_input(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    return Path(path).read_bytes()


def _write_output(path: str, data: bytes) -> None:
    if path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        Path(path).write_bytes(data)


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def _load_es(args, data: bytes, warnings: list[str]) -> bytes:
    from .packaging import load_elementary_stream

    fmt = getattr(args, "format", "auto")
    if fmt == "annexb":
        return data
    if fmt == "auto":
        return load_elementary_stream(data, warnings)
    if fmt == "mp4":
        from .mp4 import extract_annex_b
        return extract_annex_b(data)
    if fmt == "ts":
        from .ts import demux_ts
        cap = demux_ts(data)
        stream = cap.vvc_stream()
        if stream is None:
            raise VvcBoxError("transport stream carries no VVC program")
        warnings.extend(cap.issues)
        return stream.data
    raise VvcBoxError(f"unknown format override {fmt!r}")


def _timed_aus(args, data: bytes, warnings: list[str]):
    from .packaging import timed_access_units

    es = _load_es(args, data, warnings)
    return timed_access_units(es, parse_fps(args.fps), warnings)


def cmd_probe(args) -> int:
    data = _read_input(args.input)
    kind = probe_bytes(data)
    print(kind.value)
    return 0 if kind != ContainerKind.UNKNOWN else 1


def cmd_inspect(args) -> int:
    from .report import build_report, render_json, render_text

    data = _read_input(args.input)
    warnings: list[str] = []
    try:
        report = build_report(data, warnings)
    except VvcBoxError as exc:
        return _fail(str(exc))
    text = render_json(report, args.deep) if args.json else render_text(report, args.deep)
    sys.stdout.write(text)
    return 2 if report.warnings else 0


def cmd_package(args) -> int:
    from .mp4 import package_progressive

    data = _read_input(args.input)
    warnings: list[str] = []
    try:
        aus, _ = _timed_aus(args, data, warnings)
        audio = None
        if args.audio:
            from .audiotrack import load_audio_track
            audio = load_audio_track(Path(args.audio))
        out = package_progressive(aus, parse_fps(args.fps), args.mode, audio)
    except VvcBoxError as exc:
        return _fail(str(exc))
    _write_output(args.output, out)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 0


def cmd_extract(args) -> int:
    from .mp4 import extract_annex_b

    data = _read_input(args.input)
    try:
        out = extract_annex_b(data)
    except VvcBoxError as exc:
        return _fail(str(exc))
    _write_output(args.output, out)
    return 0


def cmd_mux_ts(args) -> int:
    from .ts import mux_ts, parse_rate

    data = _read_input(args.input)
    warnings: list[str] = []
    try:
        aus, timescale = _timed_aus(args, data, warnings)
        audio_frames = None
        if args.audio:
            from .audiotrack import frames_90k, load_audio_track
            audio_frames = frames_90k(load_audio_track(Path(args.audio)))
        rate = parse_rate(args.rate) if args.rate else None
        out = mux_ts(aus, timescale, rate_bps=rate, audio_frames=audio_frames)
    except (VvcBoxError, ValueError) as exc:
        return _fail(str(exc))
    _write_output(args.output, out)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 0


def cmd_demux_ts(args) -> int:
    from .ts import demux_ts

    data = _read_input(args.input)
    try:
        cap = demux_ts(data, strict=args.strict)
    except VvcBoxError as exc:
        return _fail(str(exc))
    if args.dump_dir:
        dump = Path(args.dump_dir)
        dump.mkdir(parents=True, exist_ok=True)
        for pid, stream in sorted(cap.streams.items()):
            suffix = ".vvc" if stream.kind == "video-vvc" else ".bin"
            (dump / f"pid_{pid:#06x}{suffix}").write_bytes(stream.data)
    else:
        stream = cap.vvc_stream()
        if stream is None:
            return _fail("transport stream carries no VVC program")
        _write_output(args.output, stream.data)
    for issue in cap.issues:
        print(f"warning: {issue}", file=sys.stderr)
    return 2 if cap.issues else 0


def cmd_dash(args) -> int:
    from .packaging import package_presentation

    data = _read_input(args.input)
    try:
        result = package_presentation(
            data, Path(args.out),
            target_dur_ms=args.duration,
            profile=args.profile,
            outputs="dual" if args.dual else "dash",
            fps=parse_fps(args.fps),
            mode=args.mode,
            use_timeline=args.stl,
            dynamic=args.dynamic,
            availability_start=args.availability_start,
            codecs=args.codecs,
        )
    except VvcBoxError as exc:
        return _fail(str(exc))
    for f in result.files:
        print(f)
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 0


def cmd_hls(args) -> int:
    from .packaging import package_presentation

    data = _read_input(args.input)
    try:
        result = package_presentation(
            data, Path(args.out),
            target_dur_ms=args.duration,
            profile="live",
            outputs="hls",
            fps=parse_fps(args.fps),
            mode=args.mode,
        )
    except VvcBoxError as exc:
        return _fail(str(exc))
    for f in result.files:
        print(f)
    return 0


def cmd_serve(args) -> int:
    from .live import LiveSession, SystemClock, load_presentation
    from .origin import http_serve

    root = Path(args.root)
    session = None
    if args.live:
        try:
            plan, reps, init_name, media_template = load_presentation(root, args.live)
        except (OSError, ValueError) as exc:
            return _fail(f"cannot load live presentation: {exc}")
        start = args.session_start if args.session_start is not None else SystemClock().now()
        session = LiveSession(
            plan=plan,
            session_start=start,
            availability_offset_s=args.asto,
            loop=args.loop,
            manifest_name=args.live,
            init_name=init_name,
            media_template=media_template,
            representations=reps,
            time_shift_buffer_depth_s=args.tsb,
        )
    print(f"serving {root} on http://{args.bind}/", file=sys.stderr)
    http_serve(root, session, args.bind)
    return 0


def cmd_udp(args) -> int:
    from .ts import mux_ts, parse_rate
    from .udp import parse_dest, udp_emit

    data = _read_input(args.input)
    rate = parse_rate(args.rate)
    warnings: list[str] = []
    try:
        if probe_bytes(data) == ContainerKind.MPEG2_TS:
            stream = data
        else:
            aus, timescale = _timed_aus(args, data, warnings)
            audio_frames = None
            if args.audio:
                from .audiotrack import frames_90k, load_audio_track
                audio_frames = frames_90k(load_audio_track(Path(args.audio)))
            stream = mux_ts(aus, timescale, rate_bps=rate, audio_frames=audio_frames)
        stats = udp_emit(stream, rate, parse_dest(args.dest))
    except (VvcBoxError, OSError) as exc:
        return _fail(str(exc))
    print(f"sent {stats.bytes_sent} bytes in {stats.datagrams} datagrams "
          f"over {stats.elapsed_s:.2f}s", file=sys.stderr)
    return 0


def _add_common_stream_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--fps", default="25", help="frame rate, e.g. 25 or 30000/1001")
    p.add_argument("--format", choices=("auto", "annexb", "mp4", "ts"), default="auto",
                   help="input container override (default: probe)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vvcbox",
                                     description="VVC systems toolbox: parse, package, mux, stream")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("probe", help="identify the input container")
    p.add_argument("input")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("inspect", help="per-NAL / per-AU stream report")
    p.add_argument("input")
    p.add_argument("--deep", action="store_true", help="list every NAL unit")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("package", help="package an elementary stream as MP4")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--mode", choices=("vvc1", "vvc2"), default="vvc1")
    p.add_argument("--audio", help="opaque audio track JSON to mux alongside")
    _add_common_stream_args(p)
    p.set_defaults(func=cmd_package)

    p = sub.add_parser("extract", help="MP4 to Annex B elementary stream")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("mux-ts", help="multiplex into MPEG2-TS")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--rate", help="target bitrate for CBR, e.g. 10m (omit for VBR)")
    p.add_argument("--audio", help="opaque audio track JSON to mux alongside")
    _add_common_stream_args(p)
    p.set_defaults(func=cmd_mux_ts)

    p = sub.add_parser("demux-ts", help="demultiplex MPEG2-TS to elementary streams")
    p.add_argument("input")
    p.add_argument("-o", "--output", default="-", help="VVC stream destination")
    p.add_argument("--dump-dir", help="write every PID to this directory instead")
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_demux_ts)

    p = sub.add_parser("dash", help="package a DASH presentation")
    p.add_argument("input")
    p.add_argument("--out", required=True, help="manifest path, e.g. dash/vod.mpd")
    p.add_argument("--duration", type=int, default=2000, help="target segment duration in ms")
    p.add_argument("--profile", choices=("ondemand", "live"), default="ondemand")
    p.add_argument("--stl", action="store_true", help="SegmentTimeline addressing")
    p.add_argument("--dynamic", action="store_true", help="dynamic (live-clock) manifest")
    p.add_argument("--dual", action="store_true", help="also write HLS playlists")
    p.add_argument("--availability-start", type=float, default=None,
                   help="availabilityStartTime as UTC epoch seconds (dynamic mode)")
    p.add_argument("--mode", choices=("vvc1", "vvc2"), default="vvc1")
    p.add_argument("--codecs", help="override the codecs string")
    _add_common_stream_args(p)
    p.set_defaults(func=cmd_dash)

    p = sub.add_parser("hls", help="package an HLS presentation")
    p.add_argument("input")
    p.add_argument("--out", required=True, help="multivariant playlist path, e.g. hls/master.m3u8")
    p.add_argument("--duration", type=int, default=2000)
    p.add_argument("--mode", choices=("vvc1", "vvc2"), default="vvc1")
    _add_common_stream_args(p)
    p.set_defaults(func=cmd_hls)

    p = sub.add_parser("serve", help="HTTP origin for a packaged presentation")
    p.add_argument("--root", required=True)
    p.add_argument("--bind", default="127.0.0.1:8080")
    p.add_argument("--live", help="manifest name to serve as a synthetic live session")
    p.add_argument("--asto", type=float, default=0.0, help="availability offset in seconds")
    p.add_argument("--loop", action="store_true", help="wrap around at the end (endless stream)")
    p.add_argument("--tsb", type=float, default=30.0, help="time-shift buffer depth in seconds")
    p.add_argument("--session-start", type=float, default=None,
                   help="session start as UTC epoch seconds (default: now)")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("udp", help="emit a CBR transport stream over UDP")
    p.add_argument("input", help="TS file, or any probeable input to mux on the fly")
    p.add_argument("--rate", required=True, help="wire bitrate, e.g. 10m")
    p.add_argument("--dest", default="127.0.0.1:1234")
    p.add_argument("--audio", help="opaque audio track JSON (when muxing on the fly)")
    _add_common_stream_args(p)
    p.set_defaults(func=cmd_udp)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
