"""MPEG2-TS multiplex and demultiplex for VVC plus opaque audio.

CBR mode pads with null packets so the byte count over the stream duration
matches the target rate to one packet, and stamps PCR from byte position.
VBR mode emits no padding and takes PCR from DTS.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .au import AccessUnit
from .errors import BadSync, ContinuityError, RateExceeded
from .nal import reserialize
from .psi import (STREAM_TYPE_ADTS_AAC, STREAM_TYPE_VVC, TsProgram, TsStream,
                  build_pat, build_pmt, parse_pat, parse_pmt)

TS_PACKET_SIZE = 188
NULL_PID = 0x1FFF
PAT_PID = 0x0000
PCR_FREQ = 27_000_000
PTS_FREQ = 90_000


@dataclass
class TsMuxConfig:
    program_number: int = 1
    pmt_pid: int = 0x0100
    video_pid: int = 0x0101
    audio_pid: int = 0x0102
    video_stream_type: int = STREAM_TYPE_VVC
    audio_stream_type: int = STREAM_TYPE_ADTS_AAC
    psi_interval_s: float = 0.1
    pcr_interval_s: float = 0.1
    delivery_delay_s: float = 0.5  # decode deadline headroom per access unit


@dataclass
class TsPacket:
    pid: int
    continuity_counter: int
    payload_unit_start: bool
    has_payload: bool
    payload: bytes
    pcr: int | None = None  # 27 MHz

    @classmethod
    def parse(cls, raw: bytes) -> "TsPacket":
        if len(raw) != TS_PACKET_SIZE or raw[0] != 0x47:
            raise BadSync("not a 188-byte packet with 0x47 sync")
        pid = ((raw[1] & 0x1F) << 8) | raw[2]
        pusi = bool(raw[1] & 0x40)
        afc = (raw[3] >> 4) & 0x3
        cc = raw[3] & 0x0F
        pos = 4
        pcr = None
        if afc in (2, 3):
            af_len = raw[4]
            pos = 5 + af_len
            if af_len >= 7 and raw[5] & 0x10:  # PCR_flag
                base = int.from_bytes(raw[6:12], "big")
                pcr = (base >> 15) * 300 + (base & 0x1FF)
        payload = raw[pos:] if afc in (1, 3) else b""
        return cls(pid=pid, continuity_counter=cc, payload_unit_start=pusi,
                   has_payload=afc in (1, 3), payload=payload, pcr=pcr)


def _encode_pcr(pcr27: int) -> bytes:
    base = (pcr27 // 300) & 0x1FFFFFFFF
    ext = pcr27 % 300
    return ((base << 15) | 0x7E00 | ext).to_bytes(6, "big")


def _packet(pid: int, cc: int, payload: bytes, pusi: bool = False, pcr: int | None = None) -> bytes:
    """One 188-byte packet; adaptation stuffing absorbs any shortfall."""
    af = bytearray()
    need_af = pcr is not None or len(payload) < 184
    if pcr is not None:
        af.append(0x10)  # PCR_flag
        af += _encode_pcr(pcr)
    stuff = 184 - len(payload) - (len(af) + 1 if (af or need_af) else 0)
    if need_af and not af and stuff >= 0:
        if stuff > 0:
            af.append(0x00)  # flags byte, then stuffing
            stuff -= 1
    if stuff < 0:
        raise ValueError("payload too large for packet")
    af += b"\xFF" * stuff
    afc = 0
    if need_af:
        afc |= 0x2
    if payload or not need_af:
        afc |= 0x1
    header = bytes((
        0x47,
        (0x40 if pusi else 0) | (pid >> 8),
        pid & 0xFF,
        (afc << 4) | (cc & 0x0F),
    ))
    body = (bytes((len(af),)) + bytes(af)) if need_af else b""
    out = header + body + payload
    assert len(out) == TS_PACKET_SIZE, len(out)
    return out


def _af_only_packet(pid: int, cc: int, pcr: int) -> bytes:
    af = bytearray((0x10,))
    af += _encode_pcr(pcr)
    af += b"\xFF" * (183 - len(af))
    out = bytes((0x47, pid >> 8, pid & 0xFF, (0x2 << 4) | (cc & 0x0F), len(af))) + bytes(af)
    assert len(out) == TS_PACKET_SIZE
    return out


def null_packet() -> bytes:
    return bytes((0x47, 0x1F, 0xFF, 0x10)) + b"\xFF" * 184


def _encode_timestamp(prefix: int, value: int) -> bytes:
    v = value & 0x1FFFFFFFF
    return bytes((
        (prefix << 4) | (((v >> 30) & 0x7) << 1) | 1,
        (v >> 22) & 0xFF,
        (((v >> 15) & 0x7F) << 1) | 1,
        (v >> 7) & 0xFF,
        ((v & 0x7F) << 1) | 1,
    ))


def _decode_timestamp(b: bytes) -> int:
    return (((b[0] >> 1) & 0x7) << 30) | (b[1] << 22) | (((b[2] >> 1) & 0x7F) << 15) | (b[3] << 7) | ((b[4] >> 1) & 0x7F)


def build_pes(stream_id: int, payload: bytes, pts: int | None, dts: int | None = None,
              bounded: bool = False) -> bytes:
    header_data = b""
    flags = 0
    if pts is not None and dts is not None and dts != pts:
        flags = 0xC0
        header_data = _encode_timestamp(0x3, pts) + _encode_timestamp(0x1, dts)
    elif pts is not None:
        flags = 0x80
        header_data = _encode_timestamp(0x2, pts)
    length = 3 + len(header_data) + len(payload) if bounded else 0
    if length > 0xFFFF:
        length = 0  # oversized bounded payload falls back to unbounded
    out = bytearray(b"\x00\x00\x01")
    out.append(stream_id)
    out += length.to_bytes(2, "big")
    out.append(0x80)  # marker '10', no scrambling
    out.append(flags)
    out.append(len(header_data))
    out += header_data
    out += payload
    return bytes(out)


def parse_pes_header(data: bytes) -> tuple[int | None, int | None, int]:
    """(pts, dts, payload_offset) for a buffer starting at a PES header."""
    if len(data) < 9 or data[:3] != b"\x00\x00\x01":
        return None, None, 0
    flags = data[7]
    header_len = data[8]
    pts = dts = None
    pos = 9
    if flags & 0x80:
        pts = _decode_timestamp(data[pos:pos + 5])
        pos += 5
    if flags & 0x40:
        dts = _decode_timestamp(data[pos:pos + 5])
    return pts, dts, 9 + header_len


@dataclass
class _PendingPes:
    data: bytes
    release_s: float
    deadline_s: float
    label_90k: int
    sent: int = 0

    @property
    def remaining(self) -> int:
        return len(self.data) - self.sent


def _to_90k(ticks: int, timescale: int) -> int:
    v = Fraction(ticks) * PTS_FREQ / timescale
    return int(round(v))


def _au_pes_blobs(video_aus: list[AccessUnit], timescale: int, config: TsMuxConfig,
                  frame_duration_ticks: int | None) -> tuple[list[_PendingPes], float]:
    if not video_aus:
        raise ValueError("no access units to mux")
    for au in video_aus:
        if au.dts_ticks is None:
            raise ValueError("access units must carry timing")
    deltas = [b.dts_ticks - a.dts_ticks for a, b in zip(video_aus, video_aus[1:])]
    if any(d <= 0 for d in deltas):
        raise ValueError("dts must be monotonically increasing")
    last_dur = frame_duration_ticks if frame_duration_ticks else (deltas[-1] if deltas else timescale)
    dts0 = video_aus[0].dts_ticks
    shift = int(round(config.delivery_delay_s * PTS_FREQ))

    blobs = []
    for au in video_aus:
        m = _to_90k(au.dts_ticks - dts0, timescale)
        pts_m = _to_90k((au.pts_ticks if au.pts_ticks is not None else au.dts_ticks) - dts0, timescale)
        payload = reserialize(au.nals)
        pes = build_pes(0xE0, payload, pts=pts_m + shift, dts=(m + shift) if pts_m != m else None)
        blobs.append(_PendingPes(data=pes, release_s=m / PTS_FREQ,
                                 deadline_s=m / PTS_FREQ + config.delivery_delay_s,
                                 label_90k=m + shift))
    total_s = float((_to_90k(video_aus[-1].dts_ticks - dts0 + last_dur, timescale)) / PTS_FREQ)
    return blobs, total_s


def _audio_pes_blobs(frames: list[tuple[int, bytes]], config: TsMuxConfig,
                     video_dts0_90k: int) -> tuple[list[_PendingPes], float]:
    shift = int(round(config.delivery_delay_s * PTS_FREQ))
    blobs = []
    end = 0.0
    deltas = [b - a for (a, _), (b, _) in zip(frames, frames[1:])]
    gap = deltas[-1] if deltas else 0
    for pts, data in frames:
        m = pts - video_dts0_90k
        if m < 0:
            raise ValueError("audio pts precedes video start")
        pes = build_pes(0xC0, data, pts=m + shift, bounded=True)
        blobs.append(_PendingPes(data=pes, release_s=m / PTS_FREQ,
                                 deadline_s=m / PTS_FREQ + config.delivery_delay_s,
                                 label_90k=m + shift))
        end = (m + gap) / PTS_FREQ
    return blobs, end


def mux_ts(video_aus: list[AccessUnit], timescale: int, *, rate_bps: int | None = None,
           audio_frames: list[tuple[int, bytes]] | None = None,
           config: TsMuxConfig | None = None,
           frame_duration_ticks: int | None = None) -> bytes:
    """Multiplex timed AUs (plus optional (pts90k, bytes) audio frames).

    rate_bps None selects VBR. Timestamps are rebased so the first video
    DTS lands delivery_delay_s after stream start.
    """
    cfg = config or TsMuxConfig()
    if video_aus and not video_aus[0].is_irap:
        raise ValueError("first access unit must be an IRAP picture")
    video, video_end = _au_pes_blobs(video_aus, timescale, cfg, frame_duration_ticks)
    dts0_90k = _to_90k(video_aus[0].dts_ticks, timescale)
    audio: list[_PendingPes] = []
    audio_end = 0.0
    streams = [TsStream(pid=cfg.video_pid, stream_type=cfg.video_stream_type)]
    if audio_frames:
        audio, audio_end = _audio_pes_blobs(audio_frames, cfg, dts0_90k)
        streams.append(TsStream(pid=cfg.audio_pid, stream_type=cfg.audio_stream_type))
    program = TsProgram(program_number=cfg.program_number, pmt_pid=cfg.pmt_pid,
                        pcr_pid=cfg.video_pid, streams=tuple(streams))
    if rate_bps is None:
        return _mux_vbr(video, audio, program, cfg)
    return _mux_cbr(video, audio, program, cfg, rate_bps, max(video_end, audio_end))


def _psi_packets(program: TsProgram, cc_pat: int, cc_pmt: int) -> list[bytes]:
    pat, pmt = build_pat(program.program_number, program.pmt_pid), build_pmt(program)
    return [
        _packet(PAT_PID, cc_pat, b"\x00" + pat + b"\xFF" * (183 - len(pat)), pusi=True),
        _packet(program.pmt_pid, cc_pmt, b"\x00" + pmt + b"\xFF" * (183 - len(pmt)), pusi=True),
    ]


def _mux_cbr(video: list[_PendingPes], audio: list[_PendingPes], program: TsProgram,
             cfg: TsMuxConfig, rate_bps: int, total_s: float) -> bytes:
    n_packets = int(round(total_s * rate_bps / (8 * TS_PACKET_SIZE)))
    out = bytearray()
    cc = {PAT_PID: 0, program.pmt_pid: 0, cfg.video_pid: 0, cfg.audio_pid: 0}
    queues = [(cfg.video_pid, video, 0xE0), (cfg.audio_pid, audio, 0xC0)]
    heads = {cfg.video_pid: 0, cfg.audio_pid: 0}
    psi_backlog: list[bytes] = []
    next_psi = 0.0
    next_pcr = 0.0

    def pcr_at(packet_index: int) -> int:
        return packet_index * TS_PACKET_SIZE * 8 * PCR_FREQ // rate_bps

    for k in range(n_packets):
        tau = k * TS_PACKET_SIZE * 8 / rate_bps
        if tau >= next_psi and not psi_backlog:
            psi_backlog = _psi_packets(program, cc[PAT_PID], cc[program.pmt_pid])
            cc[PAT_PID] = (cc[PAT_PID] + 1) & 0xF
            cc[program.pmt_pid] = (cc[program.pmt_pid] + 1) & 0xF
            next_psi += cfg.psi_interval_s
        if psi_backlog:
            out += psi_backlog.pop(0)
            continue

        # earliest-deadline released PES wins the slot
        best = None
        for pid, blobs, _sid in queues:
            i = heads[pid]
            if i < len(blobs) and blobs[i].release_s <= tau:
                if blobs[i].deadline_s < tau and blobs[i].remaining > 0:
                    raise RateExceeded(
                        f"access unit with dts {blobs[i].label_90k} (90 kHz) cannot be "
                        f"delivered at {rate_bps} bps")
                if best is None or blobs[i].deadline_s < best[1].deadline_s:
                    best = (pid, blobs[i])
        if best is not None:
            pid, pes = best
            want_pcr = pid == program.pcr_pid and tau >= next_pcr
            budget = 184 - (8 if want_pcr else 0)
            chunk = pes.data[pes.sent:pes.sent + budget]
            pkt = _packet(pid, cc[pid], chunk, pusi=pes.sent == 0,
                          pcr=pcr_at(k) if want_pcr else None)
            if want_pcr:
                next_pcr += cfg.pcr_interval_s
            cc[pid] = (cc[pid] + 1) & 0xF
            pes.sent += len(chunk)
            if pes.remaining == 0:
                heads[pid] += 1
            out += pkt
            continue

        if tau >= next_pcr:
            out += _af_only_packet(program.pcr_pid, cc[program.pcr_pid], pcr_at(k))
            next_pcr += cfg.pcr_interval_s
            continue
        out += null_packet()

    for pid, blobs, _sid in queues:
        if heads[pid] < len(blobs):
            pes = blobs[heads[pid]]
            raise RateExceeded(
                f"stream data with dts {pes.label_90k} (90 kHz) left over after the "
                f"{total_s:.3f}s budget at {rate_bps} bps")
    return bytes(out)


def _chunk_pes(out: bytearray, pid: int, cc: dict[int, int], pes: bytes, first_pcr: int | None) -> None:
    pos = 0
    first = True
    while pos < len(pes):
        budget = 184 - (8 if (first and first_pcr is not None) else 0)
        chunk = pes[pos:pos + budget]
        out += _packet(pid, cc[pid], chunk, pusi=first, pcr=first_pcr if first else None)
        cc[pid] = (cc[pid] + 1) & 0xF
        pos += len(chunk)
        first = False


def _mux_vbr(video: list[_PendingPes], audio: list[_PendingPes], program: TsProgram,
             cfg: TsMuxConfig) -> bytes:
    out = bytearray()
    cc = {PAT_PID: 0, program.pmt_pid: 0, 0: 0}
    for s in program.streams:
        cc[s.pid] = 0
    merged: list[tuple[float, int, _PendingPes]] = []
    merged += [(p.release_s, program.streams[0].pid, p) for p in video]
    if audio:
        merged += [(p.release_s, program.streams[1].pid, p) for p in audio]
    merged.sort(key=lambda item: (item[0], item[1]))

    next_psi = None
    for when, pid, pes in merged:
        if next_psi is None or when >= next_psi:
            for pkt in _psi_packets(program, cc[PAT_PID], cc[program.pmt_pid]):
                out += pkt
            cc[PAT_PID] = (cc[PAT_PID] + 1) & 0xF
            cc[program.pmt_pid] = (cc[program.pmt_pid] + 1) & 0xF
            next_psi = (when if next_psi is None else next_psi) + cfg.psi_interval_s
        pcr = pes.label_90k * 300 if pid == program.pcr_pid else None
        _chunk_pes(out, pid, cc, pes.data, pcr)
    return bytes(out)


# --- demultiplex ---

@dataclass
class DemuxedStream:
    pid: int
    stream_type: int
    data: bytes = b""
    timestamps: list[tuple[int | None, int | None]] = field(default_factory=list)

    @property
    def kind(self) -> str:
        return TsStream(self.pid, self.stream_type).kind


@dataclass
class TsCapture:
    program: TsProgram | None
    streams: dict[int, DemuxedStream]
    pcrs: list[tuple[int, int]]  # (packet index, pcr 27 MHz)
    issues: list[str]

    def vvc_stream(self) -> DemuxedStream | None:
        for s in self.streams.values():
            if s.kind == "video-vvc":
                return s
        return None


def _resync(data: bytes, pos: int, issues: list[str], strict: bool) -> int:
    scan = pos
    while scan + TS_PACKET_SIZE <= len(data):
        if data[scan] == 0x47 and (scan + TS_PACKET_SIZE >= len(data) or data[scan + TS_PACKET_SIZE] == 0x47):
            if scan != pos:
                msg = f"resynchronized after {scan - pos} stray byte(s) at offset {pos}"
                if strict:
                    raise BadSync(msg)
                issues.append(msg)
            return scan
        scan += 1
    return len(data)


def demux_ts(data: bytes, strict: bool = False) -> TsCapture:
    """Parse a transport stream back into per-PID elementary streams."""
    issues: list[str] = []
    program: TsProgram | None = None
    pmt_pid: int | None = None
    pes_buf: dict[int, bytearray] = {}
    streams: dict[int, DemuxedStream] = {}
    pcrs: list[tuple[int, int]] = []
    last_cc: dict[int, int] = {}

    if strict and (not data or len(data) % TS_PACKET_SIZE or data[0] != 0x47):
        raise BadSync(f"input of {len(data)} bytes is not packet-aligned")

    def flush(pid: int) -> None:
        buf = pes_buf.get(pid)
        if not buf:
            return
        pts, dts, payload_off = parse_pes_header(bytes(buf))
        if pid in streams:
            streams[pid].data += bytes(buf[payload_off:])
            streams[pid].timestamps.append((pts, dts if dts is not None else pts))
        pes_buf[pid] = bytearray()

    pos = 0
    index = 0
    while pos + TS_PACKET_SIZE <= len(data):
        if data[pos] != 0x47:
            pos = _resync(data, pos, issues, strict)
            if pos + TS_PACKET_SIZE > len(data):
                break
        try:
            pkt = TsPacket.parse(data[pos:pos + TS_PACKET_SIZE])
        except BadSync:
            pos = _resync(data, pos + 1, issues, strict)
            continue
        pos += TS_PACKET_SIZE
        index += 1

        if pkt.pcr is not None:
            pcrs.append((index - 1, pkt.pcr))
        if pkt.pid == NULL_PID:
            continue
        if pkt.has_payload:
            prev = last_cc.get(pkt.pid)
            if prev is not None and pkt.continuity_counter != ((prev + 1) & 0xF):
                msg = (f"continuity error on pid {pkt.pid:#06x} at packet {index - 1}: "
                       f"expected {(prev + 1) & 0xF}, got {pkt.continuity_counter}")
                if strict:
                    raise ContinuityError(msg)
                issues.append(msg)
            last_cc[pkt.pid] = pkt.continuity_counter

        if pkt.pid == PAT_PID and pkt.payload_unit_start:
            section = pkt.payload[1 + pkt.payload[0]:]
            entries = parse_pat(section, strict, issues)
            if entries and pmt_pid is None:
                pmt_pid = entries[0][1]
        elif pmt_pid is not None and pkt.pid == pmt_pid and pkt.payload_unit_start:
            section = pkt.payload[1 + pkt.payload[0]:]
            parsed = parse_pmt(section, pmt_pid, strict, issues)
            if parsed is not None and program is None:
                program = parsed
                for s in parsed.streams:
                    streams.setdefault(s.pid, DemuxedStream(pid=s.pid, stream_type=s.stream_type))
        elif pkt.pid in streams:
            if pkt.payload_unit_start:
                flush(pkt.pid)
            if pkt.payload_unit_start or pes_buf.get(pkt.pid):
                pes_buf.setdefault(pkt.pid, bytearray())
                pes_buf[pkt.pid] += pkt.payload

    for pid in list(pes_buf):
        flush(pid)
    return TsCapture(program=program, streams=streams, pcrs=pcrs, issues=issues)


def parse_rate(text: str) -> int:
    """'10m' -> 10_000_000, '500k' -> 500_000, plain integers pass through."""
    t = text.strip().lower()
    mult = 1
    if t.endswith("m"):
        mult, t = 1_000_000, t[:-1]
    elif t.endswith("k"):
        mult, t = 1_000, t[:-1]
    return int(float(t) * mult)
