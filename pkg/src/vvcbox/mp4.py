"""Progressive MP4 packaging of VVC access units and the reverse filter.

'vvc1' keeps parameter sets only in the sample entry; 'vvc2' keeps them
in-band and duplicates them in the configuration record, mirroring the
avc1/avc3 convention.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .au import AccessUnit, video_timescale
from .boxes import Box, FullBoxReader, find_boxes, full_box, read_box_tree, write_box_tree
from .errors import (CorruptSampleTable, MissingParameterSets, NoIrapStart,
                     NoVvcTrack, OversizedNal, SizeOverflow)
from .nal import PARAMETER_SET_TYPES, NalType, NalUnit, START_CODE_4
from .sps import SpsSummary, parse_sps_summary
from .nal import remove_emulation_prevention
from .vvcconfig import VvcConfigRecord, config_from_parameter_sets, parse_vvcc

MVHD_TIMESCALE = 1000
VIDEO_TRACK_ID = 1
AUDIO_TRACK_ID = 2


@dataclass
class Sample:
    data: bytes
    duration: int
    sync: bool
    composition_offset: int = 0


@dataclass
class TrackModel:
    timescale: int
    samples: list[Sample]
    sample_entry: bytes  # complete stsd entry box bytes
    handler: bytes = b"vide"
    track_id: int = VIDEO_TRACK_ID
    width: int = 0
    height: int = 0

    @property
    def duration(self) -> int:
        return sum(s.duration for s in self.samples)


@dataclass
class AudioTrack:
    """Opaque audio: a prebuilt sample entry plus timed payloads."""

    timescale: int
    sample_entry: bytes
    samples: list[tuple[int, bytes]]  # (duration_ticks, data)


def collect_parameter_sets(aus: list[AccessUnit]) -> dict[int, list[bytes]]:
    """Unique VPS/SPS/PPS bodies (header + ebsp) in stream order."""
    found: dict[int, list[bytes]] = {int(NalType.VPS): [], int(NalType.SPS): [], int(NalType.PPS): []}
    for au in aus:
        for nal in au.nals:
            if nal.nal_unit_type in PARAMETER_SET_TYPES:
                body = nal.body()
                bucket = found[nal.nal_unit_type]
                if body not in bucket:
                    bucket.append(body)
    return found


def stream_properties(aus: list[AccessUnit]) -> SpsSummary:
    for au in aus:
        for nal in au.nals:
            if nal.nal_unit_type == NalType.SPS:
                return parse_sps_summary(remove_emulation_prevention(nal.ebsp))
    raise MissingParameterSets("no SPS in stream")


def build_config_record(aus: list[AccessUnit], fps: Fraction | None = None) -> tuple[VvcConfigRecord, SpsSummary]:
    psets = collect_parameter_sets(aus)
    if not psets[int(NalType.SPS)] or not psets[int(NalType.PPS)]:
        raise MissingParameterSets("stream carries no SPS/PPS before the first sample")
    sps = stream_properties(aus)
    avg_rate = 0
    if fps is not None:
        avg_rate = min(int(round(float(fps) * 256)), 0xFFFF)
    rec = config_from_parameter_sets(
        width=sps.width_luma, height=sps.height_luma,
        profile_idc=sps.profile_idc, tier=sps.tier, level_idc=sps.level_idc,
        chroma_format_idc=sps.chroma_format_idc, bit_depth=sps.bit_depth,
        vps=psets[int(NalType.VPS)], sps=psets[int(NalType.SPS)], pps=psets[int(NalType.PPS)],
        avg_frame_rate=avg_rate,
    )
    return rec, sps


def au_to_sample(au: AccessUnit, mode: str, length_size: int = 4) -> bytes:
    """Length-prefix the AU's NALs; vvc1 drops parameter sets from the sample."""
    out = bytearray()
    limit = (1 << (8 * length_size)) - 1
    for nal in au.nals:
        if mode == "vvc1" and nal.nal_unit_type in PARAMETER_SET_TYPES:
            continue
        body = nal.body()
        if len(body) > limit:
            raise OversizedNal(f"NAL of {len(body)} bytes exceeds {length_size}-byte length field")
        out += len(body).to_bytes(length_size, "big")
        out += body
    return bytes(out)


def video_sample_entry(mode: str, width: int, height: int, config: VvcConfigRecord) -> bytes:
    body = bytearray()
    body += bytes(6)                               # reserved
    body += (1).to_bytes(2, "big")                 # data_reference_index
    body += bytes(2) + bytes(2) + bytes(12)        # pre_defined / reserved
    body += width.to_bytes(2, "big")
    body += height.to_bytes(2, "big")
    body += (0x00480000).to_bytes(4, "big")        # 72 dpi horiz
    body += (0x00480000).to_bytes(4, "big")        # 72 dpi vert
    body += bytes(4)                               # reserved
    body += (1).to_bytes(2, "big")                 # frame_count
    body += bytes(32)                              # compressorname
    body += (0x0018).to_bytes(2, "big")            # depth
    body += (0xFFFF).to_bytes(2, "big")            # pre_defined = -1
    vvcc = Box.leaf(b"vvcC", config.to_bytes()).to_bytes()
    body += vvcc
    fourcc = mode.encode("ascii")
    return (8 + len(body)).to_bytes(4, "big") + fourcc + bytes(body)


def _mvhd(duration_mvhd: int) -> Box:
    b = bytearray()
    b += bytes(8)                                  # creation / modification time
    b += MVHD_TIMESCALE.to_bytes(4, "big")
    b += duration_mvhd.to_bytes(4, "big")
    b += (0x00010000).to_bytes(4, "big")           # rate 1.0
    b += (0x0100).to_bytes(2, "big")               # volume 1.0
    b += bytes(10)                                 # reserved
    b += _unity_matrix()
    b += bytes(24)                                 # pre_defined
    b += (AUDIO_TRACK_ID + 1).to_bytes(4, "big")   # next_track_ID
    return full_box(b"mvhd", 0, 0, bytes(b))


def _unity_matrix() -> bytes:
    m = bytearray()
    for v in (0x00010000, 0, 0, 0, 0x00010000, 0, 0, 0, 0x40000000):
        m += v.to_bytes(4, "big")
    return bytes(m)


def _tkhd(track: TrackModel, duration_mvhd: int) -> Box:
    b = bytearray()
    b += bytes(8)
    b += track.track_id.to_bytes(4, "big")
    b += bytes(4)                                  # reserved
    b += duration_mvhd.to_bytes(4, "big")
    b += bytes(8)                                  # reserved
    b += bytes(2)                                  # layer
    b += bytes(2)                                  # alternate_group
    b += ((0x0100 if track.handler == b"soun" else 0).to_bytes(2, "big"))  # volume
    b += bytes(2)                                  # reserved
    b += _unity_matrix()
    b += (track.width << 16).to_bytes(4, "big")
    b += (track.height << 16).to_bytes(4, "big")
    return full_box(b"tkhd", 0, 7, bytes(b))       # flags: enabled | in movie | in preview


def _mdhd(track: TrackModel, duration: int) -> Box:
    b = bytearray()
    b += bytes(8)
    b += track.timescale.to_bytes(4, "big")
    b += duration.to_bytes(4, "big")
    b += (0x55C4).to_bytes(2, "big")               # language 'und'
    b += bytes(2)
    return full_box(b"mdhd", 0, 0, bytes(b))


def _hdlr(handler: bytes) -> Box:
    name = b"VideoHandler\x00" if handler == b"vide" else b"SoundHandler\x00"
    return full_box(b"hdlr", 0, 0, bytes(4) + handler + bytes(12) + name)


def _dinf() -> Box:
    url = full_box(b"url ", 0, 1, b"")             # self-contained
    dref = full_box(b"dref", 0, 0, (1).to_bytes(4, "big") + url.to_bytes())
    return Box.wrap(b"dinf", [dref])


def _stsd(entry: bytes) -> Box:
    return full_box(b"stsd", 0, 0, (1).to_bytes(4, "big") + entry)


def _stts(samples: list[Sample]) -> Box:
    runs: list[tuple[int, int]] = []
    for s in samples:
        if runs and runs[-1][1] == s.duration:
            runs[-1] = (runs[-1][0] + 1, s.duration)
        else:
            runs.append((1, s.duration))
    b = bytearray(len(runs).to_bytes(4, "big"))
    for count, delta in runs:
        b += count.to_bytes(4, "big") + delta.to_bytes(4, "big")
    return full_box(b"stts", 0, 0, bytes(b))


def _stsc() -> Box:
    # one sample per chunk throughout
    body = (1).to_bytes(4, "big") + (1).to_bytes(4, "big") + (1).to_bytes(4, "big") + (1).to_bytes(4, "big")
    return full_box(b"stsc", 0, 0, body)


def _stsz(samples: list[Sample]) -> Box:
    b = bytearray()
    b += (0).to_bytes(4, "big")                    # per-sample sizes
    b += len(samples).to_bytes(4, "big")
    for s in samples:
        b += len(s.data).to_bytes(4, "big")
    return full_box(b"stsz", 0, 0, bytes(b))


def _stco(offsets: list[int]) -> Box:
    for off in offsets:
        if off > 0xFFFFFFFF:
            raise SizeOverflow("chunk offset exceeds 32 bits")
    b = bytearray(len(offsets).to_bytes(4, "big"))
    for off in offsets:
        b += off.to_bytes(4, "big")
    return full_box(b"stco", 0, 0, bytes(b))


def _stss(samples: list[Sample]) -> Box:
    syncs = [i + 1 for i, s in enumerate(samples) if s.sync]
    b = bytearray(len(syncs).to_bytes(4, "big"))
    for n in syncs:
        b += n.to_bytes(4, "big")
    return full_box(b"stss", 0, 0, bytes(b))


def _ctts(samples: list[Sample]) -> Box | None:
    if all(s.composition_offset == 0 for s in samples):
        return None
    runs: list[tuple[int, int]] = []
    for s in samples:
        if runs and runs[-1][1] == s.composition_offset:
            runs[-1] = (runs[-1][0] + 1, s.composition_offset)
        else:
            runs.append((1, s.composition_offset))
    b = bytearray(len(runs).to_bytes(4, "big"))
    for count, off in runs:
        b += count.to_bytes(4, "big") + off.to_bytes(4, "big", signed=True)
    return full_box(b"ctts", 1, 0, bytes(b))


def _stbl(track: TrackModel, offsets: list[int], with_stss: bool) -> Box:
    children = [_stsd(track.sample_entry), _stts(track.samples), _stsc(), _stsz(track.samples), _stco(offsets)]
    ctts = _ctts(track.samples)
    if ctts is not None:
        children.insert(2, ctts)
    if with_stss:
        children.append(_stss(track.samples))
    return Box.wrap(b"stbl", children)


def _media_header(track: TrackModel) -> Box:
    if track.handler == b"vide":
        return full_box(b"vmhd", 0, 1, bytes(8))
    return full_box(b"smhd", 0, 0, bytes(4))


def _trak(track: TrackModel, offsets: list[int], duration_mvhd: int, with_stss: bool) -> Box:
    minf = Box.wrap(b"minf", [_media_header(track), _dinf(), _stbl(track, offsets, with_stss)])
    mdia = Box.wrap(b"mdia", [_mdhd(track, track.duration), _hdlr(track.handler), minf])
    return Box.wrap(b"trak", [_tkhd(track, duration_mvhd), mdia])


def _ftyp() -> Box:
    return Box.leaf(b"ftyp", b"isom" + (0x200).to_bytes(4, "big") + b"isomiso2mp41")


def mvhd_duration(tracks: list[TrackModel]) -> int:
    dur = 0
    for t in tracks:
        dur = max(dur, -(-t.duration * MVHD_TIMESCALE // t.timescale))
    return dur


def package_progressive(aus: list[AccessUnit], fps: Fraction, mode: str = "vvc1",
                        audio: AudioTrack | None = None) -> bytes:
    """Emit ftyp/moov/mdat with the AUs as length-prefixed samples."""
    if mode not in ("vvc1", "vvc2"):
        raise ValueError(f"unknown sample entry mode {mode!r}")
    if not aus:
        raise NoIrapStart("empty access unit list")
    if not aus[0].is_irap:
        raise NoIrapStart("first access unit is not an IRAP picture")
    config, sps = build_config_record(aus, fps)
    timescale, frame_ticks = video_timescale(fps)
    entry = video_sample_entry(mode, sps.width_luma, sps.height_luma, config)

    vsamples = []
    for i, au in enumerate(aus):
        dur = frame_ticks
        if au.dts_ticks is not None and i + 1 < len(aus) and aus[i + 1].dts_ticks is not None:
            dur = aus[i + 1].dts_ticks - au.dts_ticks
        vsamples.append(Sample(data=au_to_sample(au, mode), duration=dur, sync=au.is_irap))
    tracks = [TrackModel(timescale=timescale, samples=vsamples, sample_entry=entry,
                         width=sps.width_luma, height=sps.height_luma)]
    if audio is not None:
        asamples = [Sample(data=data, duration=dur, sync=True) for dur, data in audio.samples]
        tracks.append(TrackModel(timescale=audio.timescale, samples=asamples,
                                 sample_entry=audio.sample_entry, handler=b"soun",
                                 track_id=AUDIO_TRACK_ID))

    ftyp = _ftyp()
    dur_mvhd = mvhd_duration(tracks)

    def build_moov(bases: list[int]) -> Box:
        traks = []
        for t, base in zip(tracks, bases):
            offsets = []
            off = base
            for s in t.samples:
                offsets.append(off)
                off += len(s.data)
            traks.append(_trak(t, offsets, dur_mvhd, with_stss=(t.handler == b"vide")))
        return Box.wrap(b"moov", [_mvhd(dur_mvhd)] + traks)

    moov = build_moov([0] * len(tracks))
    mdat_payload_start = ftyp.size + moov.size + 8
    bases = []
    off = mdat_payload_start
    for t in tracks:
        bases.append(off)
        off += sum(len(s.data) for s in t.samples)
    moov = build_moov(bases)
    mdat_body = b"".join(s.data for t in tracks for s in t.samples)
    mdat = Box.leaf(b"mdat", mdat_body)
    return write_box_tree([ftyp, moov, mdat])


# --- reading back ---

@dataclass
class VvcTrackInfo:
    config: VvcConfigRecord
    timescale: int
    sample_ranges: list[tuple[int, int]]  # absolute (offset, size)
    sync_samples: set[int]                # 1-based
    durations: list[int]
    mode: str


def _expand_sample_table(trak: Box, file_len: int) -> tuple[list[tuple[int, int]], list[int]]:
    stbl = trak.find("mdia.minf.stbl")
    if stbl is None:
        raise CorruptSampleTable("trak without sample table")
    stsz = stbl.find("stsz")
    stsc = stbl.find("stsc")
    stco = stbl.find("stco") or stbl.find("co64")
    stts = stbl.find("stts")
    if stsz is None or stsc is None or stco is None or stts is None:
        raise CorruptSampleTable("missing mandatory sample table box")

    r = FullBoxReader(stsz)
    fixed = r.u(4)
    count = r.u(4)
    sizes = [fixed] * count if fixed else [r.u(4) for _ in range(count)]

    r = FullBoxReader(stco)
    entry_len = 8 if stco.fourcc == b"co64" else 4
    n_chunks = r.u(4)
    chunk_offsets = [r.u(entry_len) for _ in range(n_chunks)]

    r = FullBoxReader(stsc)
    n_runs = r.u(4)
    runs = [(r.u(4), r.u(4), r.u(4)) for _ in range(n_runs)]  # first_chunk, spc, sdi

    ranges: list[tuple[int, int]] = []
    sample = 0
    for i, (first_chunk, spc, _sdi) in enumerate(runs):
        last_chunk = runs[i + 1][0] - 1 if i + 1 < len(runs) else n_chunks
        for chunk in range(first_chunk, last_chunk + 1):
            if chunk > n_chunks:
                break
            off = chunk_offsets[chunk - 1]
            for _ in range(spc):
                if sample >= count:
                    break
                ranges.append((off, sizes[sample]))
                off += sizes[sample]
                sample += 1
    if sample != count:
        raise CorruptSampleTable(f"sample tables describe {sample} of {count} samples")
    for off, size in ranges:
        if off + size > file_len:
            raise CorruptSampleTable(f"sample range {off}+{size} exceeds file of {file_len} bytes")

    r = FullBoxReader(stts)
    n = r.u(4)
    durations: list[int] = []
    for _ in range(n):
        cnt, delta = r.u(4), r.u(4)
        durations.extend([delta] * cnt)
    return ranges, durations


def find_vvc_track(data: bytes) -> VvcTrackInfo:
    tree = read_box_tree(data)
    for trak in find_boxes(tree, "moov.trak"):
        stsd = trak.find("mdia.minf.stbl.stsd")
        if stsd is None or len(stsd.payload) < 16:
            continue
        entry_fourcc = stsd.payload[12:16]
        if entry_fourcc not in (b"vvc1", b"vvc2"):
            continue
        entries = read_box_tree(stsd.payload[8:])
        entry = entries[0]
        vvcc_payload = None
        inner = read_box_tree(entry.payload[78:])  # skip VisualSampleEntry fields
        for child in inner:
            if child.fourcc == b"vvcC":
                vvcc_payload = child.payload
        if vvcc_payload is None:
            raise NoVvcTrack("vvc sample entry without vvcC")
        config = parse_vvcc(vvcc_payload)

        mdhd = trak.find("mdia.mdhd")
        rr = FullBoxReader(mdhd)
        if rr.version == 1:
            rr.raw(16)
            timescale = rr.u(4)
        else:
            rr.raw(8)
            timescale = rr.u(4)

        ranges, durations = _expand_sample_table(trak, len(data))
        syncs: set[int] = set()
        stss = trak.find("mdia.minf.stbl.stss")
        if stss is not None:
            r = FullBoxReader(stss)
            n = r.u(4)
            syncs = {r.u(4) for _ in range(n)}
        else:
            syncs = set(range(1, len(ranges) + 1))
        return VvcTrackInfo(config=config, timescale=timescale, sample_ranges=ranges,
                            sync_samples=syncs, durations=durations,
                            mode=entry_fourcc.decode("ascii"))
    raise NoVvcTrack("no vvc1/vvc2 sample entry in file")


def split_length_prefixed(sample: bytes, length_size: int) -> list[bytes]:
    nals = []
    off = 0
    while off < len(sample):
        if off + length_size > len(sample):
            raise CorruptSampleTable("sample ends inside a NAL length field")
        ln = int.from_bytes(sample[off:off + length_size], "big")
        off += length_size
        if off + ln > len(sample):
            raise CorruptSampleTable("NAL length exceeds sample")
        nals.append(sample[off:off + ln])
        off += ln
    return nals


def extract_annex_b(data: bytes) -> bytes:
    """MP4-to-AnnexB filter: 4-byte start codes, parameter sets re-injected
    before the first and every sync sample for out-of-band tracks."""
    info = find_vvc_track(data)
    psets = b"".join(
        START_CODE_4 + nal
        for arr in info.config.param_set_arrays
        for nal in arr.nals
    )
    out = bytearray()
    for i, (off, size) in enumerate(info.sample_ranges):
        if info.mode == "vvc1" and (i == 0 or (i + 1) in info.sync_samples):
            out += psets
        for body in split_length_prefixed(data[off:off + size], info.config.length_size):
            out += START_CODE_4
            out += body
    return bytes(out)
