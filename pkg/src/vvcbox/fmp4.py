"""Fragmented MP4 output for DASH/HLS: init segment, moof/mdat media
segments, onDemand self-indexing via sidx."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .au import AccessUnit, video_timescale
from .boxes import Box, FullBoxReader, find_boxes, full_box, read_box_tree, write_box_tree
from .errors import BoundaryNotIrap, CorruptSampleTable
from .mp4 import (Sample, TrackModel, VIDEO_TRACK_ID, _dinf, _ftyp, _hdlr,
                  _media_header, _mdhd, _mvhd, _stsd, _tkhd, au_to_sample,
                  build_config_record, mvhd_duration, video_sample_entry)
from .segmenting import SegmentPlan

SYNC_FLAGS = 0x02000000      # depends-on none, sync sample
NON_SYNC_FLAGS = 0x01010000  # depends-on other, non-sync


@dataclass
class SidxEntry:
    referenced_size: int
    subsegment_duration: int
    sap_type: int = 1


@dataclass
class FragmentedPresentation:
    init: bytes
    segments: list[bytes]
    sidx_entries: list[SidxEntry]
    timescale: int
    earliest_pts: int

    def sidx_bytes(self) -> bytes:
        return build_sidx(self.timescale, self.earliest_pts, self.sidx_entries)

    def ondemand_file(self) -> bytes:
        return self.init + self.sidx_bytes() + b"".join(self.segments)

    def index_range(self) -> tuple[int, int]:
        start = len(self.init)
        return start, start + len(self.sidx_bytes()) - 1


def _empty_stbl(sample_entry: bytes) -> Box:
    zero32 = (0).to_bytes(4, "big")
    return Box.wrap(b"stbl", [
        _stsd(sample_entry),
        full_box(b"stts", 0, 0, zero32),
        full_box(b"stsc", 0, 0, zero32),
        full_box(b"stsz", 0, 0, zero32 + zero32),
        full_box(b"stco", 0, 0, zero32),
    ])


def _trex(track_id: int) -> Box:
    b = bytearray()
    b += track_id.to_bytes(4, "big")
    b += (1).to_bytes(4, "big")   # default_sample_description_index
    b += (0).to_bytes(4, "big")   # default_sample_duration
    b += (0).to_bytes(4, "big")   # default_sample_size
    b += (0).to_bytes(4, "big")   # default_sample_flags
    return full_box(b"trex", 0, 0, bytes(b))


def _ftyp_fragmented() -> Box:
    return Box.leaf(b"ftyp", b"isom" + (0x200).to_bytes(4, "big") + b"isomiso2iso6mp41")


def _styp() -> Box:
    return Box.leaf(b"styp", b"msdh" + (0).to_bytes(4, "big") + b"msdhmsix")


def build_init_segment(track: TrackModel) -> bytes:
    minf = Box.wrap(b"minf", [_media_header(track), _dinf(), _empty_stbl(track.sample_entry)])
    mdia = Box.wrap(b"mdia", [_mdhd_zero(track), _hdlr(track.handler), minf])
    trak = Box.wrap(b"trak", [_tkhd(track, 0), mdia])
    mvex = Box.wrap(b"mvex", [_trex(track.track_id)])
    moov = Box.wrap(b"moov", [_mvhd(0), trak, mvex])
    return write_box_tree([_ftyp_fragmented(), moov])


def _mdhd_zero(track: TrackModel) -> Box:
    b = bytearray()
    b += bytes(8)
    b += track.timescale.to_bytes(4, "big")
    b += (0).to_bytes(4, "big")
    b += (0x55C4).to_bytes(2, "big")
    b += bytes(2)
    return full_box(b"mdhd", 0, 0, bytes(b))


def build_media_segment(samples: list[Sample], sequence_number: int, base_decode_time: int,
                        track_id: int = VIDEO_TRACK_ID) -> bytes:
    mfhd = full_box(b"mfhd", 0, 0, sequence_number.to_bytes(4, "big"))
    # tfhd: default-base-is-moof
    tfhd = full_box(b"tfhd", 0, 0x020000, track_id.to_bytes(4, "big"))
    tfdt = full_box(b"tfdt", 1, 0, base_decode_time.to_bytes(8, "big"))

    # moof size is known up front: mfhd 16, tfhd 16, tfdt 20, trun 20 + 12n
    moof_size = 8 + 16 + (8 + 16 + 20 + 20 + 12 * len(samples))
    data_offset = moof_size + 8  # first payload byte inside mdat

    trun_body = bytearray()
    trun_body += len(samples).to_bytes(4, "big")
    trun_body += data_offset.to_bytes(4, "big", signed=True)
    for s in samples:
        trun_body += s.duration.to_bytes(4, "big")
        trun_body += len(s.data).to_bytes(4, "big")
        trun_body += (SYNC_FLAGS if s.sync else NON_SYNC_FLAGS).to_bytes(4, "big")
    trun = full_box(b"trun", 0, 0x000701, bytes(trun_body))  # offset|duration|size|flags

    traf = Box.wrap(b"traf", [tfhd, tfdt, trun])
    moof = Box.wrap(b"moof", [mfhd, traf])
    assert moof.size == moof_size
    mdat = Box.leaf(b"mdat", b"".join(s.data for s in samples))
    return _styp().to_bytes() + moof.to_bytes() + mdat.to_bytes()


def fragment(aus: list[AccessUnit], plan: SegmentPlan, fps: Fraction, mode: str = "vvc1") -> FragmentedPresentation:
    """Cut IRAP-aligned fragments per the plan; returns init + media segments."""
    config, sps = build_config_record(aus, fps)
    timescale, frame_ticks = video_timescale(fps)
    entry = video_sample_entry(mode, sps.width_luma, sps.height_luma, config)

    all_samples: list[Sample] = []
    for i, au in enumerate(aus):
        dur = frame_ticks
        if au.dts_ticks is not None and i + 1 < len(aus) and aus[i + 1].dts_ticks is not None:
            dur = aus[i + 1].dts_ticks - au.dts_ticks
        all_samples.append(Sample(data=au_to_sample(au, mode), duration=dur, sync=au.is_irap))

    track = TrackModel(timescale=timescale, samples=all_samples, sample_entry=entry,
                       width=sps.width_luma, height=sps.height_luma)
    init = build_init_segment(track)

    segments: list[bytes] = []
    entries: list[SidxEntry] = []
    decode_time = 0
    for k, seg in enumerate(plan.segments):
        first_au = aus[seg.first_au_index]
        if not first_au.is_irap:
            raise BoundaryNotIrap(f"segment {k + 1} starts at AU {seg.first_au_index} which is not IRAP")
        chunk = all_samples[seg.first_au_index:seg.first_au_index + seg.au_count]
        data = build_media_segment(chunk, sequence_number=k + 1, base_decode_time=decode_time)
        sap_type = 1 if first_au.is_idr else 3
        entries.append(SidxEntry(referenced_size=len(data),
                                 subsegment_duration=sum(s.duration for s in chunk),
                                 sap_type=sap_type))
        segments.append(data)
        decode_time += sum(s.duration for s in chunk)

    return FragmentedPresentation(init=init, segments=segments, sidx_entries=entries,
                                  timescale=timescale,
                                  earliest_pts=plan.segments[0].earliest_pts_ticks if plan.segments else 0)


def build_sidx(timescale: int, earliest_pts: int, entries: list[SidxEntry],
               reference_id: int = VIDEO_TRACK_ID, first_offset: int = 0) -> bytes:
    b = bytearray()
    b += reference_id.to_bytes(4, "big")
    b += timescale.to_bytes(4, "big")
    b += earliest_pts.to_bytes(4, "big")
    b += first_offset.to_bytes(4, "big")
    b += bytes(2)
    b += len(entries).to_bytes(2, "big")
    for e in entries:
        b += e.referenced_size.to_bytes(4, "big")  # reference_type 0 | size
        b += e.subsegment_duration.to_bytes(4, "big")
        b += ((1 << 31) | (e.sap_type << 28)).to_bytes(4, "big")  # starts_with_SAP
    return full_box(b"sidx", 0, 0, bytes(b)).to_bytes()


def parse_sidx(data: bytes) -> tuple[int, int, list[SidxEntry]]:
    """Returns (timescale, earliest_pts, entries) from a standalone sidx box."""
    tree = read_box_tree(data)
    sidx = next(b for b in tree if b.fourcc == b"sidx")
    r = FullBoxReader(sidx)
    r.u(4)  # reference_ID
    timescale = r.u(4)
    if r.version == 0:
        earliest = r.u(4)
        r.u(4)
    else:
        earliest = r.u(8)
        r.u(8)
    r.u(2)
    count = r.u(2)
    entries = []
    for _ in range(count):
        size = r.u(4) & 0x7FFFFFFF
        dur = r.u(4)
        sap = (r.u(4) >> 28) & 0x7
        entries.append(SidxEntry(referenced_size=size, subsegment_duration=dur, sap_type=sap))
    return timescale, earliest, entries


def collect_fragment_samples(data: bytes) -> list[tuple[bytes, int, bool]]:
    """(payload, duration, sync) for every sample across all moof/mdat pairs.

    Accepts an init+segments concatenation or a single media segment.
    """
    tree = read_box_tree(data)
    out: list[tuple[bytes, int, bool]] = []
    # absolute offset of each top-level box, straight from the size fields
    offsets: list[int] = []
    off = 0
    while off < len(data):
        offsets.append(off)
        declared = int.from_bytes(data[off:off + 4], "big")
        if declared == 1:
            declared = int.from_bytes(data[off + 8:off + 16], "big")
        elif declared == 0:
            declared = len(data) - off
        off += declared
    for idx, box in enumerate(tree):
        if box.fourcc != b"moof":
            continue
        moof_start = offsets[idx]
        traf = box.find("traf")
        trun = traf.find("trun")
        tfhd = traf.find("tfhd")
        r = FullBoxReader(trun)
        flags = r.flags
        count = r.u(4)
        data_off = r.u(4) if flags & 0x1 else None
        if flags & 0x4:
            r.u(4)  # first_sample_flags
        samples = []
        for _ in range(count):
            dur = r.u(4) if flags & 0x100 else 0
            size = r.u(4) if flags & 0x200 else 0
            sflags = r.u(4) if flags & 0x400 else 0
            if flags & 0x800:
                r.u(4)
            samples.append((dur, size, sflags))
        base = moof_start if FullBoxReader(tfhd).flags & 0x020000 else 0
        if data_off is None:
            raise CorruptSampleTable("trun without data offset")
        pos = base + data_off
        for dur, size, sflags in samples:
            if pos + size > len(data):
                raise CorruptSampleTable("trun sample range exceeds input")
            sync = (sflags & 0x00010000) == 0  # sample_is_non_sync_sample bit clear
            out.append((data[pos:pos + size], dur, sync))
            pos += size
    return out


def shift_segment(segment: bytes, new_sequence: int, tfdt_delta: int) -> bytes:
    """Rewrite mfhd sequence number and shift tfdt; used when looping a
    finished presentation as an endless live stream."""
    tree = read_box_tree(segment)
    for box in tree:
        if box.fourcc != b"moof":
            continue
        for child in box.children:
            if child.fourcc == b"mfhd":
                child.payload = child.payload[:4] + new_sequence.to_bytes(4, "big")
        traf = box.find("traf")
        if traf is not None:
            for child in traf.children:
                if child.fourcc == b"tfdt":
                    r = FullBoxReader(child)
                    old = r.u(8 if r.version == 1 else 4)
                    new = old + tfdt_delta
                    if r.version == 1:
                        child.payload = child.payload[:4] + new.to_bytes(8, "big")
                    else:
                        child.payload = child.payload[:4] + new.to_bytes(4, "big")
    return write_box_tree(tree)
