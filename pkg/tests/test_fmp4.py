import pytest

from vvcbox.boxes import find_box, read_box_tree
from vvcbox.errors import BoundaryNotIrap
from vvcbox.fmp4 import (build_sidx, collect_fragment_samples, fragment,
                         parse_sidx, shift_segment)
from vvcbox.mp4 import find_vvc_track, package_progressive
from vvcbox.segmenting import plan_segments
from vvcbox.synth import StreamSpec

from conftest import FPS25, timed_stream


def _fragmented(spec=None, mode="vvc1"):
    es, aus, timescale = timed_stream(spec or StreamSpec(frames=100, idr_period=50))
    plan = plan_segments(aus, 2000, timescale)
    return aus, plan, fragment(aus, plan, FPS25, mode)


def test_sequence_numbers_and_tfdt_accumulate():
    aus, plan, frag = _fragmented()
    assert len(frag.segments) == 2
    for k, seg in enumerate(frag.segments):
        tree = read_box_tree(seg)
        mfhd = find_box(tree, "moof.mfhd")
        assert int.from_bytes(mfhd.payload[4:8], "big") == k + 1
        tfdt = find_box(tree, "moof.traf.tfdt")
        assert int.from_bytes(tfdt.payload[4:12], "big") == k * 50000


def test_sidx_sizes_match_emitted_segments():
    aus, plan, frag = _fragmented()
    timescale, earliest, entries = parse_sidx(frag.sidx_bytes())
    assert timescale == plan.timescale
    assert earliest == 0
    assert [e.referenced_size for e in entries] == [len(s) for s in frag.segments]
    assert [e.subsegment_duration for e in entries] == [s.duration_ticks for s in plan.segments]
    assert all(e.sap_type == 1 for e in entries)  # IDR starts


def test_concat_recovers_progressive_samples():
    es, aus, timescale = timed_stream(StreamSpec(frames=100, idr_period=50))
    plan = plan_segments(aus, 2000, timescale)
    frag = fragment(aus, plan, FPS25, "vvc2")
    cat = frag.init + b"".join(frag.segments)
    frag_samples = collect_fragment_samples(cat)

    prog = package_progressive(aus, FPS25, "vvc2")
    info = find_vvc_track(prog)
    prog_samples = [prog[off:off + size] for off, size in info.sample_ranges]
    assert [s[0] for s in frag_samples] == prog_samples
    assert [s[1] for s in frag_samples] == info.durations
    assert [i + 1 for i, s in enumerate(frag_samples) if s[2]] == sorted(info.sync_samples)


def test_first_sample_of_each_segment_is_sync():
    aus, plan, frag = _fragmented()
    for seg in frag.segments:
        samples = collect_fragment_samples(seg)
        assert samples[0][2] is True


def test_boundary_not_irap():
    es, aus, timescale = timed_stream(StreamSpec(frames=10, idr_period=5))
    plan = plan_segments(aus, 100, timescale)
    # force a bogus boundary
    bad = plan.segments[1]
    object.__setattr__(bad, "first_au_index", bad.first_au_index + 1)
    with pytest.raises(BoundaryNotIrap):
        fragment(aus, plan, FPS25)


def test_ondemand_file_layout_and_index_range():
    aus, plan, frag = _fragmented()
    blob = frag.ondemand_file()
    start, end = frag.index_range()
    assert blob[start + 4:start + 8] == b"sidx"
    assert end == start + len(frag.sidx_bytes()) - 1
    # byte positions after sidx are exactly the segments
    pos = end + 1
    for seg, entry in zip(frag.segments, frag.sidx_entries):
        assert blob[pos:pos + 4 + 4][4:8] == b"styp"
        pos += entry.referenced_size
    assert pos == len(blob)


def test_init_has_empty_tables_and_mvex():
    aus, plan, frag = _fragmented()
    tree = read_box_tree(frag.init)
    assert find_box(tree, "moov.mvex.trex") is not None
    stsz = find_box(tree, "moov.trak.mdia.minf.stbl.stsz")
    assert int.from_bytes(stsz.payload[8:12], "big") == 0


def test_shift_segment_rewrites_seq_and_tfdt():
    aus, plan, frag = _fragmented()
    shifted = shift_segment(frag.segments[0], new_sequence=9, tfdt_delta=100000)
    tree = read_box_tree(shifted)
    assert int.from_bytes(find_box(tree, "moof.mfhd").payload[4:8], "big") == 9
    assert int.from_bytes(find_box(tree, "moof.traf.tfdt").payload[4:12], "big") == 100000
    # samples untouched
    assert [s[0] for s in collect_fragment_samples(shifted)] == \
           [s[0] for s in collect_fragment_samples(frag.segments[0])]


def test_cra_segment_gets_sap_type_3():
    from vvcbox.nal import NalType, make_nal
    from vvcbox.au import assemble_access_units, assign_timing
    from vvcbox.synth import SpsParams, build_pps_rbsp, build_sps_rbsp, build_ph_rbsp
    import random

    rng = random.Random(1)
    nals = [
        make_nal(NalType.SPS, build_sps_rbsp(SpsParams())),
        make_nal(NalType.PPS, build_pps_rbsp()),
        make_nal(NalType.PH, build_ph_rbsp(rng, True)),
        make_nal(NalType.CRA, b"\x11\x80"),
        make_nal(NalType.PH, build_ph_rbsp(rng, False)),
        make_nal(NalType.TRAIL, b"\x22\x80"),
    ]
    aus = assemble_access_units(nals)
    timescale = assign_timing(aus, FPS25)
    plan = plan_segments(aus, 10, timescale)
    frag = fragment(aus, plan, FPS25, "vvc2")
    assert frag.sidx_entries[0].sap_type == 3
