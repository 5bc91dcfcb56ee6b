import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

from vvcbox.errors import VvcBoxError
from vvcbox.fmp4 import collect_fragment_samples
from vvcbox.mp4 import package_progressive
from vvcbox.mpd import expand_template
from vvcbox.packaging import load_elementary_stream, package_presentation
from vvcbox.synth import StreamSpec, make_stream
from vvcbox.ts import mux_ts

from conftest import FPS25, timed_stream

NS = {"d": "urn:mpeg:dash:schema:mpd:2011"}


@pytest.fixture()
def es200():
    return make_stream(StreamSpec(frames=200, idr_period=50, repeat_parameter_sets=True))


def test_ondemand_exactly_two_files(tmp_path, es200):
    result = package_presentation(es200, tmp_path / "vod.mpd", profile="ondemand")
    assert sorted(p.name for p in result.files) == ["vod.mp4", "vod.mpd"]
    assert sorted(p.name for p in tmp_path.iterdir()) == ["vod.mp4", "vod.mpd"]
    root = ET.parse(tmp_path / "vod.mpd").getroot()
    # declared ranges point at real bytes
    sb = root.find(".//d:SegmentBase", NS)
    lo, hi = map(int, sb.get("indexRange").split("-"))
    blob = (tmp_path / "vod.mp4").read_bytes()
    assert blob[lo + 4:lo + 8] == b"sidx"
    assert hi < len(blob)


def test_live_run_file_count(tmp_path, es200):
    result = package_presentation(es200, tmp_path / "live.mpd", profile="live")
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["init.mp4", "live.mpd", "seg_1.m4s", "seg_2.m4s", "seg_3.m4s", "seg_4.m4s"]
    assert len(result.files) == 4 + 2


def test_dual_adds_two_playlists(tmp_path, es200):
    result = package_presentation(es200, tmp_path / "live.mpd", profile="live", outputs="dual")
    names = sorted(p.name for p in tmp_path.iterdir())
    assert "live.m3u8" in names and "live_media.m3u8" in names
    assert len(names) == 4 + 2 + 2
    media = (tmp_path / "live_media.m3u8").read_text()
    assert media.count("#EXTINF") == 4


def test_template_expansion_resolves_every_file(tmp_path, es200):
    package_presentation(es200, tmp_path / "live.mpd", profile="live", use_timeline=True)
    root = ET.parse(tmp_path / "live.mpd").getroot()
    st = root.find(".//d:SegmentTemplate", NS)
    init = st.get("initialization")
    assert (tmp_path / init).is_file()
    rows = [(int(s.get("d")), int(s.get("r", "0"))) for s in root.findall(".//d:S", NS)]
    count = sum(r + 1 for _d, r in rows)
    for n in range(1, count + 1):
        assert (tmp_path / expand_template(st.get("media"), n)).is_file()
    assert not (tmp_path / expand_template(st.get("media"), count + 1)).exists()


def test_every_segment_opens_with_sync_sample(tmp_path, es200):
    package_presentation(es200, tmp_path / "live.mpd", profile="live")
    for seg in sorted(tmp_path.glob("seg_*.m4s")):
        samples = collect_fragment_samples(seg.read_bytes())
        assert samples[0][2] is True


def test_vvc1_segments_decodable_from_init_only(tmp_path, es200):
    package_presentation(es200, tmp_path / "live.mpd", profile="live", mode="vvc1")
    init = (tmp_path / "init.mp4").read_bytes()
    assert b"vvcC" in init
    # parameter sets live in the init, not the media segments
    seg = (tmp_path / "seg_1.m4s").read_bytes()
    samples = collect_fragment_samples(seg)
    for data, _dur, _sync in samples:
        pos = 0
        while pos < len(data):
            ln = int.from_bytes(data[pos:pos + 4], "big")
            nut = (data[pos + 5] >> 3) & 0x1F
            assert nut not in (14, 15, 16)
            pos += 4 + ln


def test_duration_conservation(tmp_path, es200):
    result = package_presentation(es200, tmp_path / "live.mpd", profile="live")
    assert result.plan.total_duration_ticks == 200 * 1000


def test_mp4_input_accepted(tmp_path):
    es, aus, _ = timed_stream(StreamSpec(frames=100, idr_period=50, repeat_parameter_sets=True))
    mp4 = package_progressive(aus, FPS25, "vvc2")
    result = package_presentation(mp4, tmp_path / "vod.mpd", profile="ondemand")
    assert (tmp_path / "vod.mpd").is_file()
    assert len(result.plan.segments) == 2


def test_ts_input_accepted(tmp_path):
    es, aus, timescale = timed_stream(StreamSpec(frames=100, idr_period=50,
                                                 repeat_parameter_sets=True))
    ts = mux_ts(aus, timescale, rate_bps=4_000_000)
    assert load_elementary_stream(ts) == es
    result = package_presentation(ts, tmp_path / "vod.mpd", profile="ondemand")
    assert len(result.plan.segments) == 2


def test_unknown_input_rejected(tmp_path):
    with pytest.raises(VvcBoxError):
        package_presentation(b"garbage input", tmp_path / "x.mpd")


def test_hls_only_output(tmp_path, es200):
    result = package_presentation(es200, tmp_path / "master.m3u8", profile="live", outputs="hls")
    names = sorted(p.name for p in tmp_path.iterdir())
    assert "master.m3u8" in names and "master_media.m3u8" in names
    assert result.mpd_path is None
    assert not [n for n in names if n.endswith(".mpd")]


def test_ondemand_plus_hls_rejected(tmp_path, es200):
    with pytest.raises(VvcBoxError):
        package_presentation(es200, tmp_path / "vod.mpd", profile="ondemand", outputs="dual")


def test_bandwidth_declared(tmp_path, es200):
    result = package_presentation(es200, tmp_path / "live.mpd", profile="live")
    root = ET.parse(tmp_path / "live.mpd").getroot()
    bw = int(root.find(".//d:Representation", NS).get("bandwidth"))
    media_bytes = sum((tmp_path / f"seg_{i}.m4s").stat().st_size for i in range(1, 5))
    assert bw == -(-media_bytes * 8 // 8)  # ceil(bits / 8 s)
