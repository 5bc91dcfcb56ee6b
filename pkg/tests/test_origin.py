import warnings as _warnings
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

with _warnings.catch_warnings():
    _warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient

from vvcbox.boxes import find_box, read_box_tree
from vvcbox.live import LiveSession, ManualClock, load_presentation
from vvcbox.origin import create_app, parse_range
from vvcbox.packaging import package_presentation
from vvcbox.synth import StreamSpec, make_stream

NS = {"d": "urn:mpeg:dash:schema:mpd:2011"}
START = 1_000_000.0


@pytest.fixture(scope="module")
def live_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("live")
    es = make_stream(StreamSpec(frames=200, idr_period=50, repeat_parameter_sets=True))
    package_presentation(es, root / "live.mpd", profile="live", outputs="dual")
    return root


def _live_client(live_dir, asto=1.9, loop=False):
    plan, reps, init_name, media_template = load_presentation(live_dir, "live.mpd")
    clock = ManualClock(START)
    session = LiveSession(plan=plan, session_start=START, availability_offset_s=asto,
                          loop=loop, manifest_name="live.mpd", init_name=init_name,
                          media_template=media_template, representations=reps)
    app = create_app(live_dir, session, clock)
    return TestClient(app), clock, session


def test_segment_availability_boundary(live_dir):
    client, clock, session = _live_client(live_dir, asto=1.9)
    for k in (1, 2, 3, 4):
        boundary = session.availability_time(k)
        clock.t = boundary - 1e-4
        assert client.get(f"/seg_{k}.m4s").status_code == 404
        clock.t = boundary + 1e-4
        assert client.get(f"/seg_{k}.m4s").status_code == 200
    clock.t = session.availability_time(4) + 1.0
    assert client.get("/seg_99999.m4s").status_code == 404


def test_manifest_regenerates_across_boundary(live_dir):
    client, clock, session = _live_client(live_dir, asto=0.0)

    def published_count():
        root = ET.fromstring(client.get("/live.mpd").text)
        return sum(int(s.get("r", "0")) + 1 for s in root.findall(".//d:S", NS))

    clock.t = START + 2.0
    before = published_count()
    clock.t = START + 4.0
    after = published_count()
    assert after == before + 1
    assert session.pace(clock.t) == after


def test_manifest_never_references_unavailable_segment(live_dir):
    client, clock, _ = _live_client(live_dir, asto=0.0)
    clock.t = START + 5.0
    root = ET.fromstring(client.get("/live.mpd").text)
    st = root.find(".//d:SegmentTemplate", NS)
    start_number = int(st.get("startNumber"))
    count = sum(int(s.get("r", "0")) + 1 for s in root.findall(".//d:S", NS))
    for n in range(start_number, start_number + count):
        assert client.get(f"/seg_{n}.m4s").status_code == 200


def test_loop_reserves_segment_with_shifted_timeline(live_dir):
    client, clock, session = _live_client(live_dir, asto=0.0, loop=True)
    clock.t = START + 8.0 * 2 + 2.0  # two full loops plus one segment? N=4, 8s per loop
    n = session.segment_count
    virtual = n + 1  # first segment of the second loop
    clock.t = session.availability_time(virtual) + 1e-3
    resp = client.get(f"/seg_{virtual}.m4s")
    assert resp.status_code == 200
    tree = read_box_tree(resp.content)
    seq = int.from_bytes(find_box(tree, "moof.mfhd").payload[4:8], "big")
    tfdt = int.from_bytes(find_box(tree, "moof.traf.tfdt").payload[4:12], "big")
    assert seq == virtual
    assert tfdt == session.plan.total_duration_ticks
    # first-loop copy is untouched on disk
    raw = (live_dir / "seg_1.m4s").read_bytes()
    assert int.from_bytes(find_box(read_box_tree(raw), "moof.traf.tfdt").payload[4:12], "big") == 0


def test_static_file_serving_and_content_types(live_dir):
    client, clock, _ = _live_client(live_dir)
    clock.t = START + 100.0
    assert client.get("/init.mp4").headers["content-type"] == "video/mp4"
    assert client.get("/live.mpd").headers["content-type"].startswith("application/dash+xml")
    assert client.get("/live_media.m3u8").headers["content-type"].startswith(
        "application/vnd.apple.mpegurl")
    assert client.get("/nope.bin").status_code == 404


def test_range_request(live_dir):
    client, clock, _ = _live_client(live_dir)
    resp = client.get("/init.mp4", headers={"Range": "bytes=0-7"})
    assert resp.status_code == 206
    assert resp.content[4:8] == b"ftyp"
    size = (live_dir / "init.mp4").stat().st_size
    assert resp.headers["content-range"] == f"bytes 0-7/{size}"
    tail = client.get("/init.mp4", headers={"Range": "bytes=-4"})
    assert tail.status_code == 206 and len(tail.content) == 4
    bad = client.get("/init.mp4", headers={"Range": f"bytes={size + 10}-"})
    assert bad.status_code == 416


def test_path_traversal_rejected(live_dir):
    client, _, _ = _live_client(live_dir)
    resp = client.get("/%2e%2e/%2e%2e/etc/passwd")
    assert resp.status_code in (403, 404)
    resp = client.get("/..%2f..%2fetc%2fpasswd")
    assert resp.status_code in (403, 404)
    # and definitely no file body leaks
    assert b"root:" not in resp.content


def test_status_endpoint(live_dir):
    client, clock, session = _live_client(live_dir, asto=0.0)
    clock.t = START + 4.0
    doc = client.get("/_status").json()
    assert doc["live"] is True
    assert doc["published_segments"] == 2
    assert doc["total_segments"] == 4


def test_static_origin_without_session(tmp_path):
    (tmp_path / "vod.mpd").write_text("<MPD/>")
    app = create_app(tmp_path)
    client = TestClient(app)
    assert client.get("/vod.mpd").status_code == 200
    assert client.get("/_status").json() == {
        "live": False, "manifest": None, "published_segments": 0,
        "total_segments": None, "loop": False}


def test_parse_range_forms():
    assert parse_range("bytes=0-7", 100) == (0, 7)
    assert parse_range("bytes=90-", 100) == (90, 99)
    assert parse_range("bytes=-10", 100) == (90, 99)
    assert parse_range("bytes=200-", 100) is None
    assert parse_range("bytes=5-2", 100) is None
    assert parse_range("nonsense", 100) is None
