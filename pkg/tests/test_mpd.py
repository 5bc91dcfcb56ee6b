import xml.dom.minidom
import xml.etree.ElementTree as ET

import pytest

from vvcbox.errors import InconsistentPlan
from vvcbox.live import plan_from_durations
from vvcbox.mpd import (LiveMpdOptions, Representation, expand_timeline,
                        iso_duration, iso_instant, timeline_runs, write_mpd)

NS = {"d": "urn:mpeg:dash:schema:mpd:2011"}


def _rep(**kw) -> Representation:
    base = dict(id="1", bandwidth=500_000, width=1920, height=1080, codecs="vvc1.1.L51")
    base.update(kw)
    return Representation(**base)


def _plan(durations, timescale=25000, target_ms=2000):
    return plan_from_durations(durations, timescale, target_ms)


def test_live_equal_segments_duration_addressing():
    plan = _plan([50000, 50000, 50000])
    text = write_mpd(plan, [_rep()], profile="live", mode="static")
    root = ET.fromstring(text)
    st = root.find(".//d:SegmentTemplate", NS)
    assert st.get("duration") == "50000"
    assert st.get("timescale") == "25000"
    assert st.get("startNumber") == "1"
    assert st.get("media") == "seg_$Number$.m4s"
    assert st.find("d:SegmentTimeline", NS) is None
    assert root.get("type") == "static"
    assert root.get("mediaPresentationDuration") == "PT6.000S"


def test_timeline_run_length_compression():
    d, d2 = 50000, 60000
    plan = _plan([d, d, d2, d2])
    rows = timeline_runs(plan)
    assert rows == [(0, d, 1), (2 * d, d2, 1)]
    text = write_mpd(plan, [_rep()], profile="live", mode="static", use_timeline=True)
    root = ET.fromstring(text)
    s_rows = root.findall(".//d:S", NS)
    assert [(int(s.get("t")), int(s.get("d")), int(s.get("r", "0"))) for s in s_rows] == rows


def test_timeline_expansion_reproduces_plan():
    plan = _plan([50000, 50000, 47000, 53000, 53000])
    expanded = expand_timeline(timeline_runs(plan))
    assert [d for _t, d in expanded] == [s.duration_ticks for s in plan.segments]
    assert [t for t, _d in expanded] == [plan.end_ticks(k) for k in range(len(plan.segments))]


def test_ondemand_ranges():
    plan = _plan([50000, 50000])
    rep = _rep(media_file="vod.mp4", init_range=(0, 660), index_range=(661, 700))
    text = write_mpd(plan, [rep], profile="ondemand", mode="static")
    root = ET.fromstring(text)
    assert root.get("profiles") == "urn:mpeg:dash:profile:isoff-on-demand:2011"
    sb = root.find(".//d:SegmentBase", NS)
    assert sb.get("indexRange") == "661-700"
    assert sb.find("d:Initialization", NS).get("range") == "0-660"
    assert root.find(".//d:BaseURL", NS).text == "vod.mp4"


def test_ondemand_requires_ranges():
    plan = _plan([50000])
    with pytest.raises(InconsistentPlan):
        write_mpd(plan, [_rep()], profile="ondemand")


def test_nonuniform_durations_rejected_without_timeline():
    plan = _plan([50000, 60000, 50000])
    with pytest.raises(InconsistentPlan):
        write_mpd(plan, [_rep()], profile="live", mode="static")


def test_last_segment_may_differ():
    plan = _plan([50000, 50000, 20000])
    text = write_mpd(plan, [_rep()], profile="live", mode="static")
    assert 'duration="50000"' in text


def test_dynamic_fields():
    plan = _plan([50000, 50000])
    opts = LiveMpdOptions(availability_start_time=1_700_000_000.0,
                          publish_time=1_700_000_004.0,
                          availability_offset_s=1.9,
                          timeline_window=[(0, 50000, 0)],
                          start_number=1)
    text = write_mpd(plan, [_rep()], profile="live", mode="dynamic",
                     live_opts=opts, use_timeline=True)
    root = ET.fromstring(text)
    assert root.get("type") == "dynamic"
    assert root.get("availabilityStartTime") == iso_instant(1_700_000_000.0)
    assert root.get("publishTime") == iso_instant(1_700_000_004.0)
    assert root.get("minimumUpdatePeriod") == "PT2.000S"
    assert root.get("timeShiftBufferDepth") == "PT30.000S"
    # spd derived from the availability shift: segdur - asto = 0.1
    assert root.get("suggestedPresentationDelay") == "PT0.100S"
    st = root.find(".//d:SegmentTemplate", NS)
    assert st.get("availabilityTimeOffset") == "1.900"
    assert len(root.findall(".//d:S", NS)) == 1


def test_dynamic_needs_opts():
    plan = _plan([50000])
    with pytest.raises(ValueError):
        write_mpd(plan, [_rep()], profile="live", mode="dynamic")


def test_parses_with_independent_parsers():
    plan = _plan([50000, 50000, 50000])
    text = write_mpd(plan, [_rep(codecs='vv"c1')], profile="live", mode="static")
    ET.fromstring(text)                      # expat via ElementTree
    xml.dom.minidom.parseString(text)        # DOM parser
    root = ET.fromstring(text)
    assert root.find(".//d:Representation", NS).get("codecs") == 'vv"c1'


def test_iso_duration_format():
    assert iso_duration(2.0) == "PT2.000S"
    assert iso_duration(9.6) == "PT9.600S"


def test_bandwidth_and_attrs_present():
    plan = _plan([50000])
    text = write_mpd(plan, [_rep(bandwidth=123456)], profile="live", mode="static")
    root = ET.fromstring(text)
    rep = root.find(".//d:Representation", NS)
    assert rep.get("bandwidth") == "123456"
    assert rep.get("width") == "1920"
    assert rep.get("height") == "1080"
