import pytest

from vvcbox.bits import BitWriter
from vvcbox.errors import BitstreamUnderflow, UnsupportedSyntax
from vvcbox.sps import parse_sps_summary
from vvcbox.synth import SpsParams, build_sps_rbsp

# Hand-assembled 1920x1080 Main-10 SPS payload, frozen from the field list:
#   id=0 vps=0 sublayers=0 chroma=1 ctu=2 ptl(profile=1 tier=0 level=51
#   frame_only=1 multilayer=0 gci=0) gdr=0 resample=0 w=1920 h=1080
#   no conf window, no subpics, bitdepth-8=2
# Leading bytes check out on paper: 00 | 000 01 10 1 = 0x0D | 0000001 0
# = 0x02 | 0x33 | 1 0 0 00000 = 0x80 | 0x00, then ue(1921)/ue(1081).
HAND_SPS_HEX = "000d02338000000f02004391c0"


def _hand_sps() -> bytes:
    w = BitWriter()
    w.u(4, 0)           # sps_seq_parameter_set_id
    w.u(4, 0)           # sps_video_parameter_set_id
    w.u(3, 0)           # sps_max_sublayers_minus1
    w.u(2, 1)           # sps_chroma_format_idc
    w.u(2, 2)           # sps_log2_ctu_size_minus5
    w.u(1, 1)           # sps_ptl_dpb_hrd_params_present_flag
    w.u(7, 1)           # general_profile_idc
    w.u(1, 0)           # general_tier_flag
    w.u(8, 51)          # general_level_idc
    w.u(1, 1)           # ptl_frame_only_constraint_flag
    w.u(1, 0)           # ptl_multilayer_enabled_flag
    w.u(1, 0)           # gci_present_flag
    w.u(5, 0)           # gci_alignment_zero_bit x5 (to bit 24)
    w.u(8, 0)           # ptl_num_sub_profiles
    w.u(1, 0)           # sps_gdr_enabled_flag
    w.u(1, 0)           # sps_ref_pic_resampling_enabled_flag
    w.ue(1920)
    w.ue(1080)
    w.u(1, 0)           # sps_conformance_window_flag
    w.u(1, 0)           # sps_subpic_info_present_flag
    w.ue(2)             # sps_bitdepth_minus8
    w.rbsp_trailing()
    return w.to_bytes()


def test_hand_vector_is_frozen():
    assert _hand_sps().hex() == HAND_SPS_HEX


def test_parse_hand_vector():
    s = parse_sps_summary(bytes.fromhex(HAND_SPS_HEX))
    assert (s.sps_id, s.profile_idc, s.level_idc, s.tier) == (0, 1, 51, 0)
    assert (s.width_luma, s.height_luma) == (1920, 1080)
    assert s.bit_depth == 10
    assert s.chroma_format_idc == 1


def test_builder_matches_hand_assembly():
    assert build_sps_rbsp(SpsParams()) == bytes.fromhex(HAND_SPS_HEX)


@pytest.mark.parametrize("params", [
    SpsParams(sps_id=3, profile_idc=1, tier=1, level_idc=83, width=3840, height=2160,
              bit_depth=10, chroma_format_idc=1),
    SpsParams(sps_id=0, profile_idc=17, tier=0, level_idc=32, width=640, height=360,
              bit_depth=8, chroma_format_idc=1),
    SpsParams(width=176, height=144, bit_depth=8, chroma_format_idc=0),
])
def test_build_parse_round_trip(params):
    s = parse_sps_summary(build_sps_rbsp(params))
    assert s.sps_id == params.sps_id
    assert s.profile_idc == params.profile_idc
    assert s.tier == params.tier
    assert s.level_idc == params.level_idc
    assert s.width_luma == params.width
    assert s.height_luma == params.height
    assert s.bit_depth == params.bit_depth
    assert s.chroma_format_idc == params.chroma_format_idc


def test_truncated_raises_underflow():
    with pytest.raises(BitstreamUnderflow):
        parse_sps_summary(b"\x00")


def test_unmodeled_constraint_info_fails_closed():
    data = bytearray(bytes.fromhex(HAND_SPS_HEX))
    # gci_present_flag sits at bit 34: byte 4, third bit from the MSB
    data[4] |= 0b00100000
    with pytest.raises(UnsupportedSyntax):
        parse_sps_summary(bytes(data))


def test_subpicture_layout_fails_closed():
    w = BitWriter()
    w.u(4, 0); w.u(4, 0); w.u(3, 0); w.u(2, 1); w.u(2, 2)
    w.u(1, 0)   # no PTL
    w.u(1, 0); w.u(1, 0)
    w.ue(64); w.ue(64)
    w.u(1, 0)   # no conformance window
    w.u(1, 1)   # subpic info present
    w.rbsp_trailing()
    with pytest.raises(UnsupportedSyntax):
        parse_sps_summary(w.to_bytes())


def test_conformance_window_is_skipped():
    w = BitWriter()
    w.u(4, 2); w.u(4, 0); w.u(3, 0); w.u(2, 1); w.u(2, 2)
    w.u(1, 0)   # no PTL
    w.u(1, 0); w.u(1, 0)
    w.ue(1280); w.ue(720)
    w.u(1, 1)   # conformance window
    w.ue(0); w.ue(0); w.ue(0); w.ue(4)
    w.u(1, 0)   # no subpics
    w.ue(0)     # 8 bit
    w.rbsp_trailing()
    s = parse_sps_summary(w.to_bytes())
    assert (s.width_luma, s.height_luma, s.bit_depth, s.sps_id) == (1280, 720, 8, 2)
    assert s.profile_idc == 0  # PTL absent


def test_codecs_string():
    s = parse_sps_summary(bytes.fromhex(HAND_SPS_HEX))
    assert s.codecs_string == "vvc1.1.L51"
