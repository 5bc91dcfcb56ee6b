"""Partial VVC SPS decode: enough fields to describe a Main-10 stream."""
from __future__ import annotations

from dataclasses import dataclass

from .bits import BitReader
from .errors import UnsupportedSyntax


@dataclass(frozen=True)
class SpsSummary:
    sps_id: int
    profile_idc: int
    level_idc: int
    tier: int
    width_luma: int
    height_luma: int
    bit_depth: int
    chroma_format_idc: int

    @property
    def codecs_string(self) -> str:
        """Simplified RFC-6381 style tag: vvc1.<profile>.<L|H><level>."""
        tier_ch = "H" if self.tier else "L"
        return f"vvc1.{self.profile_idc}.{tier_ch}{self.level_idc}"


def _parse_profile_tier_level(r: BitReader, max_sublayers_minus1: int) -> tuple[int, int, int]:
    """profile_tier_level with profileTierPresentFlag = 1; returns (profile, tier, level)."""
    profile_idc = r.u(7)
    tier = r.u(1)
    level_idc = r.u(8)
    r.u(1)  # ptl_frame_only_constraint_flag
    r.u(1)  # ptl_multilayer_enabled_flag
    # general_constraints_info
    if r.flag():
        raise UnsupportedSyntax("general constraints info payload not modeled")
    while not r.byte_aligned():
        r.u(1)  # gci_alignment_zero_bit
    sublayer_present = [r.flag() for _ in range(max_sublayers_minus1)]
    while not r.byte_aligned():
        r.u(1)  # ptl_reserved_zero_bit
    for present in sublayer_present:
        if present:
            r.u(8)  # sublayer_level_idc
    num_sub_profiles = r.u(8)
    for _ in range(num_sub_profiles):
        r.u(32)  # general_sub_profile_idc
    return profile_idc, tier, level_idc


def parse_sps_summary(rbsp: bytes) -> SpsSummary:
    """Decode the leading SPS fields from a de-emulated payload.

    Stops after the bit-depth field; anything the reader does not model
    (constraint info, subpictures) raises UnsupportedSyntax rather than
    guessing at field positions.
    """
    r = BitReader(rbsp)
    sps_id = r.u(4)
    r.u(4)  # sps_video_parameter_set_id
    max_sublayers_minus1 = r.u(3)
    chroma_format_idc = r.u(2)
    r.u(2)  # sps_log2_ctu_size_minus5
    profile_idc = tier = level_idc = 0
    if r.flag():  # sps_ptl_dpb_hrd_params_present_flag
        profile_idc, tier, level_idc = _parse_profile_tier_level(r, max_sublayers_minus1)
    r.u(1)  # sps_gdr_enabled_flag
    if r.flag():  # sps_ref_pic_resampling_enabled_flag
        r.u(1)  # sps_res_change_in_clvs_allowed_flag
    width = r.ue()
    height = r.ue()
    if r.flag():  # sps_conformance_window_flag
        r.ue()
        r.ue()
        r.ue()
        r.ue()
    if r.flag():  # sps_subpic_info_present_flag
        raise UnsupportedSyntax("subpicture layout not modeled")
    bit_depth = 8 + r.ue()
    return SpsSummary(
        sps_id=sps_id,
        profile_idc=profile_idc,
        level_idc=level_idc,
        tier=tier,
        width_luma=width,
        height_luma=height,
        bit_depth=bit_depth,
        chroma_format_idc=chroma_format_idc,
    )
