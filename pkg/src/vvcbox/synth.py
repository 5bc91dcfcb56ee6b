"""Synthetic VVC elementary streams for tests and demos.

Slice payloads are random bytes (no entropy coding); headers and parameter
sets follow the real syntax so the parsing side of the toolbox treats the
output exactly like encoder output.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .bits import BitWriter
from .nal import NalType, NalUnit, make_nal, reserialize


@dataclass
class SpsParams:
    sps_id: int = 0
    profile_idc: int = 1  # Main 10
    tier: int = 0
    level_idc: int = 51
    width: int = 1920
    height: int = 1080
    bit_depth: int = 10
    chroma_format_idc: int = 1  # 4:2:0


def build_sps_rbsp(p: SpsParams) -> bytes:
    w = BitWriter()
    w.u(4, p.sps_id)
    w.u(4, 0)  # sps_video_parameter_set_id
    w.u(3, 0)  # sps_max_sublayers_minus1
    w.u(2, p.chroma_format_idc)
    w.u(2, 2)  # sps_log2_ctu_size_minus5 (128x128 CTU)
    w.u(1, 1)  # sps_ptl_dpb_hrd_params_present_flag
    # profile_tier_level(1, 0)
    w.u(7, p.profile_idc)
    w.u(1, p.tier)
    w.u(8, p.level_idc)
    w.u(1, 1)  # ptl_frame_only_constraint_flag
    w.u(1, 0)  # ptl_multilayer_enabled_flag
    w.u(1, 0)  # gci_present_flag
    w.align_zero()  # gci_alignment_zero_bit(s)
    # no sublayer flags; already byte aligned, so no ptl_reserved_zero_bit
    w.u(8, 0)  # ptl_num_sub_profiles
    w.u(1, 0)  # sps_gdr_enabled_flag
    w.u(1, 0)  # sps_ref_pic_resampling_enabled_flag
    w.ue(p.width)
    w.ue(p.height)
    w.u(1, 0)  # sps_conformance_window_flag
    w.u(1, 0)  # sps_subpic_info_present_flag
    w.ue(p.bit_depth - 8)
    w.rbsp_trailing()
    return w.to_bytes()


def build_pps_rbsp(pps_id: int = 0, sps_id: int = 0) -> bytes:
    w = BitWriter()
    w.u(6, pps_id)
    w.u(4, sps_id)
    w.rbsp_trailing()
    return w.to_bytes()


def build_ph_rbsp(rng: random.Random, irap: bool) -> bytes:
    w = BitWriter()
    w.u(1, 1 if irap else 0)  # ph_gdr_or_irap_pic_flag
    w.u(1, 0)  # ph_non_ref_pic_flag
    w.u(15, rng.getrandbits(15))
    w.rbsp_trailing()
    return w.to_bytes()


def _slice_rbsp(rng: random.Random, size: int) -> bytes:
    # bias toward zeros so emulation prevention genuinely triggers
    body = bytes(rng.choice((0, 0, 0, 1, 2, 3, rng.getrandbits(8))) for _ in range(max(size - 1, 0)))
    return body + b"\x80"


@dataclass
class StreamSpec:
    frames: int = 50
    fps: Fraction = Fraction(25)
    idr_period: int = 25  # frames between IDRs; 0 means single leading IDR
    slice_size: int = 900
    slice_jitter: int = 300
    use_aud: bool = False
    repeat_parameter_sets: bool = False  # re-emit SPS/PPS at every IDR
    start_code_len: int = 4
    mixed_start_codes: bool = False
    seed: int = 7
    sps: SpsParams = field(default_factory=SpsParams)


def make_nal_units(spec: StreamSpec) -> list[NalUnit]:
    rng = random.Random(spec.seed)

    def scl() -> int:
        if spec.mixed_start_codes:
            return rng.choice((3, 4))
        return spec.start_code_len

    nals: list[NalUnit] = []
    for i in range(spec.frames):
        is_idr = i == 0 or (spec.idr_period > 0 and i % spec.idr_period == 0)
        if is_idr and (i == 0 or spec.repeat_parameter_sets):
            nals.append(make_nal(NalType.SPS, build_sps_rbsp(spec.sps), start_code_len=scl()))
            nals.append(make_nal(NalType.PPS, build_pps_rbsp(), start_code_len=scl()))
        if spec.use_aud:
            w = BitWriter()
            w.u(1, 1 if is_idr else 0)  # aud_irap_or_gdr_flag
            w.u(3, 0 if is_idr else 1)  # aud_pic_type
            w.rbsp_trailing()
            nals.append(make_nal(NalType.AUD, w.to_bytes(), start_code_len=scl()))
        nals.append(make_nal(NalType.PH, build_ph_rbsp(rng, is_idr), start_code_len=scl()))
        size = spec.slice_size + (rng.randrange(spec.slice_jitter) if spec.slice_jitter else 0)
        slice_type = NalType.IDR_N_LP if is_idr else NalType.TRAIL
        nals.append(make_nal(slice_type, _slice_rbsp(rng, size), start_code_len=scl()))
    return nals


def make_stream(spec: StreamSpec | None = None) -> bytes:
    return reserialize(make_nal_units(spec or StreamSpec()))


def opaque_audio_sample_entry(samplerate: int = 48000, channels: int = 2) -> bytes:
    """A bare mp4a sample entry box; decoder specifics intentionally absent."""
    payload = bytearray()
    payload += bytes(6)  # reserved
    payload += (1).to_bytes(2, "big")  # data_reference_index
    payload += bytes(8)  # reserved
    payload += channels.to_bytes(2, "big")
    payload += (16).to_bytes(2, "big")  # samplesize
    payload += bytes(4)  # pre_defined + reserved
    payload += (samplerate << 16).to_bytes(4, "big")
    return (8 + len(payload)).to_bytes(4, "big") + b"mp4a" + bytes(payload)


def make_audio_frames(duration_s: float, frame_dur_ticks: int = 1024, timescale: int = 48000,
                      frame_size: int = 200, seed: int = 11) -> list[tuple[int, bytes]]:
    """(duration_ticks, payload) pairs roughly filling duration_s seconds."""
    rng = random.Random(seed)
    frames = []
    ticks = 0
    while ticks / timescale < duration_s:
        frames.append((frame_dur_ticks, rng.randbytes(frame_size)))
        ticks += frame_dur_ticks
    return frames
