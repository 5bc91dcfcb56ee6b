"""VVC decoder configuration record ('vvcC' box payload).

Serialization is an exact inverse of parsing over the modeled field set.
Parameter-set arrays are kept in VPS, SPS, PPS order.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .bits import BitReader, BitWriter
from .errors import TruncatedBox
from .nal import NalType


@dataclass
class ParamSetArray:
    nal_unit_type: int
    complete: bool
    nals: list[bytes] = field(default_factory=list)  # header + ebsp, no start code


@dataclass
class VvcConfigRecord:
    length_size_minus_one: int = 3
    ptl_present: bool = True
    ols_idx: int = 0
    num_sublayers: int = 1
    constant_frame_rate: int = 0
    chroma_format_idc: int = 1
    bit_depth_minus8: int = 2
    profile_idc: int = 1
    tier: int = 0
    level_idc: int = 51
    frame_only_constraint: bool = True
    multilayer_enabled: bool = False
    constraint_info: bytes = b"\x00"  # packed, first 2 bits unused
    max_picture_width: int = 0
    max_picture_height: int = 0
    avg_frame_rate: int = 0
    param_set_arrays: list[ParamSetArray] = field(default_factory=list)

    @property
    def length_size(self) -> int:
        return self.length_size_minus_one + 1

    def array(self, nal_unit_type: int) -> ParamSetArray | None:
        for a in self.param_set_arrays:
            if a.nal_unit_type == nal_unit_type:
                return a
        return None

    def to_bytes(self) -> bytes:
        w = BitWriter()
        w.u(5, 0x1F)  # reserved '11111'
        w.u(2, self.length_size_minus_one)
        w.u(1, 1 if self.ptl_present else 0)
        if self.ptl_present:
            w.u(9, self.ols_idx)
            w.u(3, self.num_sublayers)
            w.u(2, self.constant_frame_rate)
            w.u(2, self.chroma_format_idc)
            w.u(3, self.bit_depth_minus8)
            w.u(5, 0x1F)  # reserved '11111'
            self._write_ptl(w)
            w.u(16, self.max_picture_width)
            w.u(16, self.max_picture_height)
            w.u(16, self.avg_frame_rate)
        w.u(8, len(self.param_set_arrays))
        for arr in self.param_set_arrays:
            w.u(1, 1 if arr.complete else 0)
            w.u(2, 0)  # reserved
            w.u(5, arr.nal_unit_type)
            w.u(16, len(arr.nals))
            for nal in arr.nals:
                w.u(16, len(nal))
                for b in nal:
                    w.u(8, b)
        return w.to_bytes()

    def _write_ptl(self, w: BitWriter) -> None:
        num_bytes_ci = len(self.constraint_info)
        w.u(2, 0)  # reserved
        w.u(6, num_bytes_ci)
        w.u(7, self.profile_idc)
        w.u(1, self.tier)
        w.u(8, self.level_idc)
        w.u(1, 1 if self.frame_only_constraint else 0)
        w.u(1, 1 if self.multilayer_enabled else 0)
        ci_bits = 8 * num_bytes_ci - 2
        ci_val = int.from_bytes(self.constraint_info, "big") & ((1 << ci_bits) - 1)
        w.u(ci_bits, ci_val)
        # no sublayer levels modeled: flags all zero, reserved bits pad the byte
        for _ in range(max(self.num_sublayers - 1, 0)):
            w.u(1, 0)  # ptl_sublayer_level_present_flag = 0
        for _ in range(self.num_sublayers, 9):
            w.u(1, 0)  # ptl_reserved_zero_bit
        w.u(8, 0)  # ptl_num_sub_profiles


def parse_vvcc(payload: bytes) -> VvcConfigRecord:
    r = BitReader(payload)
    try:
        r.u(5)
        rec = VvcConfigRecord(param_set_arrays=[])
        rec.length_size_minus_one = r.u(2)
        rec.ptl_present = r.u(1) == 1
        if rec.ptl_present:
            rec.ols_idx = r.u(9)
            rec.num_sublayers = r.u(3)
            rec.constant_frame_rate = r.u(2)
            rec.chroma_format_idc = r.u(2)
            rec.bit_depth_minus8 = r.u(3)
            r.u(5)
            _parse_ptl(r, rec)
            rec.max_picture_width = r.u(16)
            rec.max_picture_height = r.u(16)
            rec.avg_frame_rate = r.u(16)
        num_arrays = r.u(8)
        for _ in range(num_arrays):
            complete = r.u(1) == 1
            r.u(2)
            nut = r.u(5)
            num = r.u(16)
            nals = []
            for _ in range(num):
                ln = r.u(16)
                nals.append(bytes(r.u(8) for _ in range(ln)))
            rec.param_set_arrays.append(ParamSetArray(nal_unit_type=nut, complete=complete, nals=nals))
    except Exception as exc:
        raise TruncatedBox(f"vvcC payload too short: {exc}") from exc
    return rec


def _parse_ptl(r: BitReader, rec: VvcConfigRecord) -> None:
    r.u(2)
    num_bytes_ci = r.u(6)
    rec.profile_idc = r.u(7)
    rec.tier = r.u(1)
    rec.level_idc = r.u(8)
    rec.frame_only_constraint = r.u(1) == 1
    rec.multilayer_enabled = r.u(1) == 1
    ci_bits = 8 * num_bytes_ci - 2
    rec.constraint_info = r.u(ci_bits).to_bytes(num_bytes_ci, "big")
    sub_flags = []
    for _ in range(max(rec.num_sublayers - 1, 0)):
        sub_flags.append(r.u(1))
    for _ in range(rec.num_sublayers, 9):
        r.u(1)
    for f in sub_flags:
        if f:
            r.u(8)
    num_sub_profiles = r.u(8)
    for _ in range(num_sub_profiles):
        r.u(32)


def config_from_parameter_sets(*, width: int, height: int,
                               profile_idc: int, tier: int, level_idc: int,
                               chroma_format_idc: int, bit_depth: int,
                               vps: list[bytes] | None = None,
                               sps: list[bytes] | None = None,
                               pps: list[bytes] | None = None,
                               avg_frame_rate: int = 0,
                               complete: bool = True) -> VvcConfigRecord:
    """Assemble a record from parsed stream properties plus raw NAL bodies."""
    arrays = []
    for nut, group in ((NalType.VPS, vps), (NalType.SPS, sps), (NalType.PPS, pps)):
        if group:
            arrays.append(ParamSetArray(nal_unit_type=int(nut), complete=complete, nals=list(group)))
    return VvcConfigRecord(
        profile_idc=profile_idc,
        tier=tier,
        level_idc=level_idc,
        chroma_format_idc=chroma_format_idc,
        bit_depth_minus8=bit_depth - 8,
        max_picture_width=width,
        max_picture_height=height,
        avg_frame_rate=avg_frame_rate,
        param_set_arrays=arrays,
    )
