"""VVC NAL unit layer: start-code scanning, headers, emulation prevention.

Header layout (2 bytes):
  byte0 = forbidden_zero_bit(1) | nuh_reserved_zero_bit(1) | nuh_layer_id(6)
  byte1 = nal_unit_type(5) | nuh_temporal_id_plus1(3)
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum

from .errors import MalformedEbsp, NoStartCodeFound, TruncatedNal

START_CODE_3 = b"\x00\x00\x01"
START_CODE_4 = b"\x00\x00\x00\x01"


class NalType(IntEnum):
    TRAIL = 0
    STSA = 1
    RADL = 2
    RASL = 3
    RSV_VCL_4 = 4
    RSV_VCL_5 = 5
    RSV_VCL_6 = 6
    IDR_W_RADL = 7
    IDR_N_LP = 8
    CRA = 9
    GDR = 10
    RSV_IRAP_11 = 11
    OPI = 12
    DCI = 13
    VPS = 14
    SPS = 15
    PPS = 16
    PREFIX_APS = 17
    SUFFIX_APS = 18
    PH = 19
    AUD = 20
    EOS = 21
    EOB = 22
    PREFIX_SEI = 23
    SUFFIX_SEI = 24
    FD = 25
    RSV_NVCL_26 = 26
    RSV_NVCL_27 = 27
    UNSPEC_28 = 28
    UNSPEC_29 = 29
    UNSPEC_30 = 30
    UNSPEC_31 = 31


class NalCategory(Enum):
    VCL = "VCL"
    IRAP_VCL = "IRAP-VCL"
    VPS = "VPS"
    SPS = "SPS"
    PPS = "PPS"
    APS = "APS"
    PH = "PH"
    AUD = "AUD"
    SEI = "SEI"
    EOS_EOB = "EOS/EOB"
    OTHER = "OTHER"


IRAP_TYPES = frozenset({NalType.IDR_W_RADL, NalType.IDR_N_LP, NalType.CRA})
IDR_TYPES = frozenset({NalType.IDR_W_RADL, NalType.IDR_N_LP})
PARAMETER_SET_TYPES = frozenset({NalType.VPS, NalType.SPS, NalType.PPS})
# Suffix NALs attach to the access unit of the preceding picture.
SUFFIX_TYPES = frozenset({NalType.SUFFIX_APS, NalType.SUFFIX_SEI, NalType.EOS, NalType.EOB, NalType.FD})


def category(nal_unit_type: int) -> NalCategory:
    """Total, deterministic classification over 0..31."""
    t = nal_unit_type
    if t in IRAP_TYPES:
        return NalCategory.IRAP_VCL
    if 0 <= t <= 11:
        return NalCategory.VCL
    if t == NalType.VPS:
        return NalCategory.VPS
    if t == NalType.SPS:
        return NalCategory.SPS
    if t == NalType.PPS:
        return NalCategory.PPS
    if t in (NalType.PREFIX_APS, NalType.SUFFIX_APS):
        return NalCategory.APS
    if t == NalType.PH:
        return NalCategory.PH
    if t == NalType.AUD:
        return NalCategory.AUD
    if t in (NalType.PREFIX_SEI, NalType.SUFFIX_SEI):
        return NalCategory.SEI
    if t in (NalType.EOS, NalType.EOB):
        return NalCategory.EOS_EOB
    return NalCategory.OTHER


def is_vcl(nal_unit_type: int) -> bool:
    return category(nal_unit_type) in (NalCategory.VCL, NalCategory.IRAP_VCL)


@dataclass(frozen=True)
class NalHeader:
    forbidden_zero_bit: int
    nuh_reserved_zero_bit: int
    nuh_layer_id: int
    nal_unit_type: int
    nuh_temporal_id_plus1: int

    @property
    def temporal_id(self) -> int:
        return self.nuh_temporal_id_plus1 - 1

    @property
    def type_name(self) -> str:
        return NalType(self.nal_unit_type).name

    def to_bytes(self) -> bytes:
        b0 = (self.forbidden_zero_bit << 7) | (self.nuh_reserved_zero_bit << 6) | (self.nuh_layer_id & 0x3F)
        b1 = ((self.nal_unit_type & 0x1F) << 3) | (self.nuh_temporal_id_plus1 & 0x7)
        return bytes((b0, b1))


def parse_nal_header(two: bytes) -> NalHeader:
    if len(two) < 2:
        raise TruncatedNal("NAL header needs 2 bytes")
    b0, b1 = two[0], two[1]
    return NalHeader(
        forbidden_zero_bit=(b0 >> 7) & 1,
        nuh_reserved_zero_bit=(b0 >> 6) & 1,
        nuh_layer_id=b0 & 0x3F,
        nal_unit_type=(b1 >> 3) & 0x1F,
        nuh_temporal_id_plus1=b1 & 0x7,
    )


def make_header(nal_unit_type: int, temporal_id: int = 0, layer_id: int = 0) -> NalHeader:
    return NalHeader(0, 0, layer_id, int(nal_unit_type), temporal_id + 1)


@dataclass
class NalUnit:
    """One NAL as found in an Annex B stream. ebsp keeps emulation bytes intact."""

    header: NalHeader
    ebsp: bytes
    offset: int = 0
    start_code_len: int = 4

    @property
    def nal_unit_type(self) -> int:
        return self.header.nal_unit_type

    @property
    def category(self) -> NalCategory:
        return category(self.header.nal_unit_type)

    @property
    def is_vcl(self) -> bool:
        return is_vcl(self.header.nal_unit_type)

    @property
    def is_irap(self) -> bool:
        return self.header.nal_unit_type in IRAP_TYPES

    @property
    def size(self) -> int:
        """Header plus payload, start code excluded."""
        return 2 + len(self.ebsp)

    def body(self) -> bytes:
        return self.header.to_bytes() + self.ebsp

    def to_annex_b(self, start_code_len: int | None = None) -> bytes:
        scl = self.start_code_len if start_code_len is None else start_code_len
        prefix = START_CODE_4 if scl == 4 else START_CODE_3
        return prefix + self.body()


def _check_header(nal: NalUnit, strict: bool, warnings: list[str] | None, index: int) -> None:
    h = nal.header
    problems = []
    if h.forbidden_zero_bit != 0:
        problems.append("forbidden_zero_bit set")
    if h.nuh_reserved_zero_bit != 0:
        problems.append("nuh_reserved_zero_bit set")
    if h.nuh_temporal_id_plus1 < 1:
        problems.append("nuh_temporal_id_plus1 is 0")
    for p in problems:
        msg = f"NAL {index} at offset {nal.offset}: {p}"
        if strict:
            raise MalformedEbsp(msg)
        if warnings is not None:
            warnings.append(msg)


def scan_annex_b(data: bytes, strict: bool = False, warnings: list[str] | None = None) -> list[NalUnit]:
    """Split an Annex B byte string into NAL units.

    Trailing zero bytes before a start code count as that code's separator,
    so re-emitting each NAL with its recorded start_code_len reproduces the
    input byte-for-byte when separators are the usual 3 or 4 bytes. Bytes
    before the first start code are skipped.
    """
    if not data:
        return []
    starts = []  # (separator_start, code_len, body_start)
    i = data.find(START_CODE_3)
    if i < 0:
        raise NoStartCodeFound("no Annex B start code in input")
    while i >= 0:
        code_len = 3
        sep_start = i
        if i > 0 and data[i - 1] == 0:
            code_len = 4
            sep_start = i - 1
        starts.append((sep_start, code_len, i + 3))
        i = data.find(START_CODE_3, i + 3)

    nals: list[NalUnit] = []
    for k, (sep_start, code_len, body_start) in enumerate(starts):
        if k + 1 < len(starts):
            end = starts[k + 1][0]
            # zero run beyond the recorded 3/4-byte code belongs to the separator
            while end > body_start and data[end - 1] == 0:
                end -= 1
        else:
            end = len(data)
        body = data[body_start:end]
        if len(body) < 2:
            raise TruncatedNal(f"start code at offset {sep_start} followed by {len(body)} byte(s)")
        nal = NalUnit(
            header=parse_nal_header(body),
            ebsp=body[2:],
            offset=sep_start,
            start_code_len=code_len,
        )
        _check_header(nal, strict, warnings, k)
        nals.append(nal)
    return nals


def reserialize(nals: list[NalUnit]) -> bytes:
    """Re-emit NALs with their recorded start-code lengths."""
    return b"".join(n.to_annex_b() for n in nals)


def remove_emulation_prevention(ebsp: bytes, strict: bool = False, warnings: list[str] | None = None) -> bytes:
    """Strip emulation-prevention 03 bytes: 00 00 03 0x -> 00 00 0x."""
    out = bytearray()
    i = 0
    n = len(ebsp)
    zeros = 0
    while i < n:
        b = ebsp[i]
        if zeros >= 2:
            if b == 3:
                nxt = ebsp[i + 1] if i + 1 < n else None
                if nxt is not None and nxt > 3:
                    msg = f"00 00 03 followed by {nxt:#04x} at offset {i}"
                    if strict:
                        raise MalformedEbsp(msg)
                    if warnings is not None:
                        warnings.append(msg)
                    out.append(b)  # not an emulation byte, keep it
                zeros = 0
                i += 1
                continue
            if b <= 2:
                msg = f"raw 00 00 {b:02x} in EBSP at offset {i}"
                if strict:
                    raise MalformedEbsp(msg)
                if warnings is not None:
                    warnings.append(msg)
        out.append(b)
        zeros = zeros + 1 if b == 0 else 0
        i += 1
    return bytes(out)


def insert_emulation_prevention(rbsp: bytes) -> bytes:
    """Insert 03 bytes so the output never contains a raw 00 00 0x (x <= 3)."""
    out = bytearray()
    zeros = 0
    for b in rbsp:
        if zeros >= 2 and b <= 3:
            out.append(3)
            zeros = 0
        out.append(b)
        zeros = zeros + 1 if b == 0 else 0
    return bytes(out)


def make_nal(nal_unit_type: int, rbsp: bytes, temporal_id: int = 0, start_code_len: int = 4) -> NalUnit:
    """Build a NAL from RBSP content, applying emulation prevention."""
    return NalUnit(
        header=make_header(nal_unit_type, temporal_id),
        ebsp=insert_emulation_prevention(rbsp),
        start_code_len=start_code_len,
    )
