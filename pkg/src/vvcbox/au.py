"""Access-unit assembly and timing assignment."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import OrphanSuffix
from .nal import NalCategory, NalType, NalUnit, SUFFIX_TYPES

# Track timescale is fps_num * TIMESCALE_FACTOR so frame durations stay integral.
TIMESCALE_FACTOR = 1000


@dataclass
class AccessUnit:
    """All NAL units of one coded picture, in bitstream order."""

    nals: list[NalUnit]
    is_irap: bool
    decode_index: int
    pts_ticks: int | None = None
    dts_ticks: int | None = None

    @property
    def is_idr(self) -> bool:
        vcl = [n for n in self.nals if n.is_vcl]
        return bool(vcl) and all(n.nal_unit_type in (NalType.IDR_W_RADL, NalType.IDR_N_LP) for n in vcl)

    @property
    def vcl_nals(self) -> list[NalUnit]:
        return [n for n in self.nals if n.is_vcl]

    @property
    def size(self) -> int:
        return sum(n.size for n in self.nals)


def assemble_access_units(nals: list[NalUnit], warnings: list[str] | None = None) -> list[AccessUnit]:
    """Group NALs into access units.

    Simplified boundary rule: a new AU starts at an AUD, at a picture
    header, or at a VCL NAL preceded by prefix non-VCL NALs. Consecutive
    VCL NALs with nothing between them stay in the same AU (multi-slice
    picture). Prefix NALs attach forward, suffix NALs attach backward.
    """
    aus: list[AccessUnit] = []
    prefix: list[NalUnit] = []
    current: list[NalUnit] | None = None

    def close() -> None:
        nonlocal current
        if current is not None:
            vcl = [n for n in current if n.is_vcl]
            aus.append(
                AccessUnit(
                    nals=current,
                    is_irap=bool(vcl) and all(n.is_irap for n in vcl),
                    decode_index=len(aus),
                )
            )
            current = None

    for nal in nals:
        t = nal.nal_unit_type
        if t in SUFFIX_TYPES:
            if current is not None:
                current.append(nal)
            elif aus:
                aus[-1].nals.append(nal)
            else:
                raise OrphanSuffix(f"{nal.header.type_name} at offset {nal.offset} precedes any access unit")
        elif nal.is_vcl:
            if prefix:
                close()
                current = prefix + [nal]
                prefix = []
            elif current is None:
                current = [nal]
            else:
                current.append(nal)
        elif t in (NalType.AUD, NalType.PH):
            close()
            prefix.append(nal)
        else:
            # parameter sets, prefix SEI/APS, OPI, DCI, reserved: attach forward
            prefix.append(nal)

    close()
    if prefix:
        if aus:
            if warnings is not None:
                warnings.append(f"{len(prefix)} trailing non-VCL NAL(s) attached to the last access unit")
            aus[-1].nals.extend(prefix)
        elif warnings is not None:
            warnings.append(f"{len(prefix)} non-VCL NAL(s) without any coded picture were dropped")
    return aus


def video_timescale(fps: Fraction) -> tuple[int, int]:
    """Return (timescale, frame_ticks) giving exact integral durations."""
    return fps.numerator * TIMESCALE_FACTOR, fps.denominator * TIMESCALE_FACTOR


def assign_timing(aus: list[AccessUnit], fps: Fraction) -> int:
    """Set pts/dts on each AU assuming decode order == presentation order.

    Returns the track timescale used for the tick values.
    """
    timescale, frame_ticks = video_timescale(fps)
    for i, au in enumerate(aus):
        au.dts_ticks = i * frame_ticks
        au.pts_ticks = au.dts_ticks
    return timescale


def parse_fps(text: str) -> Fraction:
    """Accept '25', '29.97' or '30000/1001'."""
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return Fraction(int(num), int(den))
    return Fraction(text)
