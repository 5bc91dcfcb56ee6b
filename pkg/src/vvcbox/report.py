"""Stream inspection reports: per-NAL, per-AU and summary views in
human-readable text or stable machine-readable JSON."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .au import AccessUnit, assemble_access_units
from .errors import VvcBoxError
from .nal import NalType, NalUnit, remove_emulation_prevention, scan_annex_b
from .probe import ContainerKind, probe_bytes
from .sps import SpsSummary, parse_sps_summary

REPORT_VERSION = 1


@dataclass
class InspectReport:
    container: str
    nals: list[NalUnit]
    aus: list[AccessUnit]
    sps: SpsSummary | None
    warnings: list[str] = field(default_factory=list)

    @property
    def irap_count(self) -> int:
        return sum(1 for au in self.aus if au.is_irap)

    @property
    def irap_cadence(self) -> float | None:
        """Mean AU distance between consecutive IRAPs."""
        idx = [au.decode_index for au in self.aus if au.is_irap]
        if len(idx) < 2:
            return None
        return (idx[-1] - idx[0]) / (len(idx) - 1)


def build_report(data: bytes, warnings: list[str] | None = None) -> InspectReport:
    from .packaging import load_elementary_stream

    warn = warnings if warnings is not None else []
    kind = probe_bytes(data)
    if kind == ContainerKind.UNKNOWN:
        raise VvcBoxError("input format not recognized")
    es = data if kind == ContainerKind.ANNEX_B else load_elementary_stream(data, warn)
    nals = scan_annex_b(es, warnings=warn)
    aus = assemble_access_units(nals, warnings=warn)
    sps = None
    for nal in nals:
        if nal.nal_unit_type == NalType.SPS:
            try:
                sps = parse_sps_summary(remove_emulation_prevention(nal.ebsp, warnings=warn))
            except VvcBoxError as exc:
                warn.append(f"SPS parse failed: {exc}")
            break
    return InspectReport(container=kind.value, nals=nals, aus=aus, sps=sps, warnings=warn)


def _nal_record(i: int, nal: NalUnit) -> dict:
    return {
        "index": i,
        "offset": nal.offset,
        "size": nal.size,
        "type": int(nal.nal_unit_type),
        "type_name": nal.header.type_name,
        "category": nal.category.value,
        "layer_id": nal.header.nuh_layer_id,
        "temporal_id": nal.header.temporal_id,
    }


def _au_record(au: AccessUnit) -> dict:
    return {
        "index": au.decode_index,
        "irap": au.is_irap,
        "nal_count": len(au.nals),
        "pts": au.pts_ticks,
        "dts": au.dts_ticks,
    }


def _summary(report: InspectReport) -> dict:
    out = {
        "container": report.container,
        "nal_count": len(report.nals),
        "au_count": len(report.aus),
        "irap_count": report.irap_count,
        "irap_cadence": report.irap_cadence,
        "warning_count": len(report.warnings),
    }
    if report.sps is not None:
        out.update({
            "width": report.sps.width_luma,
            "height": report.sps.height_luma,
            "profile_idc": report.sps.profile_idc,
            "tier": report.sps.tier,
            "level_idc": report.sps.level_idc,
            "bit_depth": report.sps.bit_depth,
            "chroma_format_idc": report.sps.chroma_format_idc,
            "codecs": report.sps.codecs_string,
        })
    return out


def render_json(report: InspectReport, deep: bool) -> str:
    doc = {
        "report_version": REPORT_VERSION,
        "summary": _summary(report),
        "access_units": [_au_record(au) for au in report.aus],
    }
    if deep:
        doc["nal_units"] = [_nal_record(i, n) for i, n in enumerate(report.nals)]
    if report.warnings:
        doc["warnings"] = report.warnings
    return json.dumps(doc, indent=2) + "\n"


def render_text(report: InspectReport, deep: bool) -> str:
    lines = []
    s = _summary(report)
    lines.append(f"container: {s['container']}")
    if report.sps is not None:
        lines.append(f"video: {s['width']}x{s['height']} profile {s['profile_idc']} "
                     f"{'high' if s['tier'] else 'main'} tier level {s['level_idc']} "
                     f"{s['bit_depth']}-bit chroma_format {s['chroma_format_idc']}")
        lines.append(f"codecs: {s['codecs']}")
    cadence = s["irap_cadence"]
    lines.append(f"access units: {s['au_count']} ({s['irap_count']} IRAP"
                 + (f", cadence {cadence:.1f}" if cadence is not None else "") + ")")
    lines.append(f"nal units: {s['nal_count']}")
    if deep:
        lines.append("")
        lines.append(f"{'#':>5} {'offset':>9} {'size':>7} {'tid':>3}  type")
        for i, nal in enumerate(report.nals):
            h = nal.header
            lines.append(f"{i:>5} {nal.offset:>9} {nal.size:>7} {h.temporal_id:>3}  "
                         f"{h.type_name} ({nal.category.value})")
    lines.append("")
    lines.append(f"{'au':>5} {'nals':>5} {'irap':>5} {'pts':>10} {'dts':>10}")
    for au in report.aus:
        pts = au.pts_ticks if au.pts_ticks is not None else "-"
        dts = au.dts_ticks if au.dts_ticks is not None else "-"
        lines.append(f"{au.decode_index:>5} {len(au.nals):>5} {'yes' if au.is_irap else 'no':>5} "
                     f"{pts:>10} {dts:>10}")
    for w in report.warnings:
        lines.append(f"warning: {w}")
    return "\n".join(lines) + "\n"
