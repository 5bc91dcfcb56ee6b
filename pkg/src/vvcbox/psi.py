"""Program-specific information: PAT/PMT section build and parse with
MPEG CRC-32 (poly 0x04C11DB7, init all ones, no reflection)."""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import CrcMismatch, TooManyStreams

# VVC video per ISO/IEC 13818-1 Amd.2; override via TsMuxConfig if the
# deployment uses a different code point.
STREAM_TYPE_VVC = 0x33
STREAM_TYPE_ADTS_AAC = 0x0F

MAX_SECTION_BODY = 1021  # section_length limit for PSI


def _crc_table() -> list[int]:
    table = []
    for byte in range(256):
        c = byte << 24
        for _ in range(8):
            c = ((c << 1) ^ 0x04C11DB7) if c & 0x80000000 else (c << 1)
        table.append(c & 0xFFFFFFFF)
    return table


_CRC_TABLE = _crc_table()


def crc32_mpeg(data: bytes) -> int:
    crc = 0xFFFFFFFF
    for b in data:
        crc = ((crc << 8) & 0xFFFFFFFF) ^ _CRC_TABLE[((crc >> 24) ^ b) & 0xFF]
    return crc


@dataclass(frozen=True)
class TsStream:
    pid: int
    stream_type: int

    @property
    def kind(self) -> str:
        if self.stream_type == STREAM_TYPE_VVC:
            return "video-vvc"
        if self.stream_type in (0x03, 0x04, 0x0F, 0x11):
            return "audio"
        return "other"


@dataclass(frozen=True)
class TsProgram:
    program_number: int
    pmt_pid: int
    pcr_pid: int
    streams: tuple[TsStream, ...]

    def vvc_pids(self) -> list[int]:
        return [s.pid for s in self.streams if s.kind == "video-vvc"]


def _section(table_id: int, syntax_body: bytes) -> bytes:
    section_length = len(syntax_body) + 4  # + CRC
    if section_length > MAX_SECTION_BODY:
        raise TooManyStreams(f"PSI section body of {section_length} bytes exceeds {MAX_SECTION_BODY}")
    head = bytes((table_id, 0xB0 | (section_length >> 8), section_length & 0xFF))
    crc = crc32_mpeg(head + syntax_body)
    return head + syntax_body + crc.to_bytes(4, "big")


def build_pat(program_number: int, pmt_pid: int, transport_stream_id: int = 1, version: int = 0) -> bytes:
    body = bytearray()
    body += transport_stream_id.to_bytes(2, "big")
    body += bytes((0xC0 | (version << 1) | 1, 0, 0))  # version, current; section 0 of 0
    body += program_number.to_bytes(2, "big")
    body += (0xE000 | pmt_pid).to_bytes(2, "big")
    return _section(0x00, bytes(body))


def build_pmt(program: TsProgram, version: int = 0) -> bytes:
    body = bytearray()
    body += program.program_number.to_bytes(2, "big")
    body += bytes((0xC0 | (version << 1) | 1, 0, 0))
    body += (0xE000 | program.pcr_pid).to_bytes(2, "big")
    body += (0xF000).to_bytes(2, "big")  # program_info_length = 0
    for s in program.streams:
        body += bytes((s.stream_type,))
        body += (0xE000 | s.pid).to_bytes(2, "big")
        body += (0xF000).to_bytes(2, "big")  # ES_info_length = 0
    return _section(0x02, bytes(body))


def build_psi(program: TsProgram) -> tuple[bytes, bytes]:
    return build_pat(program.program_number, program.pmt_pid), build_pmt(program)


def _check_section(section: bytes, what: str, strict: bool, issues: list[str] | None) -> bytes | None:
    """Validate framing + CRC; returns the syntax body without CRC."""
    if len(section) < 12:
        return None
    section_length = ((section[1] & 0x0F) << 8) | section[2]
    end = 3 + section_length
    if end > len(section):
        return None
    if crc32_mpeg(section[:end - 4]) != int.from_bytes(section[end - 4:end], "big"):
        msg = f"{what} CRC mismatch"
        if strict:
            raise CrcMismatch(msg)
        if issues is not None:
            issues.append(msg)
        return None
    return section[3:end - 4]


def parse_pat(section: bytes, strict: bool = False, issues: list[str] | None = None) -> list[tuple[int, int]]:
    """(program_number, pmt_pid) entries."""
    body = _check_section(section, "PAT", strict, issues)
    if body is None or section[0] != 0x00:
        return []
    entries = []
    pos = 5  # skip tsid, version byte, section numbers
    while pos + 4 <= len(body):
        prog = int.from_bytes(body[pos:pos + 2], "big")
        pid = int.from_bytes(body[pos + 2:pos + 4], "big") & 0x1FFF
        if prog != 0:
            entries.append((prog, pid))
        pos += 4
    return entries


def parse_pmt(section: bytes, pmt_pid: int, strict: bool = False,
              issues: list[str] | None = None) -> TsProgram | None:
    body = _check_section(section, "PMT", strict, issues)
    if body is None or section[0] != 0x02:
        return None
    program_number = int.from_bytes(body[0:2], "big")
    pcr_pid = int.from_bytes(body[5:7], "big") & 0x1FFF
    program_info_length = int.from_bytes(body[7:9], "big") & 0x0FFF
    pos = 9 + program_info_length
    streams = []
    while pos + 5 <= len(body):
        stream_type = body[pos]
        pid = int.from_bytes(body[pos + 1:pos + 3], "big") & 0x1FFF
        es_info = int.from_bytes(body[pos + 3:pos + 5], "big") & 0x0FFF
        streams.append(TsStream(pid=pid, stream_type=stream_type))
        pos += 5 + es_info
    return TsProgram(program_number=program_number, pmt_pid=pmt_pid,
                     pcr_pid=pcr_pid, streams=tuple(streams))
