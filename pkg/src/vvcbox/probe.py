"""Container sniffing for the input side of every command."""
from __future__ import annotations

from enum import Enum

_TOP_LEVEL_BOXES = {
    b"ftyp", b"styp", b"moov", b"moof", b"mdat", b"free", b"skip",
    b"sidx", b"ssix", b"wide", b"pdin", b"uuid", b"prft", b"emsg", b"mfra",
}

PROBE_HEAD_LEN = 512


class ContainerKind(Enum):
    ANNEX_B = "annexb"
    ISO_BMFF = "isobmff"
    MPEG2_TS = "mpeg2ts"
    UNKNOWN = "unknown"


def probe_format(head: bytes, total_len: int | None = None) -> ContainerKind:
    """Classify a stream from its first bytes. Precedence: MP4 > TS > Annex B."""
    if not head:
        return ContainerKind.UNKNOWN
    if total_len is None:
        total_len = len(head)
    if len(head) >= 8 and head[4:8] in _TOP_LEVEL_BOXES:
        return ContainerKind.ISO_BMFF
    if head[0] == 0x47:
        sync_ok = True
        for off in (188, 376):
            if total_len > off:
                if len(head) > off:
                    sync_ok = sync_ok and head[off] == 0x47
                # bytes past the probed head are given the benefit of the doubt
        if sync_ok:
            return ContainerKind.MPEG2_TS
    idx = head.find(b"\x00\x00\x01")
    if idx >= 0:
        zeros = 0
        while zeros < len(head) and head[zeros] == 0:
            zeros += 1
        if idx - zeros < 64:
            return ContainerKind.ANNEX_B
    return ContainerKind.UNKNOWN


def probe_bytes(data: bytes) -> ContainerKind:
    return probe_format(data[:PROBE_HEAD_LEN], len(data))


def probe_file(path) -> ContainerKind:
    with open(path, "rb") as f:
        head = f.read(PROBE_HEAD_LEN)
        f.seek(0, 2)
        total = f.tell()
    return probe_format(head, total)
