"""Generic ISO-BMFF box tree: read, write, navigate.

All multi-byte integers are big-endian. Unknown leaf boxes round-trip
verbatim; only the container set below is descended into.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import SizeOverflow, TruncatedBox

CONTAINER_TYPES = {
    b"moov", b"trak", b"mdia", b"minf", b"dinf", b"stbl", b"mvex",
    b"edts", b"udta", b"moof", b"traf", b"mfra", b"sinf", b"schi",
}


@dataclass
class Box:
    fourcc: bytes
    payload: bytes = b""
    children: list["Box"] = field(default_factory=list)
    container: bool = False

    @classmethod
    def leaf(cls, fourcc: bytes, payload: bytes = b"") -> "Box":
        return cls(fourcc=fourcc, payload=payload)

    @classmethod
    def wrap(cls, fourcc: bytes, children: list["Box"]) -> "Box":
        return cls(fourcc=fourcc, children=children, container=True)

    @property
    def size(self) -> int:
        if self.container:
            return 8 + sum(c.size for c in self.children)
        return 8 + len(self.payload)

    def find(self, path: str) -> "Box | None":
        """First box matching a dotted fourcc path, e.g. 'moov.trak.mdia'."""
        head, _, rest = path.partition(".")
        for c in self.children:
            if c.fourcc == head.encode("ascii"):
                return c.find(rest) if rest else c
        return None

    def find_all(self, fourcc: str) -> list["Box"]:
        return [c for c in self.children if c.fourcc == fourcc.encode("ascii")]

    def to_bytes(self) -> bytes:
        body = b"".join(c.to_bytes() for c in self.children) if self.container else self.payload
        return (8 + len(body)).to_bytes(4, "big") + self.fourcc + body


def _read_one(data: bytes, off: int, end: int) -> tuple[Box, int]:
    if end - off < 8:
        raise TruncatedBox(f"{end - off} byte(s) left at offset {off}, need a box header")
    size = int.from_bytes(data[off:off + 4], "big")
    fourcc = data[off + 4:off + 8]
    header_len = 8
    if size == 1:
        if end - off < 16:
            raise TruncatedBox(f"large-size box at offset {off} truncated")
        size = int.from_bytes(data[off + 8:off + 16], "big")
        header_len = 16
    elif size == 0:
        size = end - off  # extends to end of enclosing scope
    if size < header_len:
        raise SizeOverflow(f"box '{fourcc!r}' at offset {off} declares size {size}")
    if off + size > end:
        raise TruncatedBox(f"box '{fourcc!r}' at offset {off} overruns its scope by {off + size - end}")
    body = data[off + header_len:off + size]
    if fourcc in CONTAINER_TYPES:
        return Box.wrap(fourcc, read_box_tree(body)), off + size
    return Box.leaf(fourcc, body), off + size


def read_box_tree(data: bytes) -> list[Box]:
    boxes: list[Box] = []
    off = 0
    while off < len(data):
        box, off = _read_one(data, off, len(data))
        boxes.append(box)
    return boxes


def write_box_tree(boxes: list[Box]) -> bytes:
    return b"".join(b.to_bytes() for b in boxes)


def find_box(boxes: list[Box], path: str) -> Box | None:
    return Box.wrap(b"", boxes).find(path)


def find_boxes(boxes: list[Box], path: str) -> list[Box]:
    head, _, rest = path.partition(".")
    matches = [b for b in boxes if b.fourcc == head.encode("ascii")]
    if not rest:
        return matches
    out: list[Box] = []
    for m in matches:
        out.extend(find_boxes(m.children, rest))
    return out


def full_box(fourcc: bytes, version: int, flags: int, body: bytes) -> Box:
    return Box.leaf(fourcc, bytes((version,)) + flags.to_bytes(3, "big") + body)


class FullBoxReader:
    """Cursor over a FullBox payload."""

    def __init__(self, box: Box):
        if len(box.payload) < 4:
            raise TruncatedBox(f"'{box.fourcc!r}' too short for a FullBox")
        self.version = box.payload[0]
        self.flags = int.from_bytes(box.payload[1:4], "big")
        self.data = box.payload
        self.off = 4

    def u(self, n: int) -> int:
        if self.off + n > len(self.data):
            raise TruncatedBox("FullBox payload underrun")
        v = int.from_bytes(self.data[self.off:self.off + n], "big")
        self.off += n
        return v

    def raw(self, n: int) -> bytes:
        if self.off + n > len(self.data):
            raise TruncatedBox("FullBox payload underrun")
        b = self.data[self.off:self.off + n]
        self.off += n
        return b
