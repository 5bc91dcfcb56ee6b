import pytest

from vvcbox.boxes import Box, find_box, find_boxes, read_box_tree, write_box_tree
from vvcbox.errors import SizeOverflow, TruncatedBox


def test_empty_free_box():
    data = bytes.fromhex("00000008") + b"free"
    tree = read_box_tree(data)
    assert len(tree) == 1
    assert tree[0].fourcc == b"free"
    assert tree[0].payload == b""
    assert not tree[0].container
    assert write_box_tree(tree) == data


def test_nested_round_trip():
    moov = Box.wrap(b"moov", [
        Box.leaf(b"mvhd", bytes(20)),
        Box.wrap(b"trak", [Box.leaf(b"tkhd", bytes(8))]),
    ])
    data = write_box_tree([moov])
    tree = read_box_tree(data)
    assert write_box_tree(tree) == data
    assert tree[0].find("trak.tkhd").payload == bytes(8)


def test_declared_size_below_header_is_overflow():
    data = bytes.fromhex("00000005") + b"free"
    with pytest.raises(SizeOverflow):
        read_box_tree(data)


def test_truncated_box():
    data = bytes.fromhex("00000010") + b"free" + bytes(2)
    with pytest.raises(TruncatedBox):
        read_box_tree(data)
    with pytest.raises(TruncatedBox):
        read_box_tree(bytes.fromhex("000000"))


def test_large_size_read():
    payload = b"xyz"
    data = (1).to_bytes(4, "big") + b"blob" + (16 + len(payload)).to_bytes(8, "big") + payload
    tree = read_box_tree(data)
    assert tree[0].payload == payload


def test_size_zero_extends_to_end():
    data = (0).to_bytes(4, "big") + b"mdat" + b"abcdef"
    tree = read_box_tree(data)
    assert tree[0].payload == b"abcdef"


def test_unknown_leaf_preserved_verbatim():
    weird = Box.leaf(b"zzzz", b"\x01\x02\x03")
    data = write_box_tree([weird, Box.leaf(b"free")])
    assert write_box_tree(read_box_tree(data)) == data


def test_find_helpers():
    tree = [Box.wrap(b"moov", [Box.wrap(b"trak", [Box.leaf(b"tkhd", b"1")]),
                               Box.wrap(b"trak", [Box.leaf(b"tkhd", b"2")])])]
    assert find_box(tree, "moov.trak.tkhd").payload == b"1"
    assert [b.payload for b in find_boxes(tree, "moov.trak.tkhd")] == [b"1", b"2"]


def test_box_sizes_tile_the_file():
    tree = [Box.leaf(b"ftyp", b"isom"), Box.wrap(b"moov", [Box.leaf(b"mvhd", bytes(4))]),
            Box.leaf(b"mdat", bytes(100))]
    data = write_box_tree(tree)
    pos = 0
    seen = []
    while pos < len(data):
        size = int.from_bytes(data[pos:pos + 4], "big")
        seen.append((pos, size))
        pos += size
    assert pos == len(data)  # no gaps, no overlaps
    assert len(seen) == 3
