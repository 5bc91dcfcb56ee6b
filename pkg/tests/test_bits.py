import pytest
from hypothesis import given, strategies as st

from vvcbox.bits import BitReader, BitWriter
from vvcbox.errors import BitstreamUnderflow


def test_u_reads_msb_first():
    r = BitReader(bytes([0b10110001, 0xFF]))
    assert r.u(1) == 1
    assert r.u(3) == 0b011
    assert r.u(4) == 0b0001
    assert r.byte_aligned()
    assert r.u(8) == 0xFF


def test_ue_first_values():
    # '1' -> 0, '010' -> 1, '00100' -> 3
    assert BitReader(bytes([0b10000000])).ue() == 0
    assert BitReader(bytes([0b01000000])).ue() == 1
    assert BitReader(bytes([0b00100000])).ue() == 3


def test_ue_sequence():
    w = BitWriter()
    for v in (0, 1, 2, 3, 7, 255, 4096):
        w.ue(v)
    w.align_zero()
    r = BitReader(w.to_bytes())
    assert [r.ue() for _ in range(7)] == [0, 1, 2, 3, 7, 255, 4096]


def test_underflow():
    r = BitReader(b"\x00")
    r.u(8)
    with pytest.raises(BitstreamUnderflow):
        r.u(1)


def test_se_mapping():
    w = BitWriter()
    for v in (0, 1, 2, 3, 4):
        w.ue(v)
    w.align_zero()
    r = BitReader(w.to_bytes())
    assert [r.se() for _ in range(5)] == [0, 1, -1, 2, -2]


def test_writer_rejects_overflow():
    with pytest.raises(ValueError):
        BitWriter().u(3, 8)


def test_rbsp_trailing():
    w = BitWriter()
    w.u(3, 0b101)
    w.rbsp_trailing()
    assert w.to_bytes() == bytes([0b10110000])


@given(st.lists(st.tuples(st.integers(min_value=1, max_value=24),
                          st.integers(min_value=0, max_value=(1 << 24) - 1)),
                min_size=1, max_size=50))
def test_u_round_trip(fields):
    w = BitWriter()
    expected = []
    for nbits, value in fields:
        value &= (1 << nbits) - 1
        w.u(nbits, value)
        expected.append((nbits, value))
    w.align_zero()
    r = BitReader(w.to_bytes())
    assert [r.u(n) for n, _ in expected] == [v for _, v in expected]


@given(st.lists(st.integers(min_value=0, max_value=100_000), min_size=1, max_size=40))
def test_ue_round_trip(values):
    w = BitWriter()
    for v in values:
        w.ue(v)
    w.align_zero()
    r = BitReader(w.to_bytes())
    assert [r.ue() for _ in values] == values
