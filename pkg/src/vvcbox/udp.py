"""Constant-rate UDP emission of transport streams: 7 TS packets per
datagram, paced against an absolute schedule."""
from __future__ import annotations

import socket
import time
from dataclasses import dataclass

from .ts import TS_PACKET_SIZE

PACKETS_PER_DATAGRAM = 7
DATAGRAM_SIZE = PACKETS_PER_DATAGRAM * TS_PACKET_SIZE  # 1316


@dataclass
class UdpStats:
    datagrams: int
    bytes_sent: int
    elapsed_s: float


def parse_dest(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    return host or "127.0.0.1", int(port)


def udp_emit(ts_stream: bytes, rate_bps: int, dest: tuple[str, int], *,
             clock=time.monotonic, sleep=time.sleep,
             sock: socket.socket | None = None) -> UdpStats:
    """Send the stream so bytes-on-wire track rate_bps; the last datagram
    may be short. Returns timing stats."""
    own_sock = sock is None
    if own_sock:
        sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    try:
        start = clock()
        sent = 0
        count = 0
        pos = 0
        while pos < len(ts_stream):
            target = start + pos * 8 / rate_bps
            now = clock()
            if target > now:
                sleep(target - now)
            chunk = ts_stream[pos:pos + DATAGRAM_SIZE]
            sock.sendto(chunk, dest)
            pos += len(chunk)
            sent += len(chunk)
            count += 1
        return UdpStats(datagrams=count, bytes_sent=sent, elapsed_s=clock() - start)
    finally:
        if own_sock:
            sock.close()
