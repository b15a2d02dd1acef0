"""Simple dual-port, 1-bit-wide block RAM with 19-bit addresses.

Port A writes, port B reads.  Both ports are synchronous: a write or read
request issued during a cycle takes effect on the following ``step()``.  The
read port registers its output, so data requested before a step is visible
through ``read_data()`` after it.  A read and a write to the same address in
the same cycle return the old contents (read-first).
"""
from __future__ import annotations

from .errors import OutOfRange

ADDR_BITS = 19
DEPTH = 1 << ADDR_BITS


def addr_of(x: int, y: int, w: int, h: int | None = None) -> int:
    if h is None:
        h = DEPTH // w if w > 0 else 0
    if not (0 <= x < w and 0 <= y < h) or w * h > DEPTH:
        raise OutOfRange(f"pixel ({x}, {y}) not addressable in a {w}x{h} frame")
    return y * w + x


def _check(addr: int):
    if not 0 <= addr < DEPTH:
        raise OutOfRange(f"address {addr} outside [0, {DEPTH})")


class BitFrameBuffer:
    def __init__(self):
        self.storage = bytearray(DEPTH)
        self.pending_write = None
        self.pending_read = None
        self.read_out = 0
        self.cycle = 0

    def write(self, addr: int, value: int, we: int = 1):
        _check(addr)
        if we:
            self.pending_write = (addr, value & 1)

    def read_request(self, addr: int):
        _check(addr)
        self.pending_read = (addr, self.cycle)

    def read_data(self) -> int:
        return self.read_out

    def step(self):
        if self.pending_read is not None:
            self.read_out = self.storage[self.pending_read[0]]
            self.pending_read = None
        if self.pending_write is not None:
            addr, value = self.pending_write
            self.storage[addr] = value
            self.pending_write = None
        self.cycle += 1
