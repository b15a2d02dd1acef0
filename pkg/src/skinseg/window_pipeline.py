"""Cycle-accurate model of the streaming N x N window generator and the
majority window operator.

The generator is the classic line-buffer structure: every window row is a
chain of ``n`` pixel registers, and the bit shifted out of row ``r`` enters a
line FIFO whose output feeds row ``r + 1``.  Each FIFO must delay its stream by
``w - n`` valid cycles so that, together with the ``n`` registers, one full
image row of delay separates consecutive window rows.

The FIFOs are modelled like a vendor FIFO core: a power-of-two ring with a
``data_count`` occupancy counter and a registered read path that takes
``latency`` cycles.  Reading starts once the occupancy passes ``w - n -
latency`` so the registered output lands exactly ``w - n`` cycles after the
write.  In steady state the counter therefore sits at ``w - n - 2`` (631 for a
640-wide frame and a 7 x 7 window).

Every piece of state advances only on cycles where ``valid`` is high, so idle
cycles anywhere in the stream are invisible at the output.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

from .errors import BadGeometry, DimensionMismatch
from .frames import BitFrame

FIFO_READ_LATENCY = 2


@dataclass(frozen=True)
class PipelineGeometry:
    w: int = 640
    h: int = 480
    n: int = 7
    m: int = 37

    def validate(self) -> "PipelineGeometry":
        w, h, n, m = self.w, self.h, self.n, self.m
        if w <= 0 or h <= 0:
            raise BadGeometry(f"frame size must be positive, got {w}x{h}")
        if n % 2 == 0:
            raise BadGeometry(f"window size must be odd, got {n}")
        if not 3 <= n <= min(w, h):
            raise BadGeometry(f"window size {n} outside [3, min(w, h)={min(w, h)}]")
        if not 0 <= m < n * n:
            raise BadGeometry(f"majority threshold {m} outside [0, {n * n})")
        return self

    @property
    def radius(self) -> int:
        return (self.n - 1) // 2

    @property
    def first_output_index(self) -> int:
        """Valid-input index of the first emitted sample, back to back."""
        return (self.n - 1) * self.w + (self.n - 1)


def _next_pow2(x: int) -> int:
    return 1 << max(0, x - 1).bit_length()


class LineFifo:
    """Single-bit synchronous FIFO with occupancy counter and a fill trigger.

    ``clock(din)`` is one rising edge: write (if ``wr_en``), read (if
    ``rd_en``) and advance the registered output.  The returned bit is what
    ``dout`` shows after that edge.
    """

    def __init__(self, delay: int, capacity: int | None = None, latency: int = FIFO_READ_LATENCY):
        if delay < 0:
            raise ValueError("delay must be non-negative")
        self.delay = delay
        self.latency = min(latency, delay)
        self.trigger = delay - self.latency
        self.capacity = capacity if capacity is not None else _next_pow2(delay)
        if self.capacity & (self.capacity - 1) or self.capacity < self.trigger + 1:
            raise ValueError(f"capacity {self.capacity} cannot hold a {delay}-cycle line")
        self._mask = self.capacity - 1
        self.reset()

    def reset(self):
        self.slots = bytearray(self.capacity)
        self.head = 0
        self.tail = 0
        self.occupancy = 0
        self.rd_en = 0
        self.wr_en = 0
        self._out = [0] * self.latency

    def clock(self, din: int) -> int:
        if self.wr_en:
            self.slots[self.tail] = din
            self.tail = (self.tail + 1) & self._mask
            self.occupancy += 1
            if self.occupancy > self.capacity:
                raise AssertionError(f"FIFO overflow: occupancy {self.occupancy} > {self.capacity}")
            if not self.rd_en and self.occupancy > self.trigger:
                self.rd_en = 1
        if self.rd_en:
            item = self.slots[self.head]
            self.head = (self.head + 1) & self._mask
            self.occupancy -= 1
        else:
            item = 0
        out = self._out
        if not out:
            return item
        out.insert(0, item)
        return out.pop()


class SignalTrace:
    """Per-cycle CSV trace of the pipeline's observable signals."""

    def __init__(self, fh, n_fifos: int):
        self._writer = csv.writer(fh, lineterminator="\n")
        self._writer.writerow(
            ["cycle", "input", "valid"]
            + [f"fifo{i}_occupancy" for i in range(n_fifos)]
            + ["window_sum", "output", "geometric_valid", "paper_valid48"]
        )

    def record(self, cycle, bit, valid, occupancies, wsum, out, geo_valid, pv48):
        self._writer.writerow([cycle, bit, valid, *occupancies, wsum, out, geo_valid, pv48])


def window_sum(wmat) -> int:
    return sum(sum(row) for row in wmat)


def operator_output(total: int, m: int) -> int:
    return 1 if total > m else 0


class WindowPipeline:
    """Window generator plus window operator, stepped one clock at a time."""

    def __init__(self, geom: PipelineGeometry, trace: SignalTrace | None = None):
        self.geom = geom.validate()
        n, w = geom.n, geom.w
        self.fifos = [LineFifo(w - n) for _ in range(n - 1)]
        self.trace = trace
        self._rowmask = (1 << n) - 1
        self.reset()

    def reset(self):
        n = self.geom.n
        # rows[r] bit c is wmat[r][c]; bit 0 is the newest register in the row.
        self.rows = [0] * n
        self.total = 0
        self.cycle = 0
        self.cycles_seen = 0
        self.x = self.geom.w - 1
        self.y = -1
        self.first_valid_index = None
        self.max_occupancy = 0
        for f in self.fifos:
            f.reset()
        self.fifos[0].wr_en = 1

    @property
    def wmat(self):
        n = self.geom.n
        return [[(row >> c) & 1 for c in range(n)] for row in self.rows]

    @property
    def occupancies(self):
        return [f.occupancy for f in self.fifos]

    @property
    def cursor(self):
        return (self.x, self.y, self.cycles_seen)

    def paper_valid48(self) -> int:
        # The original design let data through after n*n - 1 = 48 clocks.  It
        # is kept as a trace signal only: a 7 x 7 window needs six full lines
        # before it is primed.
        return 1 if self.cycles_seen > self.geom.n * self.geom.n - 1 else 0

    def geometric_valid(self) -> int:
        r = self.geom.n - 1
        return 1 if self.cycles_seen and self.x >= r and self.y >= r else 0

    def step(self, bit: int, valid: int = 1):
        """Clock the pipeline once.

        Returns ``(out, (row, col))`` when the window is fully inside the
        frame, else ``None``.
        """
        self.cycle += 1
        if not valid:
            if self.trace is not None:
                self._record(bit, 0, None)
            return None

        g = self.geom
        n = g.n
        x = self.x + 1
        if x == g.w:
            x = 0
            y = self.y + 1
            self.y = 0 if y == g.h else y
        self.x = x
        self.cycles_seen += 1

        top = n - 1
        mask = self._rowmask
        rows = self.rows
        fifos = self.fifos
        total = self.total
        entering = bit & 1
        for r in range(top):
            row = rows[r]
            leaving = row >> top
            rows[r] = ((row << 1) & mask) | entering
            total += entering - leaving
            fifo = fifos[r]
            entering = fifo.clock(leaving)
            if fifo.occupancy > self.max_occupancy:
                self.max_occupancy = fifo.occupancy
            if fifo.rd_en and r + 1 < top:
                fifos[r + 1].wr_en = 1
        row = rows[top]
        rows[top] = ((row << 1) & mask) | entering
        total += entering - (row >> top)
        self.total = total

        sample = None
        if self.y >= top and x >= top:
            if self.first_valid_index is None:
                self.first_valid_index = self.cycles_seen - 1
            r = g.radius
            sample = (1 if total > g.m else 0, (self.y - r, x - r))
        if self.trace is not None:
            self._record(bit, 1, sample)
        return sample

    def _record(self, bit, valid, sample):
        self.trace.record(
            self.cycle - 1,
            bit,
            valid,
            self.occupancies,
            self.total,
            operator_output(self.total, self.geom.m),
            0 if sample is None else 1,
            self.paper_valid48(),
        )


def make_pipeline(geom: PipelineGeometry, trace: SignalTrace | None = None) -> WindowPipeline:
    return WindowPipeline(geom, trace)


def run_frame(pipeline: WindowPipeline, frame: BitFrame) -> BitFrame:
    g = pipeline.geom
    if (frame.w, frame.h) != (g.w, g.h):
        raise DimensionMismatch(f"frame is {frame.w}x{frame.h}, pipeline expects {g.w}x{g.h}")
    pipeline.reset()
    out = BitFrame.zeros(g.w, g.h)
    dst = out.bits
    step = pipeline.step
    for bit in frame.flat().tolist():
        sample = step(bit, 1)
        if sample is not None:
            dst[sample[1]] = sample[0]
    return out
