import csv
import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_frame
from oracles import brute_majority, popcount
from skinseg.errors import BadGeometry, DimensionMismatch
from skinseg.frames import BitFrame
from skinseg.golden import majority_erode
from skinseg.window_pipeline import (
    LineFifo,
    PipelineGeometry,
    SignalTrace,
    make_pipeline,
    operator_output,
    run_frame,
    window_sum,
)

DEFAULT = PipelineGeometry()


def test_paper_geometry_allocation():
    p = make_pipeline(DEFAULT)
    assert len(p.fifos) == 6
    assert {f.capacity for f in p.fifos} == {1024}
    assert {f.delay for f in p.fifos} == {633}
    assert {f.trigger for f in p.fifos} == {631}


def test_small_geometry_allocation():
    p = make_pipeline(PipelineGeometry(8, 8, 3, 4))
    assert len(p.fifos) == 2
    assert [f.capacity for f in p.fifos] == [8, 8]


@pytest.mark.parametrize(
    "geom",
    [
        PipelineGeometry(8, 8, 4, 4),
        PipelineGeometry(8, 8, 1, 0),
        PipelineGeometry(8, 4, 5, 4),
        PipelineGeometry(8, 8, 3, 9),
        PipelineGeometry(8, 8, 3, -1),
        PipelineGeometry(0, 8, 3, 4),
    ],
)
def test_bad_geometry(geom):
    with pytest.raises(BadGeometry):
        make_pipeline(geom)


# -- LineFifo -----------------------------------------------------------------

@pytest.mark.parametrize("delay", [0, 1, 2, 3, 5, 633])
def test_fifo_delay(delay, rng):
    fifo = LineFifo(delay)
    fifo.wr_en = 1
    data = rng.integers(0, 2, size=delay + 200).tolist()
    out = [fifo.clock(d) for d in data]
    assert out[delay:] == data[: len(data) - delay]
    assert out[:delay] == [0] * delay


def test_fifo_occupancy_plateau():
    fifo = LineFifo(633)
    fifo.wr_en = 1
    seen = []
    for _ in range(2000):
        fifo.clock(1)
        seen.append(fifo.occupancy)
    assert seen[:3] == [1, 2, 3]
    assert max(seen) == 631
    assert seen[-1] == 631
    assert seen.index(631) == 630


def test_fifo_idle_without_write_enable():
    fifo = LineFifo(10)
    for _ in range(50):
        assert fifo.clock(1) == 0
    assert fifo.occupancy == 0 and not fifo.rd_en


def test_fifo_overflow_is_detected():
    fifo = LineFifo(6, capacity=8)
    fifo.wr_en = 1
    fifo.trigger = 100  # sabotage the fill protocol
    with pytest.raises(AssertionError):
        for _ in range(9):
            fifo.clock(1)


def test_fifo_capacity_must_hold_a_line():
    with pytest.raises(ValueError):
        LineFifo(633, capacity=512)


# -- window operator ------------------------------------------------------------

def test_window_sum_examples(rng):
    assert window_sum([[0] * 7 for _ in range(7)]) == 0
    assert window_sum([[1] * 7 for _ in range(7)]) == 49
    flat = np.zeros(49, dtype=int)
    flat[rng.choice(49, size=38, replace=False)] = 1
    wmat = flat.reshape(7, 7).tolist()
    assert window_sum(wmat) == popcount(wmat) == 38


@pytest.mark.parametrize("total, m, expected", [(49, 37, 1), (37, 37, 0), (38, 37, 1), (0, 0, 0), (1, 0, 1)])
def test_operator_output(total, m, expected):
    assert operator_output(total, m) == expected


# -- stepping -------------------------------------------------------------------

def test_first_output_index_full_size():
    p = make_pipeline(DEFAULT)
    first = None
    for i in range(7 * 640):
        if p.step(1, 1) is not None:
            first = i
            break
    assert first == 6 * 640 + 6 == DEFAULT.first_output_index
    assert p.first_valid_index == first


def test_first_sample_center_and_value():
    geom = PipelineGeometry(10, 8, 3, 4)
    p = make_pipeline(geom)
    samples = [p.step(1, 1) for _ in range(geom.first_output_index + 1)]
    assert all(s is None for s in samples[:-1])
    assert samples[-1] == (1, (1, 1))


def test_steady_state_occupancy_full_size():
    p = make_pipeline(DEFAULT)
    for _ in range(200 * 640):
        p.step(1, 1)
    assert p.occupancies == [631] * 6
    assert p.max_occupancy == 631


def _snapshot(p):
    return (
        list(p.rows), p.total, p.cycles_seen, p.x, p.y,
        [(bytes(f.slots), f.head, f.tail, f.occupancy, f.rd_en, f.wr_en, list(f._out)) for f in p.fifos],
    )


def test_stall_leaves_state_unchanged(rng):
    p = make_pipeline(PipelineGeometry(16, 12, 5, 12))
    for bit in rng.integers(0, 2, size=100).tolist():
        p.step(bit, 1)
    before = _snapshot(p)
    assert p.step(1, 0) is None
    assert _snapshot(p) == before
    assert p.cycle == 101


def test_delay_law_every_cycle(rng):
    # wmat[r][c] is the input from r*w + c valid cycles ago (zero before start)
    geom = PipelineGeometry(13, 9, 5, 10)
    p = make_pipeline(geom)
    history = []
    for bit in rng.integers(0, 2, size=geom.w * geom.h).tolist():
        p.step(bit, 1)
        history.append(bit)
        t = len(history) - 1
        for r in range(geom.n):
            for c in range(geom.n):
                k = t - r * geom.w - c
                assert p.wmat[r][c] == (history[k] if k >= 0 else 0), (t, r, c)
        assert p.total == window_sum(p.wmat)


def test_impulse_trajectory_default_width():
    geom = PipelineGeometry(640, 16, 7, 37)
    p = make_pipeline(geom)
    k = 100
    positions = {}
    for t in range(k + 6 * 640 + 7):
        p.step(1 if t == k else 0, 1)
        hits = [(r, c) for r in range(7) for c in range(7) if p.wmat[r][c]]
        assert len(hits) <= 1
        if hits:
            positions[t] = hits[0]
    for (r, c) in [(0, 0), (0, 6), (1, 0), (3, 4), (6, 6)]:
        assert positions[k + r * 640 + c] == (r, c)


@pytest.mark.parametrize("w, n", [(3, 3), (4, 3), (5, 5), (6, 5), (7, 3)])
def test_narrow_frames(w, n, rng):
    # line delays of 0 and 1 cycles exercise the reduced-latency FIFO
    h = max(n, 6)
    geom = PipelineGeometry(w, h, n, n * n // 2)
    frame = random_frame(rng, w, h, 0.6)
    assert run_frame(make_pipeline(geom), frame) == majority_erode(frame, n, geom.m)


def test_paper_valid48():
    p = make_pipeline(DEFAULT)
    assert p.paper_valid48() == 0
    for _ in range(48):
        p.step(1, 1)
    assert p.cycles_seen == 48 and p.paper_valid48() == 0
    p.step(1, 1)
    assert p.paper_valid48() == 1


# -- whole frames -----------------------------------------------------------------

def test_run_frame_zero():
    geom = PipelineGeometry(64, 48, 7, 37)
    assert run_frame(make_pipeline(geom), BitFrame.zeros(64, 48)).count() == 0


def test_run_frame_all_ones_border():
    geom = PipelineGeometry(64, 48, 7, 37)
    out = run_frame(make_pipeline(geom), BitFrame(np.ones((48, 64), np.uint8)))
    expected = np.zeros((48, 64), np.uint8)
    expected[3:-3, 3:-3] = 1
    np.testing.assert_array_equal(out.bits, expected)


def test_run_frame_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        run_frame(make_pipeline(PipelineGeometry(64, 48, 7, 37)), BitFrame.zeros(48, 64))


@pytest.mark.parametrize("n, m", [(3, 4), (3, 6), (5, 12), (5, 18), (7, 24), (7, 37)])
def test_run_frame_matches_brute_force(n, m, rng):
    frame = random_frame(rng, 29, 17)
    got = run_frame(make_pipeline(PipelineGeometry(29, 17, n, m)), frame)
    assert got.bits.tolist() == brute_majority(frame.bits.tolist(), n, m)


def test_pipeline_reuse_resets_between_frames(rng):
    geom = PipelineGeometry(20, 14, 5, 12)
    p = make_pipeline(geom)
    frames = [random_frame(rng, 20, 14) for _ in range(3)]
    for f in frames:
        assert run_frame(p, f) == majority_erode(f, 5, 12)


def test_back_to_back_frames_without_reset(rng):
    geom = PipelineGeometry(18, 11, 5, 14)
    p = make_pipeline(geom)
    frames = [random_frame(rng, 18, 11) for _ in range(3)]
    outs = [np.zeros((11, 18), np.uint8) for _ in frames]
    for i, f in enumerate(frames):
        for bit in f.flat().tolist():
            s = p.step(bit, 1)
            if s is not None:
                outs[i][s[1]] = s[0]
    for f, o in zip(frames, outs):
        np.testing.assert_array_equal(o, majority_erode(f, 5, 14).bits)


@settings(max_examples=40, deadline=None)
@given(
    w=st.integers(5, 20),
    h=st.integers(5, 14),
    n=st.sampled_from([3, 5]),
    frac=st.floats(0, 0.999),
    seed=st.integers(0, 2**32 - 1),
)
def test_equivalence_property(w, h, n, frac, seed):
    m = int(frac * n * n)
    frame = random_frame(np.random.default_rng(seed), w, h)
    assert run_frame(make_pipeline(PipelineGeometry(w, h, n, m)), frame) == majority_erode(frame, n, m)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), stalls=st.lists(st.integers(0, 3), min_size=1, max_size=30))
def test_stall_transparency_property(seed, stalls):
    geom = PipelineGeometry(12, 9, 3, 5)
    frame = random_frame(np.random.default_rng(seed), 12, 9)
    p = make_pipeline(geom)
    out = np.zeros((9, 12), np.uint8)
    for i, bit in enumerate(frame.flat().tolist()):
        for _ in range(stalls[i % len(stalls)]):
            assert p.step(bit ^ 1, 0) is None
        s = p.step(bit, 1)
        if s is not None:
            out[s[1]] = s[0]
    np.testing.assert_array_equal(out, majority_erode(frame, 3, 5).bits)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.sampled_from([3, 5, 7]))
def test_monotone_under_bit_flips(seed, n):
    rng = np.random.default_rng(seed)
    geom = PipelineGeometry(16, 12, n, int(0.75 * n * n))
    frame = random_frame(rng, 16, 12)
    zeros = np.argwhere(frame.bits == 0)
    if not len(zeros):
        return
    y, x = zeros[rng.integers(len(zeros))]
    flipped = BitFrame(frame.bits.copy())
    flipped.bits[y, x] = 1
    p = make_pipeline(geom)
    before, after = run_frame(p, frame), run_frame(p, flipped)
    assert not np.any((before.bits == 1) & (after.bits == 0))


# -- trace ------------------------------------------------------------------------

def test_trace_columns_and_rows(rng):
    geom = PipelineGeometry(9, 7, 3, 4)
    fh = io.StringIO()
    p = make_pipeline(geom, SignalTrace(fh, 2))
    p.step(0, 0)
    for bit in rng.integers(0, 2, size=30).tolist():
        p.step(bit, 1)
    rows = list(csv.reader(io.StringIO(fh.getvalue())))
    assert rows[0] == [
        "cycle", "input", "valid", "fifo0_occupancy", "fifo1_occupancy",
        "window_sum", "output", "geometric_valid", "paper_valid48",
    ]
    assert len(rows) == 32
    assert [int(r[0]) for r in rows[1:]] == list(range(31))
    assert rows[1][2] == "0"
    first_geo = next(int(r[0]) for r in rows[1:] if r[7] == "1")
    # one stall cycle precedes the stream
    assert first_geo == 1 + geom.first_output_index
