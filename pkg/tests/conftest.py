import numpy as np
import pytest

from skinseg.frames import BitFrame


@pytest.fixture
def rng():
    return np.random.default_rng(20141016)


def random_frame(rng, w, h, density=None):
    p = rng.uniform(0.3, 0.95) if density is None else density
    return BitFrame((rng.random((h, w)) < p).astype(np.uint8))


def block_frame(w, h, top, left, size):
    bits = np.zeros((h, w), dtype=np.uint8)
    bits[top:top + size, left:left + size] = 1
    return BitFrame(bits)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for the acceptance summary."""

    def check(label, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}" + (f" ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
