import numpy as np
import pytest

from hetscan import synth
from hetscan.grid import ImageGrid


def to_grid(values, max_value=65535):
    """Map a real 2-D array linearly onto [0, max_value] integer pixels."""
    a = np.asarray(values, dtype=float)
    a = (a - a.min()) / (a.max() - a.min()) * max_value
    return ImageGrid.from_array(np.round(a).astype(np.int64), max_value)


def iid_image(seed, side=128):
    return to_grid(synth.gen_white(side * side, seed).reshape(side, side))


def rowwise_fgn_image(seed, side=128, hurst=0.8):
    # gen_fgn needs n >= 256; a prefix of stationary fGn is still fGn
    rows = [synth.gen_fgn(hurst, 256, seed * 100_003 + i)[:side] for i in range(side)]
    return to_grid(np.array(rows))


def symmetric_image(seed, side=64):
    a = np.random.Generator(np.random.PCG64(seed)).integers(0, 256, (side, side))
    return ImageGrid.from_array(np.triu(a) + np.triu(a, 1).T, 255)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(20240601))


# acceptance outcomes, printed as one line per criterion at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
