import numpy as np
import pytest
from hypothesis import strategies as st

from arcik.geometry import unit


def random_unit(rng):
    return unit(rng.normal(size=3))


def random_chain(rng, n, min_len=5.0, max_len=80.0, min_cos=0.2):
    """Start, base orientation and ``n`` path points whose bends all stay below pi.

    Each chord keeps ``cos(angle to incoming tangent) >= min_cos``; the end
    tangent of a circular arc is the incoming tangent reflected about the chord.
    """
    start = rng.uniform(-50, 50, size=3)
    v = random_unit(rng)
    t = v
    pts = []
    a = start
    for _ in range(n):
        while True:
            d = random_unit(rng)
            if d @ t >= min_cos:
                break
        b = a + rng.uniform(min_len, max_len) * d
        pts.append(b)
        t = 2.0 * (t @ d) * d - t
        a = b
    return start, v, np.array(pts)


@st.composite
def chains(draw, max_n=8):
    seed = draw(st.integers(0, 2**32 - 1))
    n = draw(st.integers(1, max_n))
    return random_chain(np.random.default_rng(seed), n)


class PointCost:
    """Field stub: fixed cost at listed points, zero elsewhere."""

    def __init__(self, table):
        self.table = [(np.asarray(p, dtype=float), c) for p, c in table]

    def cost(self, p):
        p = np.asarray(p, dtype=float)
        out = np.zeros(p.shape[:-1])
        for q, c in self.table:
            out = np.where(np.all(p == q, axis=-1), c, out)
        return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
