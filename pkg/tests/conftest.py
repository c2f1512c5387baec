import sys

import numpy as np
import pytest


def square(x0, y0, side=1.0):
    return np.array([(x0, y0), (x0 + side, y0), (x0 + side, y0 + side), (x0, y0 + side)], dtype=float)


def random_star(rng, n=9, center=(0.0, 0.0), rmin=0.3, rmax=1.0):
    """Star-shaped (hence simple) polygon with sorted angles and random radii."""
    ang = np.sort(rng.uniform(0, 2 * np.pi, n))
    r = rng.uniform(rmin, rmax, n)
    return np.column_stack([center[0] + r * np.cos(ang), center[1] + r * np.sin(ang)])


def mc_inside(points, ring):
    """Even-odd ray casting, written independently of the package."""
    x = points[:, 0][:, None]
    y = points[:, 1][:, None]
    x1, y1 = ring[:, 0][None], ring[:, 1][None]
    x2, y2 = np.roll(ring[:, 0], -1)[None], np.roll(ring[:, 1], -1)[None]
    cond = (y1 > y) != (y2 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xc = (x2 - x1) * (y - y1) / (y2 - y1) + x1
    return ((cond & (x < xc)).sum(axis=1) % 2) == 1


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.write_sep("=", "acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
