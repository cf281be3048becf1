from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest

from poncelet_lab.dynamics import find_family
from poncelet_lab.projective import Conic

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def unit_circle() -> Conic:
    return Conic.circle(1.0)


def concentric(n: int, r: float | None = None):
    """Concentric circles; the inner radius closes after n steps unless given."""
    from poncelet_lab.dynamics import PonceletConfig

    r = math.cos(math.pi / n) if r is None else r
    return PonceletConfig(Conic.circle(1.0), Conic.circle(r), n, scale=r)


@pytest.fixture(scope="session")
def bicentric3():
    # Euler: d^2 = R^2 - 2 R r with R = 1, d = 0.2 gives r = 0.48
    return find_family(Conic.circle(1.0), Conic.circle(1.0, (0.2, 0.0)), 3)


@pytest.fixture(scope="session")
def bicentric4():
    return find_family(Conic.circle(1.0), Conic.circle(1.0, (0.2, 0.0)), 4)


@pytest.fixture(scope="session")
def elliptic3():
    return find_family(Conic.ellipse(2.0, 1.0), Conic.circle(1.0, (0.3, 0.1)), 3)


@pytest.fixture(scope="session")
def elliptic4():
    return find_family(Conic.ellipse(2.0, 1.0), Conic.circle(1.0, (0.3, 0.1)), 4)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_polygon(rng, n: int | None = None, min_area: float = 0.1):
    """Random (generally self-intersecting) polygon with |A| above ``min_area``."""
    from poncelet_lab.centers import Polygon, polygon_area

    while True:
        m = int(rng.integers(3, 11)) if n is None else n
        poly = Polygon(rng.uniform(-2, 2, size=(m, 2)).astype(complex))
        if abs(polygon_area(poly)) > min_area:
            return poly


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.report_lines():
        terminalreporter.write_line(line)
