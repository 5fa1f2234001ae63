import math

import pytest

from toflab import ClockModel, Node, Point2D, PpmDrift, PropagationConstants

C3E8 = PropagationConstants(3e8)
QUANT_S = 3e-12  # three picoseconds


def node(node_id, role, x, y, ppm=0):
    return Node(node_id, role, Point2D(x, y), ClockModel(PpmDrift.from_ppm(ppm)))


def triangle_tag(d_sa, d_sb, d_ab):
    """Tag position with |S-A| = d_sa, |S-B| = d_sb for A=(0,0), B=(d_ab,0)."""
    x = (d_sa**2 - d_sb**2 + d_ab**2) / (2 * d_ab)
    return x, math.sqrt(d_sa**2 - x**2)


@pytest.fixture
def c3e8():
    return C3E8


_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def acceptance():
    def report(number, name, ok, detail=""):
        _ACCEPTANCE[number] = f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {name}  {detail}"
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[number])


def random_geometry(rng, min_angle_deg=20.0, span=100.0):
    """Three anchors forming a triangle with every angle >= min_angle_deg,
    and a tag drawn uniformly inside it."""
    import numpy as np

    while True:
        pts = rng.uniform(-span / 2, span / 2, size=(3, 2))
        angles = []
        for i in range(3):
            u = pts[(i + 1) % 3] - pts[i]
            v = pts[(i + 2) % 3] - pts[i]
            cos = u @ v / (np.linalg.norm(u) * np.linalg.norm(v))
            angles.append(math.degrees(math.acos(np.clip(cos, -1, 1))))
        if min(angles) >= min_angle_deg:
            break
    tag = rng.dirichlet(np.ones(3)) @ pts
    return pts, tag
