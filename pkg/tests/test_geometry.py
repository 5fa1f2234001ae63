import pytest
from hypothesis import given
from hypothesis import strategies as st

from toflab.geometry import (
    DEFAULT_CONSTANTS,
    Node,
    Point2D,
    PropagationConstants,
    Role,
    distance,
    tof,
    true_tdoa,
)

coord = st.floats(min_value=-1e4, max_value=1e4, allow_nan=False)
points = st.builds(Point2D, coord, coord)
C = PropagationConstants(3e8)


@pytest.mark.parametrize("b, expected", [((0, 0), 0.0), ((3, 4), 5.0), ((10, 0), 10.0)])
def test_distance(b, expected):
    assert distance(Point2D(0, 0), Point2D(*b)) == expected


@pytest.mark.parametrize("meters, ps", [(30, 100_000), (0, 0), (15, 50_000)])
def test_tof(meters, ps):
    assert tof(Point2D(0, 0), Point2D(meters, 0), C) == ps


def test_true_tdoa_examples():
    assert true_tdoa(Point2D(0, 0), Point2D(30, 0), Point2D(45, 0), C) == pytest.approx(5e-8, rel=1e-15)
    assert true_tdoa(Point2D(0, 5), Point2D(-3, 0), Point2D(3, 0), C) == 0.0


def test_defaults_and_validation():
    assert DEFAULT_CONSTANTS.c == 299_792_458
    with pytest.raises(ValueError):
        PropagationConstants(0)
    with pytest.raises(ValueError):
        Point2D(float("nan"), 0)


def test_node_clock_takes_node_id():
    n = Node("anchor-7", "mirror", Point2D(1, 2))
    assert n.role is Role.MIRROR and n.role.is_anchor
    assert n.clock.clock_id == "anchor-7"


@given(points, points, points)
def test_tdoa_antisymmetric_and_bounded(s, a, b):
    t_ab = true_tdoa(s, a, b, C)
    assert t_ab == -true_tdoa(s, b, a, C)
    assert abs(t_ab) <= distance(a, b) / C.c * (1 + 1e-12) + 1e-15
