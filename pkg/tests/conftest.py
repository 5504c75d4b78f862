"""Shared graph builders for the test suite."""

from fractions import Fraction

import pytest

from forestends.forest import GeometricGraph, WindowSpec
from forestends.generators import fixture_corridor, fixture_window
from forestends.geometry import JordanPolygon, Point


def path_graph(points, oriented=False):
    pts = tuple(Point(*p) for p in points)
    return GeometricGraph(pts, tuple((i, i + 1) for i in range(len(pts) - 1)), oriented)


def star_graph(arm_length=5):
    """Centre at the origin with arms along +x, -x and +y."""
    vertices = [Point(0, 0)]
    edges = []
    for dx, dy in ((1, 0), (-1, 0), (0, 1)):
        prev = 0
        for step in range(1, arm_length + 1):
            vertices.append(Point(dx * step, dy * step))
            edges.append((prev, len(vertices) - 1))
            prev = len(vertices) - 1
    return GeometricGraph(tuple(vertices), tuple(edges))


@pytest.fixture
def unit_square():
    return JordanPolygon((Point(0, 0), Point(1, 0), Point(1, 1), Point(0, 1)))


@pytest.fixture
def small_window():
    return WindowSpec(1, 3)


@pytest.fixture(scope="session")
def corridor_graph():
    return fixture_corridor(16)


@pytest.fixture(scope="session")
def corridor_window():
    return fixture_window(16)


@pytest.fixture
def half():
    return Fraction(1, 2)
