from __future__ import annotations

import pytest

from hjnet import EdgeMapTable, OrientedGraph


@pytest.fixture
def pair():
    """Two vertices joined by one arc ``e: x -> y``."""
    return OrientedGraph(["x", "y"], [("e", "x", "y")])


@pytest.fixture
def loop():
    return OrientedGraph(["x"], [("l", "x", "x")])


@pytest.fixture
def triangle():
    return OrientedGraph(["x", "y", "z"], [("e1", "x", "y"), ("e2", "y", "z"), ("e3", "z", "x")])


@pytest.fixture
def asym_table(pair):
    return EdgeMapTable.affine(pair, {"e": (0.5, 1.0), "-e": (0.5, 0.25)})
