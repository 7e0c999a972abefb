from __future__ import annotations

from hjnet import OrientedGraph, eikonal_power, tilted_quadratic


def mixed_network():
    """Four vertices, a triangle with a pendant arc, three Hamiltonian types."""
    g = OrientedGraph(list("abcd"), [("e1", "a", "b"), ("e2", "b", "c"), ("e3", "c", "a"), ("e4", "c", "d")])
    specs = {
        "e1": tilted_quadratic([0.5, -0.3, 0.2], [0.5, 1.0, 0.2]),
        "e2": eikonal_power(2, [1.0, 0.2]),
        "e3": tilted_quadratic(0.3, 0.4),
        "e4": eikonal_power(1, [0.5, 2.0]),
    }
    return g, specs
