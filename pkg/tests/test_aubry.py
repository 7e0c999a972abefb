from __future__ import annotations

import numpy as np
import pytest

from hjnet.aubry import aubry_representation, aubry_representation_detail, detect_aubry, verify_spring
from hjnet.discrete import EdgeMapTable, beta_cycle, solve_dfe
from hjnet.errors import EmptyAubry
from hjnet.graph import OrientedGraph
from hjnet.selftest import random_affine_table, random_graph


@pytest.fixture
def circuit3():
    g = OrientedGraph(["x", "y", "z"], [("e1", "x", "y"), ("e2", "y", "z"), ("e3", "z", "x")])
    coeffs = {"e1": (0.5, 1.0), "e2": (0.5, 2.0), "e3": (0.5, 0.5),
              "-e1": (0.5, 10.0), "-e2": (0.5, 10.0), "-e3": (0.5, 10.0)}
    return EdgeMapTable.affine(g, coeffs)


@pytest.fixture
def pendant():
    g = OrientedGraph(["x", "y", "z", "w"],
                      [("e1", "x", "y"), ("e2", "y", "z"), ("e3", "z", "x"), ("f", "x", "w")])
    coeffs = {"e1": (0.5, 1.0), "e2": (0.5, 2.0), "e3": (0.5, 0.5),
              "-e1": (0.5, 10.0), "-e2": (0.5, 10.0), "-e3": (0.5, 10.0),
              "f": (0.5, 5.0), "-f": (0.5, 10.0)}
    return EdgeMapTable.affine(g, coeffs)


class TestDetect:
    def test_two_vertices(self, asym_table):
        U = solve_dfe(asym_table).U
        rep = detect_aubry(asym_table, U)
        assert rep.members == {"x", "y"}
        assert rep.witnesses["x"].edges == ("-e", "e")[::-1] or rep.witnesses["x"].is_circuit
        for y, c in rep.witnesses.items():
            assert c.is_circuit and c.origin == y
            assert abs(beta_cycle(asym_table, c) - U[y]) <= rep.epsilon[y]

    def test_circuit(self, circuit3):
        U = solve_dfe(circuit3).U
        assert detect_aubry(circuit3, U).members == {"x", "y", "z"}

    def test_pendant_excluded(self, pendant):
        U = solve_dfe(pendant).U
        rep = detect_aubry(pendant, U)
        assert "w" not in rep.members
        assert rep.members == {"x", "y", "z"}

    def test_empty(self, asym_table):
        U = {x: v + 1.0 for x, v in solve_dfe(asym_table).U.items()}
        with pytest.raises(EmptyAubry):
            detect_aubry(asym_table, U)

    def test_removable_loop(self):
        g = OrientedGraph(["x", "y"], [("e", "x", "y"), ("l", "x", "x")])
        t = EdgeMapTable.affine(g, {"e": (0.5, 1.0), "-e": (0.5, 0.25), "l": (0.5, 5.0), "-l": (0.5, 0.4)})
        rep = detect_aubry(t, solve_dfe(t).U)
        assert rep.removable_loops == ["l"]

    def test_monotone_in_epsilon(self):
        rng = np.random.default_rng(7)
        for _ in range(30):
            t = random_affine_table(rng, random_graph(rng, max_vertices=4, extra=2))
            U = solve_dfe(t).U
            prev = set()
            for eps in (1e-9, 1e-6, 1e-2, 1.0):
                m = detect_aubry(t, U, eps).members
                assert prev <= m
                prev = m


class TestSpring:
    def test_circuit_rotations(self, circuit3):
        U = solve_dfe(circuit3).U
        c = circuit3.graph.path("e1,e2,e3")
        for j in range(3):
            assert verify_spring(circuit3, U, c.rotation(j))

    def test_two_vertices(self, asym_table):
        U = solve_dfe(asym_table).U
        g = asym_table.graph
        assert verify_spring(asym_table, U, g.path("e,-e").rotation(1))
        assert verify_spring(asym_table, U, g.path("-e,e"))
        assert beta_cycle(asym_table, g.path("e,-e")) == pytest.approx(U["x"], abs=1e-9)

    def test_perturbed(self, asym_table):
        U = solve_dfe(asym_table).U
        U["y"] += 0.1
        check = verify_spring(asym_table, U, asym_table.graph.path("-e,e"))
        assert not check
        assert any(k >= 0 for _, k, _ in check.violations)


class TestRepresentation:
    def test_pendant(self, pendant):
        U = solve_dfe(pendant).U
        rep = detect_aubry(pendant, U)
        det = aubry_representation_detail(pendant, U, rep, "w")
        assert det.value == pytest.approx(U["w"], abs=1e-9)
        assert det.path.edges == ("f",)
        assert det.identity_error <= 1e-9

    def test_member(self, asym_table):
        U = solve_dfe(asym_table).U
        rep = detect_aubry(asym_table, U)
        assert aubry_representation(asym_table, U, rep, "x") == U["x"]
        assert aubry_representation(asym_table, U, rep, "y") == pytest.approx(1.5, abs=1e-9)

    def test_random(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            t = random_affine_table(rng, random_graph(rng, max_vertices=5, extra=2))
            U = solve_dfe(t).U
            rep = detect_aubry(t, U)
            for x in U:
                assert abs(aubry_representation(t, U, rep, x) - U[x]) <= 10 * rep.epsilon[x]
