from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hjnet import arc
from hjnet.discrete import (AffineEdgeMap, EdgeMapTable, TabulatedEdgeMap, apply_operator, beta_cycle,
                            check_subsolution, check_supersolution, circuit_f, dfe_residual, evaluate_policy,
                            representation_U, rho_path, solve_dfe)
from hjnet.errors import BracketFailure, NoConvergence, ValidationError
from hjnet.graph import OrientedGraph
from hjnet.hamiltonian import eikonal_power
from helpers import mixed_network
from hjnet.selftest import (random_affine_table, random_graph, random_path, random_subsolution,
                            random_supersolution)


@pytest.fixture(scope="module")
def numeric_pair():
    g = OrientedGraph(["x", "y"], [("e", "x", "y")])
    return EdgeMapTable.numeric(g, {"e": eikonal_power(1, 1.0)}, 1.0)


class TestMaps:
    def test_affine_requires_contraction(self):
        with pytest.raises(ValidationError):
            AffineEdgeMap(1.0, 0.0)

    def test_tabulated(self):
        m = TabulatedEdgeMap([0.0, 1.0, 2.0], [1.0, 1.5, 1.8])
        assert m(0.5) == pytest.approx(1.25)
        assert m(3.0) == pytest.approx(2.1)
        assert m.fixed_point() == pytest.approx(1.8 + 0.3 * (m.fixed_point() - 2.0), abs=1e-9)

    def test_tabulated_rejects_steep(self):
        with pytest.raises(ValidationError):
            TabulatedEdgeMap([0.0, 1.0], [0.0, 1.5])

    def test_table_needs_both_orientations(self, pair):
        with pytest.raises(ValidationError):
            EdgeMapTable.affine(pair, {"e": (0.5, 1.0)})


class TestPathMap:
    def test_affine_composition(self, pair):
        t = EdgeMapTable.affine(pair, {"e": (0.5, 1.0), "-e": (0.5, 1.0)})
        assert rho_path(t, pair.path("e,-e"), 0.0) == pytest.approx(1.5)
        assert rho_path(t, pair.path("e"), 0.7) == t["e"](0.7)

    def test_concatenation(self, triangle):
        rng = np.random.default_rng(1)
        t = random_affine_table(rng, triangle)
        p, q = triangle.path("e1,e2"), triangle.path("e3,e1")
        a = 0.37
        assert rho_path(t, triangle.concat(p, q), a) == rho_path(t, q, rho_path(t, p, a))

    def test_numeric_composition(self, numeric_pair):
        g = numeric_pair.graph
        assert rho_path(numeric_pair, g.path("e,-e"), 0.0) == pytest.approx(1 - math.exp(-2), abs=1e-2)


class TestBeta:
    def test_affine(self, pair):
        t = EdgeMapTable.affine(pair, {"e": (0.5, 1.0), "-e": (0.5, 1.0)})
        assert beta_cycle(t, pair.path("e,-e")) == pytest.approx(2.0, abs=1e-9)

    def test_numeric(self, numeric_pair):
        g = numeric_pair.graph
        b = beta_cycle(numeric_pair, g.path("e,-e"))
        assert b == pytest.approx(1.0, abs=1e-2)
        assert b == pytest.approx(numeric_pair["e"].alpha_under, abs=1e-8)

    def test_not_a_cycle(self, pair, asym_table):
        with pytest.raises(ValidationError):
            beta_cycle(asym_table, pair.path("e"))

    def test_bracket_failure(self, loop):
        class Broken(AffineEdgeMap):
            def __call__(self, alpha):
                return alpha + 1.0
        t = EdgeMapTable(loop, {"l": Broken(0.5, 0.0), "-l": AffineEdgeMap(0.5, 0.0)})
        with pytest.raises(BracketFailure):
            beta_cycle(t, loop.path("l"))


class TestSolve:
    def test_symmetric(self, pair):
        t = EdgeMapTable.affine(pair, {"e": (0.5, 1.0), "-e": (0.5, 1.0)})
        U = solve_dfe(t).U
        assert U["x"] == pytest.approx(2.0, abs=1e-9) and U["y"] == pytest.approx(2.0, abs=1e-9)

    def test_asymmetric(self, asym_table):
        sol = solve_dfe(asym_table)
        assert sol.U["x"] == pytest.approx(1.0, abs=1e-9)
        assert sol.U["y"] == pytest.approx(1.5, abs=1e-9)
        assert sol.residual <= 1e-10

    def test_numeric(self, numeric_pair):
        sol = solve_dfe(numeric_pair)
        assert sol.U["x"] == pytest.approx(1.0, abs=1e-2) and sol.U["y"] == pytest.approx(1.0, abs=1e-2)
        assert sol.residual <= 1e-10
        for x in sol.U:
            assert sol.U[x] <= min(numeric_pair[e].alpha_over for e in numeric_pair.graph.in_star(x)) + 1e-10

    def test_jacobi_history_nonincreasing(self, asym_table):
        # from a supersolution the Jacobi iterates decrease
        sol = solve_dfe(asym_table, jacobi=True, polish=False)
        assert sol.method == "jacobi"
        assert sol.U["y"] == pytest.approx(1.5, abs=1e-9)

    def test_iteration_cap(self, asym_table):
        with pytest.raises(NoConvergence):
            solve_dfe(asym_table, max_iter=2, polish=False)

    def test_sub_and_super(self, asym_table, numeric_pair):
        for t in (asym_table, numeric_pair):
            g = t.graph
            assert check_subsolution(t, {x: t.c_star for x in g.vertices})
            assert check_supersolution(t, {x: t.C for x in g.vertices})
            U = solve_dfe(t).U
            assert check_subsolution(t, U) and check_supersolution(t, U)

    def test_policy_evaluation_fixed_point(self, asym_table):
        U = evaluate_policy(asym_table, {"x": "-e", "y": "e"})
        TU = apply_operator(asym_table, U)
        assert max(abs(U[x] - TU[x]) for x in U) <= 1e-12

    def test_mixed_network_residual(self):
        g, specs = mixed_network()
        t = EdgeMapTable.numeric(g, specs, 0.3)
        sol = solve_dfe(t)
        assert dfe_residual(t, sol.U) <= 1e-10
        U2 = solve_dfe(t, init={x: t.C + 100 for x in g.vertices}, jacobi=True).U
        assert max(abs(sol.U[x] - U2[x]) for x in g.vertices) <= 1e-9


class TestOracles:
    def test_circuit_f(self, asym_table, loop):
        assert circuit_f(asym_table, "x") == pytest.approx(1.0, abs=1e-9)
        t = EdgeMapTable.affine(loop, {"l": (0.5, 1.0), "-l": (0.5, 2.0)})
        assert circuit_f(t, "x") == pytest.approx(2.0, abs=1e-9)

    def test_circuit_f_numeric(self, numeric_pair):
        assert circuit_f(numeric_pair, "x") == pytest.approx(1.0, abs=1e-2)

    def test_representation(self, asym_table, numeric_pair):
        assert representation_U(asym_table, "x") == pytest.approx(1.0, abs=1e-9)
        assert representation_U(asym_table, "y") == pytest.approx(1.5, abs=1e-9)
        for x in ("x", "y"):
            assert representation_U(numeric_pair, x) == pytest.approx(1.0, abs=1e-2)


# -- properties over random affine tables ------------------------------------------

seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_comparison_principle(seed):
    rng = np.random.default_rng(seed)
    t = random_affine_table(rng)
    W, Z = random_subsolution(rng, t), random_supersolution(rng, t)
    assert check_subsolution(t, W) and check_supersolution(t, Z)
    assert all(W[x] <= Z[x] + 1e-9 for x in W)


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_uniqueness(seed):
    rng = np.random.default_rng(seed)
    t = random_affine_table(rng)
    U1 = solve_dfe(t).U
    U2 = solve_dfe(t, init=t.C + 100.0, jacobi=True, polish=False).U
    assert max(abs(U1[x] - U2[x]) for x in U1) <= 1e-9


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_path_map_monotone(seed):
    rng = np.random.default_rng(seed)
    t = random_affine_table(rng)
    p = random_path(rng, t.graph)
    alphas = np.sort(rng.uniform(-10, 10, 8))
    vals = np.array([rho_path(t, p, a) for a in alphas])
    assert np.all(np.diff(vals) >= 0)
    assert np.all(np.diff(vals - alphas) < 0)


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_upper_bounds(seed):
    rng = np.random.default_rng(seed)
    t = random_affine_table(rng, random_graph(rng, max_vertices=4, extra=2))
    U = solve_dfe(t).U
    for x in U:
        assert U[x] <= circuit_f(t, x) + 1e-9
        assert representation_U(t, x) >= U[x] - 1e-9
