"""Randomized self-checks that need no fixture files.

The generators here are shared with the test suite.  ``run_selftest``
exercises the comparison principle, uniqueness, monotonicity of path maps
and the Aubry representation on random affine tables, plus a few cheap
checks of the numeric backend against closed forms and the
semi-Lagrangian oracle.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass

import numpy as np

from . import arc
from .aubry import aubry_representation, detect_aubry
from .discrete import (EdgeMapTable, apply_operator, check_subsolution, check_supersolution, rho_path,
                       solve_dfe)
from .graph import OrientedGraph, Path
from .hamiltonian import eikonal_power
from .semilagrangian import sl_oracle_rho

logger = logging.getLogger(__name__)


def random_graph(rng: np.random.Generator, max_vertices: int = 6, extra: int = 3) -> OrientedGraph:
    """Connected graph: a random spanning tree plus extra arcs (loops and parallels allowed)."""
    n = int(rng.integers(1, max_vertices + 1))
    names = [f"v{i}" for i in range(n)]
    arcs = []
    for i in range(1, n):
        j = int(rng.integers(0, i))
        a, b = (names[i], names[j]) if rng.random() < 0.5 else (names[j], names[i])
        arcs.append((f"a{len(arcs)}", a, b))
    for _ in range(int(rng.integers(0 if n > 1 else 1, extra + 1))):
        a, b = rng.choice(names, 2)
        arcs.append((f"a{len(arcs)}", str(a), str(b)))
    return OrientedGraph(names, arcs)


def random_affine_table(rng: np.random.Generator, g: OrientedGraph | None = None) -> EdgeMapTable:
    g = g or random_graph(rng)
    coeffs = {e: (float(rng.uniform(0.1, 0.9)), float(rng.uniform(-2.0, 2.0))) for e in g.edges}
    return EdgeMapTable.affine(g, coeffs)


def _settle(table: EdgeMapTable, W: dict[str, float], op, tol: float = 1e-13, max_iter: int = 100000):
    for _ in range(max_iter):
        TW = apply_operator(table, W)
        new = {x: op(W[x], TW[x]) for x in W}
        if max(abs(new[x] - W[x]) for x in W) < tol:
            return new
        W = new
    return W


def random_subsolution(rng: np.random.Generator, table: EdgeMapTable, spread: float = 5.0) -> dict[str, float]:
    """Decreasing iteration ``W <- min(W, T W)`` from random data."""
    W = {x: float(rng.uniform(-spread, spread)) for x in table.graph.vertices}
    return _settle(table, W, min)


def random_supersolution(rng: np.random.Generator, table: EdgeMapTable, spread: float = 5.0) -> dict[str, float]:
    """Increasing iteration ``W <- max(W, T W)`` from random data."""
    W = {x: float(rng.uniform(-spread, spread)) for x in table.graph.vertices}
    return _settle(table, W, max)


def random_path(rng: np.random.Generator, g: OrientedGraph, max_len: int = 5) -> Path:
    e = str(rng.choice(g.edges))
    edges = [e]
    for _ in range(int(rng.integers(0, max_len))):
        edges.append(str(rng.choice(g.out_star(g.terminal(edges[-1])))))
    return g.path(edges)


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str
    seconds: float

    def to_dict(self) -> dict:
        return {"name": self.name, "ok": self.ok, "detail": self.detail, "seconds": round(self.seconds, 3)}


def _comparison(rng, count, tol):
    worst, worst_unique = -math.inf, 0.0
    for _ in range(count):
        t = random_affine_table(rng)
        sub, sup = random_subsolution(rng, t), random_supersolution(rng, t)
        if not (check_subsolution(t, sub) and check_supersolution(t, sup)):
            return False, "generator produced an invalid sub/supersolution"
        worst = max(worst, max(sub[x] - sup[x] for x in sub))
        U1 = solve_dfe(t, tol=tol).U
        U2 = solve_dfe(t, tol=tol, init=sup, jacobi=True).U
        worst_unique = max(worst_unique, max(abs(U1[x] - U2[x]) for x in U1))
    ok = worst <= 1e-9 and worst_unique <= 10 * tol
    return ok, f"max(sub - super) = {worst:.3g}, uniqueness gap = {worst_unique:.3g}"


def _monotone_paths(rng, count):
    worst = 0.0
    for _ in range(count):
        t = random_affine_table(rng)
        p = random_path(rng, t.graph)
        a, b = sorted(rng.uniform(-5, 5, 2))
        worst = max(worst, rho_path(t, p, a) - rho_path(t, p, b))
    return worst <= 1e-12, f"max(rho(a) - rho(b)) for a < b = {worst:.3g}"


def _representation(rng, count, tol):
    worst = 0.0
    for _ in range(count):
        t = random_affine_table(rng, random_graph(rng, max_vertices=4, extra=2))
        U = solve_dfe(t, tol=tol).U
        rep = detect_aubry(t, U)
        worst = max(worst, max(abs(aubry_representation(t, U, rep, x) - U[x]) for x in U))
    return worst <= 1e-5, f"max |representation - U| = {worst:.3g}"


def _closed_form(N):
    disc = arc.ArcDiscretization(N=N)
    val = arc.rho_edge(eikonal_power(1, 1.0), 1.0, 0.0, disc)
    err = abs(val - (1 - math.exp(-1)))
    return err <= 5e-3 * 2000 / N, f"|rho(0) - (1 - e^-1)| = {err:.3g} at N = {N}"


def _oracle(N):
    disc = arc.ArcDiscretization(N=N)
    worst = 0.0
    for spec, lam, alpha in [(eikonal_power(2, [0.3, 1.0]), 0.5, 0.0), (eikonal_power(1, [2.0, 0.5]), 0.3, 0.0)]:
        fd = arc.rho_edge(spec, lam, alpha, disc)
        sl = sl_oracle_rho(spec, lam, alpha, M=100, nx=501, nq=201)
        worst = max(worst, abs(fd - sl))
    return worst <= 2e-2, f"max |finite difference - semi-Lagrangian| = {worst:.3g}"


def run_selftest(seed: int = 0, count: int = 200, tol: float = 1e-10, grid_n: int = 500) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    checks = [
        ("comparison_and_uniqueness", lambda: _comparison(rng, count, tol)),
        ("path_map_monotonicity", lambda: _monotone_paths(rng, count)),
        ("aubry_representation", lambda: _representation(rng, max(1, count // 10), tol)),
        ("closed_form_edge_map", lambda: _closed_form(grid_n)),
        ("semi_lagrangian_oracle", lambda: _oracle(grid_n)),
    ]
    out = []
    for name, fn in checks:
        t0 = time.perf_counter()
        ok, detail = fn()
        out.append(CheckResult(name, bool(ok), detail, time.perf_counter() - t0))
        logger.info("%s: %s (%s)", name, "ok" if ok else "FAILED", detail)
    return out
