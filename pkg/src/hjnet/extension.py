"""Extension of a vertex solution to every arc of the network.

Given the solution ``U`` of the discrete equation, each arc carries the
unique solution of the two-point problem with data ``U(o(e))`` and
``U(t(e))``.  The vertex condition then asks, at every vertex, for an
incoming arc along which the edge map attains the minimum.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import arc
from ._threads import parallel_map
from .arc import ArcDiscretization, ArcProfile
from .discrete import EdgeMapTable
from .errors import ValidationError
from .graph import OrientedGraph
from .hamiltonian import HamiltonianSpec, reverse

logger = logging.getLogger(__name__)


@dataclass
class Extension:
    """Arc profiles keyed by canonical edge, with trace errors."""

    graph: OrientedGraph
    profiles: dict[str, ArcProfile]
    trace_error: dict[str, float]
    residual: dict[str, float]

    def profile(self, edge: str) -> ArcProfile:
        """Profile along ``edge`` in its own orientation."""
        if edge in self.profiles:
            return self.profiles[edge]
        return self.profiles[self.graph.reverse(edge)].reversed()

    def csv_rows(self):
        for e in self.graph.canonical:
            for s, u in self.profiles[e].csv_rows():
                yield e, s, u


def extend(graph: OrientedGraph, specs: dict[str, HamiltonianSpec], lam: float, U: dict[str, float],
           disc: ArcDiscretization | None = None, tol: float = 1e-10) -> Extension:
    """Solve the two-point problem on each canonical arc with vertex data ``U``.

    Raises :class:`~hjnet.errors.ForkConditionViolated` when some arc cannot
    join its end values, which means ``U`` does not solve the discrete
    equation to within ``10 * tol``.
    """
    disc = disc or ArcDiscretization(tol=tol)
    slack = 10.0 * tol

    def one(e):
        a, b = U[graph.origin[e]], U[graph.terminal(e)]
        return arc.solve_dirichlet_pair(specs[e], lam, a, b, disc, reverse(specs[e]), slack=slack)

    edges = list(graph.canonical)
    missing = [e for e in edges if e not in specs]
    if missing:
        raise ValidationError(f"no Hamiltonian for arcs {missing}")
    profs = dict(zip(edges, parallel_map(one, edges)))
    trace, res = {}, {}
    for e, p in profs.items():
        a, b = U[graph.origin[e]], U[graph.terminal(e)]
        trace[e] = float(max(abs(p.values[0] - a), abs(p.values[-1] - b)))
        res[e] = arc.interior_residual(specs[e], p)
        if trace[e] > slack:
            logger.warning("arc %s: trace error %.3g above %.3g", e, trace[e], slack)
    return Extension(graph, profs, trace, res)


@dataclass
class VertexReport:
    """Witnessing incoming edge per vertex (``None`` when there is none)."""

    witness: dict[str, str | None]
    gap: dict[str, float]
    tol: float
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {"ok": self.ok, "tol": self.tol, "witness": dict(sorted(self.witness.items())),
                "gap": dict(sorted(self.gap.items())), "failures": list(self.failures)}


def verify_vertex_conditions(table: EdgeMapTable, ext: Extension | None, U: dict[str, float],
                             tol: float = 1e-10) -> VertexReport:
    """Find, for each vertex, an incoming edge realizing the minimum.

    An edge ``e`` into ``x`` witnesses ``x`` when ``|U(x) - rho(U(o(e)), e)|``
    is at most ``10 * tol`` and, if profiles are given, the profile along
    ``e`` ends at ``U(x)`` to the same tolerance.
    """
    g = table.graph
    thr = 10.0 * tol
    witness, gap, failures = {}, {}, []
    for x in g.vertices:
        best, arg = np.inf, None
        for e in g.in_star(x):
            d = abs(U[x] - table[e](U[g.origin[e]]))
            if ext is not None:
                d = max(d, abs(ext.profile(e).values[-1] - U[x]))
            if d < best:
                best, arg = d, e
        gap[x] = float(best)
        witness[x] = arg if best <= thr else None
        if witness[x] is None:
            failures.append(x)
    if failures:
        logger.info("unwitnessed vertices: %s", failures)
    return VertexReport(witness, gap, thr, failures)
