"""Aubry sets of the discrete equation and the representation they support.

A vertex ``y`` belongs to the Aubry set of a solution ``U`` when some
circuit based at ``y`` has ``beta(circuit) = U(y)``.  Membership is decided
up to a tolerance because ``U`` and ``beta`` carry scheme error.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from .discrete import EdgeMapTable, beta_cycle, rho_path, rho_path_trace
from .errors import EmptyAubry, ValidationError
from .graph import Path, enumerate_circuits, enumerate_simple_paths

logger = logging.getLogger(__name__)


def default_epsilon(value: float) -> float:
    return 1e-6 * max(1.0, abs(value))


@dataclass
class AubryReport:
    """Members of the Aubry set with a witnessing circuit for each.

    ``margins[y]`` is ``min |U(y) - beta|`` over circuits based at ``y`` and
    ``epsilon[y]`` the threshold it was compared against, so borderline
    vertices can be audited.
    """

    members: set[str]
    witnesses: dict[str, Path]
    epsilon: dict[str, float]
    margins: dict[str, float] = field(default_factory=dict)
    removable_loops: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "members": sorted(self.members),
            "witnesses": {y: list(p.edges) for y, p in sorted(self.witnesses.items())},
            "epsilon": dict(sorted(self.epsilon.items())),
            "margins": dict(sorted(self.margins.items())),
            "removable_loops": list(self.removable_loops),
        }


def detect_aubry(table: EdgeMapTable, U: dict[str, float], eps: float | None = None) -> AubryReport:
    """Vertices ``y`` with a circuit ``zeta`` based at ``y`` and ``|U(y) - beta(zeta)| <= eps``.

    ``eps`` defaults to ``1e-6 * max(1, |U(y)|)`` per vertex.  Loops whose
    fixed point lies strictly above ``U`` at their base are listed in
    ``removable_loops``: deleting them does not change the solution.
    """
    g = table.graph
    members, witnesses, epsilon, margins = set(), {}, {}, {}
    loops = []
    for y in g.vertices:
        e_y = default_epsilon(U[y]) if eps is None else float(eps)
        epsilon[y] = e_y
        best, arg = math.inf, None
        for c in enumerate_circuits(g, y):
            gap = abs(U[y] - beta_cycle(table, c))
            if gap < best:
                best, arg = gap, c
            if len(c) == 1 and beta_cycle(table, c) > U[y] + e_y:
                loops.append(c.edges[0])
        margins[y] = best
        if best <= e_y:
            members.add(y)
            witnesses[y] = arg
    if not members:
        raise EmptyAubry("no vertex meets the Aubry tolerance; the tolerance is below the numerical noise")
    return AubryReport(members, witnesses, epsilon, margins, sorted(loops))


@dataclass
class SpringCheck:
    ok: bool
    violations: list[tuple[int, int, float]] = field(default_factory=list)

    def __bool__(self):
        return self.ok


def verify_spring(table: EdgeMapTable, U: dict[str, float], cycle: Path, eps: float = 1e-6) -> SpringCheck:
    """Check the propagation identities along a cycle realizing ``U`` at its base.

    For every position ``j`` (0-based) the value at the origin of ``e_j``
    must equal the fixed point of the cycle rotated to start there, and the
    image of ``U(o(e_k))`` along ``e_k, ..., e_{j-1}`` for every ``k < j``.
    Violations are reported as ``(j, k, error)``; ``k = -1`` marks the
    rotated fixed-point identity.
    """
    if not cycle.is_cycle:
        raise ValidationError(f"{cycle} is not a cycle")
    g = table.graph
    tol = 10.0 * eps
    origins = [g.origin[e] for e in cycle.edges]
    bad = []
    for j, x in enumerate(origins):
        err = abs(U[x] - beta_cycle(table, cycle.rotation(j)))
        if err > tol:
            bad.append((j, -1, err))
        for k in range(j):
            err = abs(U[x] - rho_path(table, cycle.sub(k, j), U[origins[k]]))
            if err > tol:
                bad.append((j, k, err))
    if bad:
        logger.debug("spring identities fail at %s", bad[:5])
    return SpringCheck(not bad, bad)


@dataclass
class Representation:
    value: float
    source: str
    path: Path | None
    identity_error: float = 0.0


def aubry_representation_detail(table: EdgeMapTable, U: dict[str, float], report: AubryReport,
                                x: str) -> Representation:
    """Minimum over Aubry vertices ``y`` and simple paths ``y -> x`` of ``rho(U(y), path)``.

    The identity ``U(o(e_j)) = rho(U(y), (e_1, ..., e_{j-1}))`` is evaluated
    along the minimizing path; its largest deviation is ``identity_error``.
    """
    best = Representation(math.inf, "", None)
    if x in report.members:
        best = Representation(U[x], x, None)
    for p in enumerate_simple_paths(table.graph, x):
        y = p.origin
        if y not in report.members:
            continue
        val = rho_path(table, p, U[y])
        tie = 1e-12 * max(1.0, abs(val))
        # on ties prefer the shorter path
        if val < best.value - tie or (val <= best.value + tie and best.path is not None
                                      and len(p) < len(best.path)):
            best = Representation(val, y, p)
    if best.path is not None:
        trace = rho_path_trace(table, best.path, U[best.source])
        g = table.graph
        best.identity_error = max(abs(U[g.origin[e]] - trace[i]) for i, e in enumerate(best.path.edges))
    return best


def aubry_representation(table: EdgeMapTable, U: dict[str, float], report: AubryReport, x: str) -> float:
    return aubry_representation_detail(table, U, report, x).value
