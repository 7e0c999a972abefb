"""The vanishing-discount layer: eikonal weights, critical value, Aubry set.

At level ``a`` the maximal subsolution of ``H(s, v') = a`` on an arc with
``v(0) = 0`` has slope ``p+_a(s)``, the upper root of ``H(s, .) = a``; its end
value ``sigma_a(e) = int_0^1 p+_a(s) ds`` is the eikonal weight of the edge.
Weights add along paths.  The critical value is the least level at which no
circuit has negative weight.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from . import arc
from . import hamiltonian as ham
from .aubry import detect_aubry
from .discrete import EdgeMapTable, solve_dfe
from .errors import EmptyAubry, TraceIncompatible, ValidationError
from .graph import OrientedGraph, Path, enumerate_circuits, reverse_id
from .hamiltonian import HamiltonianSpec

logger = logging.getLogger(__name__)

QUAD_NODES = 1001
CRITICAL_TOL = 1e-8
AUBRY_TOL = 1e-6
NEGATIVE_SLACK = 1e-11


def sigma_edge(spec: HamiltonianSpec, a: float, M: int = QUAD_NODES) -> float:
    """``int_0^1 upper_root(spec, s, a) ds`` by composite Simpson on ``M`` nodes."""
    ham.check_constant_minimum(spec)
    s = np.linspace(0.0, 1.0, M)
    return float(simpson(ham.upper_root(spec, s, a), x=s))


def edge_specs(g: OrientedGraph, specs: dict[str, HamiltonianSpec]) -> dict[str, HamiltonianSpec]:
    """Hamiltonians of all oriented edges; reverse edges get the reversed spec."""
    out = {}
    for e in g.canonical:
        if e not in specs:
            raise ValidationError(f"no Hamiltonian for arc {e!r}")
        out[e] = specs[e]
        out[reverse_id(e)] = ham.reverse(specs[e])
    return out


def sigma_table(g: OrientedGraph, specs: dict[str, HamiltonianSpec], a: float,
                M: int = QUAD_NODES) -> dict[str, float]:
    return {e: sigma_edge(sp, a, M) for e, sp in edge_specs(g, specs).items()}


def a_gamma_max(g: OrientedGraph, specs: dict[str, HamiltonianSpec]) -> float:
    """``max`` over arcs of ``a_gamma = max_s min_p H``."""
    return max(ham.check_constant_minimum(sp) for sp in specs.values() if sp is not None)


def bellman_ford(g: OrientedGraph, weights: dict[str, float], sources: dict[str, float] | None = None,
                 slack: float = NEGATIVE_SLACK):
    """Shortest distances from ``sources`` (all vertices at 0 by default).

    Returns ``(dist, negative)`` where ``negative`` tells whether a circuit
    of weight below about ``-slack`` is reachable.  Relaxations that improve
    a distance by less than ``slack`` are ignored, which keeps quadrature
    noise on zero-weight circuits from being reported.
    """
    dist = {x: math.inf for x in g.vertices}
    for x, v in (sources if sources is not None else {x: 0.0 for x in g.vertices}).items():
        dist[x] = v
    for _ in range(len(g.vertices)):
        changed = False
        for e in g.edges:
            o, t = g.origin[e], g.terminal(e)
            if dist[o] + weights[e] < dist[t] - slack:
                dist[t] = dist[o] + weights[e]
                changed = True
        if not changed:
            return dist, False
    return dist, True


def has_negative_circuit(g: OrientedGraph, weights: dict[str, float]) -> bool:
    return bellman_ford(g, weights)[1]


def critical_value(g: OrientedGraph, specs: dict[str, HamiltonianSpec], tol: float = CRITICAL_TOL,
                   M: int = QUAD_NODES) -> float:
    """Least ``a >= max a_gamma`` at which no circuit has negative weight.

    Bisection on ``a``; weights are nondecreasing in ``a``.
    """
    lo = a_gamma_max(g, specs)
    if not has_negative_circuit(g, sigma_table(g, specs, lo, M)):
        return lo
    step = 1.0
    hi = lo + step
    while has_negative_circuit(g, sigma_table(g, specs, hi, M)):
        lo = hi
        step *= 2.0
        hi = lo + step
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if has_negative_circuit(g, sigma_table(g, specs, mid, M)):
            lo = mid
        else:
            hi = mid
    return hi


def path_sigma(sigma: dict[str, float], path: Path) -> float:
    return float(sum(sigma[e] for e in path.edges))


def eikonal_aubry(g: OrientedGraph, sigma: dict[str, float], tol: float = AUBRY_TOL):
    """Vertices carrying a circuit of weight ``|sigma| <= tol``, with witnesses."""
    members, witnesses = set(), {}
    for y in g.vertices:
        best = None
        for c in enumerate_circuits(g, y):
            w = abs(path_sigma(sigma, c))
            if w <= tol and (best is None or w < best[0]):
                best = (w, c)
        if best is not None:
            members.add(y)
            witnesses[y] = best[1]
    return members, witnesses


def solve_eikonal_dfe(g: OrientedGraph, sigma: dict[str, float], trace: dict[str, float],
                      tol: float = 1e-9) -> dict[str, float]:
    """``V(x) = min over y in the trace domain and paths y -> x of trace(y) + sigma(path)``.

    Raises :class:`TraceIncompatible` if ``trace(y') - trace(y)`` exceeds the
    weight of some path from ``y`` to ``y'``.
    """
    if not trace:
        raise ValidationError("trace must be defined on at least one vertex")
    for y in trace:
        dist, neg = bellman_ford(g, sigma, {y: 0.0})
        if neg:
            raise ValidationError("weights admit a negative circuit; level is below critical")
        for y2, v2 in trace.items():
            if v2 - trace[y] > dist[y2] + tol:
                raise TraceIncompatible(
                    f"trace({y2}) - trace({y}) = {v2 - trace[y]:.12g} exceeds path weight {dist[y2]:.12g}")
    V, _ = bellman_ford(g, sigma, dict(trace))
    return V


def check_eikonal_subsolution(g: OrientedGraph, sigma: dict[str, float], V: dict[str, float],
                              tol: float = 1e-9) -> float:
    """Largest violation of ``V(t(e)) - V(o(e)) <= sigma(e)`` over edges."""
    return max(V[g.terminal(e)] - V[g.origin[e]] - sigma[e] for e in g.edges)


@dataclass
class EikonalData:
    critical_value: float
    sigma: dict[str, float]
    aubry: set[str]
    witnesses: dict[str, Path]

    def to_dict(self) -> dict:
        return {
            "critical_value": self.critical_value,
            "sigma": dict(sorted(self.sigma.items())),
            "aubry": sorted(self.aubry),
            "witnesses": {y: list(p.edges) for y, p in sorted(self.witnesses.items())},
        }


def eikonal_data(g: OrientedGraph, specs: dict[str, HamiltonianSpec], tol: float = AUBRY_TOL) -> EikonalData:
    a = critical_value(g, specs)
    sigma = sigma_table(g, specs, a)
    members, witnesses = eikonal_aubry(g, sigma, tol)
    return EikonalData(a, sigma, members, witnesses)


# -- lambda sweep -------------------------------------------------------------

@dataclass
class SweepStep:
    lam: float
    U: dict[str, float]
    aubry: set[str]
    inclusion: bool
    gaps: dict[str, float]
    skipped: list[str]
    lam_max_abs_U: float
    gap_to_V: dict[str, float] = field(default_factory=dict)

    @property
    def max_gap(self) -> float:
        return max(self.gaps.values()) if self.gaps else math.nan

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "U": dict(sorted(self.U.items())),
            "aubry": sorted(self.aubry),
            "inclusion_in_A": self.inclusion,
            "edge_gaps": dict(sorted(self.gaps.items())),
            "skipped_edges": self.skipped,
            "lambda_max_abs_U": self.lam_max_abs_U,
            "gap_to_V": dict(sorted(self.gap_to_V.items())),
        }


@dataclass
class SweepReport:
    critical_value: float
    normalized: bool
    sigma: dict[str, float]
    A: set[str]
    probe: float | str
    steps: list[SweepStep]
    V: dict[str, float] | None
    V_subsolution_violation: float | None
    inclusion_threshold: float | None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "critical_value": self.critical_value,
            "normalized": self.normalized,
            "sigma": dict(sorted(self.sigma.items())),
            "A": sorted(self.A),
            "probe_alpha": self.probe,
            "inclusion_threshold": self.inclusion_threshold,
            "V": None if self.V is None else dict(sorted(self.V.items())),
            "V_subsolution_violation": self.V_subsolution_violation,
            "steps": [s.to_dict() for s in self.steps],
            "notes": list(self.notes),
        }

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    def write_csv(self, vertex_path, edge_path=None):
        """Per-lambda vertex rows, and optionally per-lambda edge gap rows."""
        with open(vertex_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["lambda", "vertex", "U_lambda", "in_A_lambda", "gap_to_V"])
            for st in self.steps:
                for x in sorted(st.U):
                    gap = st.gap_to_V.get(x)
                    w.writerow([_fmt(st.lam), x, _fmt(st.U[x]), int(x in st.aubry),
                                "" if gap is None else _fmt(gap)])
        if edge_path is not None:
            with open(edge_path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["lambda", "edge", "sigma", "gap"])
                for st in self.steps:
                    for e in sorted(st.gaps):
                        w.writerow([_fmt(st.lam), e, _fmt(self.sigma[e]), _fmt(st.gaps[e])])


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def lambda_sweep(g: OrientedGraph, specs: dict[str, HamiltonianSpec], lambdas, disc: arc.ArcDiscretization | None = None,
                 normalize: bool = True, probe: float | str = 0.0, tol: float = 1e-10,
                 eps_aubry: float | None = None) -> SweepReport:
    """Solve the discounted problem for decreasing ``lambdas`` and compare with the eikonal limit.

    With ``normalize`` the Hamiltonians are shifted by the critical value
    first, so the limit problem is critical at level 0.  Eikonal weights
    for the gaps are taken at level 0 of the Hamiltonians actually solved;
    the Aubry set and the limit candidate use the weights at the critical
    level (which is 0 after normalization).  ``probe``
    is the initial value used for the edge gaps
    ``|rho_lambda(probe, e) - probe - sigma(e)|``; the string ``"c*"`` selects
    the constant subsolution of each table.
    """
    lambdas = sorted((float(l) for l in lambdas), reverse=True)
    if not lambdas or lambdas[-1] <= 0:
        raise ValidationError("lambdas must be positive")
    notes = []
    a_star = critical_value(g, specs)
    used = {e: sp.shift(a_star) for e, sp in specs.items()} if normalize else dict(specs)
    sigma = sigma_table(g, used, 0.0)
    # the Aubry set and the limit candidate live at the critical level
    sigma_crit = sigma if normalize else sigma_table(g, used, a_star)
    A, _ = eikonal_aubry(g, sigma_crit)
    if not A:
        notes.append("eikonal Aubry set is empty at the critical level")

    steps = []
    for lam in lambdas:
        table = EdgeMapTable.numeric(g, used, lam, disc)
        sol = solve_dfe(table, tol=tol)
        try:
            members = detect_aubry(table, sol.U, eps_aubry).members
        except EmptyAubry:
            members = set()
            notes.append(f"lambda={lam:g}: empty Aubry set at the chosen tolerance")
        alpha0 = table.c_star if probe == "c*" else float(probe)
        gaps, skipped = {}, []
        for e in g.edges:
            m = table[e]
            if alpha0 > m.alpha_under:
                skipped.append(e)
                continue
            gaps[e] = abs(m(alpha0) - alpha0 - sigma[e])
        if skipped:
            logger.warning("lambda=%g: probe %.6g above alpha_under on %s; gaps skipped", lam, alpha0, skipped)
        steps.append(SweepStep(lam, dict(sol.U), members, members <= A, gaps, skipped,
                               lam * max(abs(v) for v in sol.U.values())))

    # largest lambda below which the inclusion holds throughout
    threshold = None
    for st in reversed(steps):
        if not st.inclusion:
            break
        threshold = st.lam

    V, viol = None, None
    last = steps[-1]
    if last.aubry:
        trace = {y: last.U[y] for y in last.aubry}
        try:
            V = solve_eikonal_dfe(g, sigma_crit, trace, tol=1e-6)
            viol = check_eikonal_subsolution(g, sigma_crit, V)
            for st in steps:
                st.gap_to_V = {x: abs(st.U[x] - V[x]) for x in g.vertices}
        except (TraceIncompatible, ValidationError) as exc:
            notes.append(f"limit candidate unavailable: {exc}")
    return SweepReport(a_star, normalize, sigma, A, probe if probe == "c*" else float(probe), steps,
                       V, viol, threshold, notes)
