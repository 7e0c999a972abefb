"""Edge maps, path functionals and the discrete functional equation (DFE).

An edge map ``rho(., e)`` is nondecreasing and ``alpha -> rho(alpha, e) - alpha``
is strictly decreasing.  The DFE asks for vertex values with

    U(x) = min over edges e ending at x of rho(U(o(e)), e).

Three backends share one interface: numeric maps computed by the arc solver,
affine maps ``a * alpha + b`` with ``0 < a < 1``, and monotone piecewise-linear
tables.
"""

from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import arc
from . import hamiltonian as ham
from ._threads import parallel_map
from .errors import BracketFailure, NoConvergence, ValidationError
from .graph import OrientedGraph, Path, enumerate_circuits, enumerate_simple_paths, reverse_id
from .hamiltonian import HamiltonianSpec

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
BETA_XTOL = 1e-12
BRACKET_SLACK = 1e-10


# -- edge maps --------------------------------------------------------------

class EdgeMap:
    """Interface of a scalar edge map ``alpha -> rho(alpha, e)``."""

    backend = "abstract"
    alpha_under: float | None = None
    alpha_over: float | None = None

    def __call__(self, alpha: float) -> float:
        raise NotImplementedError

    def fast(self, alpha: float) -> float:
        """Cheap approximation used to warm-start the DFE solver."""
        return self(alpha)

    @property
    def has_surrogate(self) -> bool:
        return False

    def fixed_point(self) -> float:
        """The unique ``alpha`` with ``rho(alpha) = alpha``."""
        raise NotImplementedError

    def lower_bound(self) -> float:
        """A constant ``c`` with ``rho(c) >= c``."""
        return self.fixed_point() - 1.0

    def to_dict(self) -> dict:
        return {"backend": self.backend}


class AffineEdgeMap(EdgeMap):
    backend = "affine"

    def __init__(self, a: float, b: float):
        if not 0.0 < a < 1.0:
            raise ValidationError(f"affine edge map needs 0 < a < 1, got a={a}")
        self.a = float(a)
        self.b = float(b)

    def __call__(self, alpha: float) -> float:
        return self.a * alpha + self.b

    def fixed_point(self) -> float:
        return self.b / (1.0 - self.a)

    def to_dict(self):
        return {"backend": self.backend, "a": self.a, "b": self.b}

    def __repr__(self):
        return f"AffineEdgeMap(a={self.a}, b={self.b})"


class TabulatedEdgeMap(EdgeMap):
    """Piecewise-linear map through monotone samples, extended linearly.

    Every segment slope must lie in ``[0, 1)``, which is exactly what keeps
    the map nondecreasing with a strictly decreasing gap.
    """

    backend = "tabulated"

    def __init__(self, alphas, values):
        x = np.asarray(alphas, dtype=float)
        y = np.asarray(values, dtype=float)
        if x.ndim != 1 or x.shape != y.shape or x.size < 2:
            raise ValidationError("tabulated edge map needs two matching 1-D arrays of length >= 2")
        if np.any(np.diff(x) <= 0):
            raise ValidationError("tabulated edge map abscissae must increase strictly")
        slopes = np.diff(y) / np.diff(x)
        if np.any(slopes < 0) or np.any(slopes >= 1):
            raise ValidationError("tabulated edge map slopes must lie in [0, 1)")
        self.x, self.y, self.slopes = x, y, slopes

    def __call__(self, alpha: float) -> float:
        x, y = self.x, self.y
        if alpha < x[0]:
            return float(y[0] + self.slopes[0] * (alpha - x[0]))
        if alpha > x[-1]:
            return float(y[-1] + self.slopes[-1] * (alpha - x[-1]))
        return float(np.interp(alpha, x, y))

    def fixed_point(self) -> float:
        g = self.y - self.x
        if g[0] < 0:
            return float(self.x[0] + g[0] / (1.0 - self.slopes[0]))
        if g[-1] > 0:
            return float(self.x[-1] + g[-1] / (1.0 - self.slopes[-1]))
        k = int(np.nonzero(g <= 0)[0][0])
        if k == 0:
            return float(self.x[0])
        return float(self.x[k - 1] + g[k - 1] / (1.0 - self.slopes[k - 1]))

    def to_dict(self):
        return {"backend": self.backend, "alphas": self.x.tolist(), "values": self.y.tolist()}


class NumericEdgeMap(EdgeMap):
    """Edge map of one oriented arc computed by the finite-difference solver.

    Values are memoized per ``alpha``.  For ``alpha >= alpha_under`` the map is
    constant and equal to ``alpha_over``; this holds exactly for the discrete
    scheme too, since the weak Dirichlet clamp is then inactive.
    """

    backend = "numeric"

    def __init__(self, spec: HamiltonianSpec, lam: float, disc: arc.ArcDiscretization | None = None,
                 surrogate_points: int = 17):
        if not lam > 0:
            raise ValidationError("discount factor lambda must be positive")
        self.spec = spec
        self.lam = float(lam)
        self.disc = disc or arc.ArcDiscretization()
        self.surrogate_points = surrogate_points
        self._cache: dict[float, float] = {}
        self._lock = threading.Lock()
        self._umax = None
        self._surrogate = None

    # saturation data, solved lazily
    @property
    def umax(self) -> arc.ArcProfile:
        if self._umax is None:
            self._umax = arc.solve_umax(self.spec, self.lam, self.disc)
        return self._umax

    @property
    def alpha_under(self) -> float:
        return float(self.umax.values[0])

    @property
    def alpha_over(self) -> float:
        return float(self.umax.values[-1])

    def __call__(self, alpha: float) -> float:
        alpha = float(alpha)
        if alpha >= self.alpha_under:
            return self.alpha_over
        with self._lock:
            hit = self._cache.get(alpha)
        if hit is not None:
            return hit
        val = arc.rho_edge(self.spec, self.lam, alpha, self.disc)
        with self._lock:
            self._cache[alpha] = val
        return val

    def lower_bound(self) -> float:
        return -ham.max_at_zero(self.spec) / self.lam

    @property
    def has_surrogate(self) -> bool:
        return True

    def _build_surrogate(self):
        lo = self.lower_bound() - 1.0
        hi = self.alpha_under
        if hi - lo < 1e-12:
            self._surrogate = (np.array([hi]), np.array([self.alpha_over]))
            return
        xs = np.linspace(lo, hi, self.surrogate_points)
        ys = np.array([self(x) for x in xs[:-1]] + [self.alpha_over])
        # sampled values may wiggle at scheme tolerance; restore monotonicity
        ys = np.maximum.accumulate(ys)
        self._surrogate = (xs, ys)

    def fast(self, alpha: float) -> float:
        if alpha >= self.alpha_under:
            return self.alpha_over
        if self._surrogate is None:
            self._build_surrogate()
        xs, ys = self._surrogate
        if xs.size == 1:
            return float(ys[0])
        if alpha < xs[0]:
            slope = (ys[1] - ys[0]) / (xs[1] - xs[0])
            return float(ys[0] + slope * (alpha - xs[0]))
        return float(np.interp(alpha, xs, ys))

    def fixed_point(self) -> float:
        lo, hi = self.lower_bound(), self.alpha_under
        if self(lo) - lo <= 0:
            return lo
        return brentq(lambda a: self(a) - a, lo, hi, xtol=BETA_XTOL)

    def to_dict(self):
        return {"backend": self.backend, "lambda": self.lam, "hamiltonian": self.spec.to_dict()}


# -- the table ----------------------------------------------------------------

class EdgeMapTable:
    """Edge maps for every oriented edge of a graph."""

    def __init__(self, graph: OrientedGraph, maps: dict[str, EdgeMap], lam: float | None = None):
        missing = [e for e in graph.edges if e not in maps]
        if missing:
            raise ValidationError(f"edge maps missing for {missing}")
        self.graph = graph
        self.maps = dict(maps)
        self.lam = lam
        self._c_star = None
        self._C = None

    def __getitem__(self, edge: str) -> EdgeMap:
        return self.maps[edge]

    @classmethod
    def affine(cls, graph: OrientedGraph, coeffs: dict[str, tuple[float, float]]) -> "EdgeMapTable":
        return cls(graph, {e: AffineEdgeMap(*coeffs[e]) for e in graph.edges if e in coeffs})

    @classmethod
    def tabulated(cls, graph: OrientedGraph, samples: dict[str, tuple]) -> "EdgeMapTable":
        return cls(graph, {e: TabulatedEdgeMap(*samples[e]) for e in graph.edges if e in samples})

    @classmethod
    def numeric(cls, graph: OrientedGraph, specs: dict[str, HamiltonianSpec], lam: float,
                disc: arc.ArcDiscretization | None = None) -> "EdgeMapTable":
        """Numeric maps from one Hamiltonian per canonical arc.

        The reverse edge gets the reversed Hamiltonian.
        """
        maps = {}
        for e in graph.canonical:
            if e not in specs:
                raise ValidationError(f"no Hamiltonian for arc {e!r}")
            maps[e] = NumericEdgeMap(specs[e], lam, disc)
            maps[reverse_id(e)] = NumericEdgeMap(ham.reverse(specs[e]), lam, disc)
        table = cls(graph, maps, lam)
        # saturation data of all edges, possibly in parallel
        parallel_map(lambda m: m.umax, list(maps.values()))
        return table

    @property
    def backends(self) -> set[str]:
        return {m.backend for m in self.maps.values()}

    @property
    def c_star(self) -> float:
        """Constant subsolution: ``rho(c*, e) >= c*`` for every edge."""
        if self._c_star is None:
            self._c_star = min(m.lower_bound() for m in self.maps.values())
        return self._c_star

    @property
    def C(self) -> float:
        """Constant supersolution used to start value iteration."""
        if self._C is None:
            vals = []
            for m in self.maps.values():
                vals.append(m.alpha_over if m.alpha_over is not None else m.fixed_point())
            self._C = max(vals)
        return self._C


# -- path functional --------------------------------------------------------

def rho_path(table: EdgeMapTable, path: Path, alpha: float) -> float:
    """Fold of the edge maps along ``path``."""
    for e in path.edges:
        alpha = table[e](alpha)
    return float(alpha)


def rho_path_trace(table: EdgeMapTable, path: Path, alpha: float) -> list[float]:
    """Values ``alpha, rho(alpha, e_1), rho(alpha, (e_1, e_2)), ...``."""
    out = [float(alpha)]
    for e in path.edges:
        out.append(float(table[e](out[-1])))
    return out


def beta_cycle(table: EdgeMapTable, cycle: Path, xtol: float = BETA_XTOL) -> float:
    """Unique fixed point of ``alpha -> rho(alpha, cycle)``."""
    if not cycle.is_cycle:
        raise ValidationError(f"{cycle} is not a cycle")
    lo = table.c_star
    last = table[cycle.edges[-1]]
    hi = last.alpha_over + 1.0 if last.alpha_over is not None else table.C + 1.0

    def g(a):
        return rho_path(table, cycle, a) - a

    glo, ghi = g(lo), g(hi)
    # c* is a constant subsolution, so g(lo) >= 0 up to the accuracy of the maps
    slack = BRACKET_SLACK * max(1.0, abs(lo))
    if abs(glo) <= slack:
        return lo
    if ghi == 0.0:
        return hi
    if glo < 0 or ghi > 0:
        raise BracketFailure(f"no sign change on [{lo:.6g}, {hi:.6g}] for cycle {cycle}: "
                             f"g = ({glo:.3g}, {ghi:.3g})")
    return float(brentq(g, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps))


# -- the DFE ----------------------------------------------------------------

@dataclass
class DiscreteSolution:
    U: dict[str, float]
    iterations: int
    residual: float
    method: str = "gauss_seidel"
    policy: dict[str, str] = field(default_factory=dict)
    history: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"U": dict(self.U), "iterations": self.iterations, "residual": self.residual,
                "method": self.method, "policy": dict(self.policy)}


def apply_operator(table: EdgeMapTable, W: dict[str, float], fast: bool = False) -> dict[str, float]:
    """``(T W)(x) = min over edges e ending at x of rho(W(o(e)), e)``."""
    g = table.graph
    ev = (lambda e, a: table[e].fast(a)) if fast else (lambda e, a: table[e](a))
    return {x: min(ev(e, W[g.origin[e]]) for e in g.in_star(x)) for x in g.vertices}


def dfe_residual(table: EdgeMapTable, W: dict[str, float], fast: bool = False) -> float:
    TW = apply_operator(table, W, fast)
    return max(abs(W[x] - TW[x]) for x in W)


def check_subsolution(table: EdgeMapTable, W: dict[str, float], tol: float = 1e-9) -> bool:
    TW = apply_operator(table, W)
    return all(W[x] <= TW[x] + tol for x in W)


def check_supersolution(table: EdgeMapTable, W: dict[str, float], tol: float = 1e-9) -> bool:
    TW = apply_operator(table, W)
    return all(W[x] >= TW[x] - tol for x in W)


def _value_iteration(table, U, tol, jacobi, max_iter, fast):
    g = table.graph
    ev = (lambda e, a: table[e].fast(a)) if fast else (lambda e, a: table[e](a))
    history = []
    for it in range(1, max_iter + 1):
        change = 0.0
        if jacobi:
            new = {x: min(ev(e, U[g.origin[e]]) for e in g.in_star(x)) for x in g.vertices}
            change = max(abs(new[x] - U[x]) for x in U)
            U = new
        else:
            for x in g.vertices:
                v = min(ev(e, U[g.origin[e]]) for e in g.in_star(x))
                change = max(change, abs(v - U[x]))
                U[x] = v
        history.append(change)
        if change < tol and dfe_residual(table, U, fast) < tol:
            return U, it, history
    raise NoConvergence(f"value iteration did not converge in {max_iter} sweeps", partial=U)


def _argmin_policy(table, U, old=None, margin=1e-13):
    g = table.graph
    pol = {}
    for x in g.vertices:
        vals = {e: table[e](U[g.origin[e]]) for e in g.in_star(x)}
        best = min(vals, key=lambda e: (vals[e], e))
        if old is not None and vals[old[x]] <= vals[best] + margin:
            best = old[x]
        pol[x] = best
    return pol


def evaluate_policy(table: EdgeMapTable, policy: dict[str, str]) -> dict[str, float]:
    """Solve ``U(x) = rho(U(o(pi(x))), pi(x))`` for a fixed choice ``pi``.

    The parent relation ``x -> o(pi(x))`` is a functional graph: each
    component is one cycle with trees attached.  Cycle values are fixed
    points; tree values follow by propagation.
    """
    g = table.graph
    parent = {x: g.origin[policy[x]] for x in g.vertices}
    U: dict[str, float] = {}
    state: dict[str, int] = {}
    for start in g.vertices:
        if start in U:
            continue
        trail = []
        x = start
        while x not in U and state.get(x) != 1:
            state[x] = 1
            trail.append(x)
            x = parent[x]
        if x not in U:
            # found a new cycle through x; walk it in edge direction
            k = trail.index(x)
            ring = trail[k:]             # x, p(x), p(p(x)), ...
            edges = [policy[y] for y in reversed(ring)]
            cyc = g.path(edges)
            base = ring[0]
            U[base] = beta_cycle(table, cyc)
            for y in reversed(ring[1:]):
                U[y] = table[policy[y]](U[parent[y]])
            trail = trail[:k]
        for y in reversed(trail):
            U[y] = table[policy[y]](U[parent[y]])
    return U


def solve_dfe(table: EdgeMapTable, tol: float = DEFAULT_TOL, init: dict[str, float] | float | None = None,
              jacobi: bool = False, max_iter: int = 10**7, polish: bool = True,
              max_policy_iter: int = 100) -> DiscreteSolution:
    """Solve the DFE by monotone value iteration from a constant supersolution.

    Tables whose maps carry a cheap surrogate (numeric backend) run value
    iteration on the surrogate.  With ``polish`` the result is finished by
    policy iteration on the exact maps: every policy is evaluated exactly,
    and the argmin policy of the result is recomputed until it no longer
    changes.
    """
    g = table.graph
    if init is None:
        U = {x: table.C for x in g.vertices}
    elif isinstance(init, dict):
        U = {x: float(init[x]) for x in g.vertices}
    else:
        U = {x: float(init) for x in g.vertices}
    surrogate = any(m.has_surrogate for m in table.maps.values())
    method = "jacobi" if jacobi else "gauss_seidel"
    if surrogate:
        # the surrogate only has to pick a good starting policy
        try:
            U, iters, history = _value_iteration(table, U, tol, jacobi, min(max_iter, 10**5), fast=True)
        except NoConvergence as exc:
            U, iters, history = exc.partial, min(max_iter, 10**5), []
    else:
        U, iters, history = _value_iteration(table, U, tol, jacobi, max_iter, fast=False)
    policy = _argmin_policy(table, U)
    if polish:
        method += "+policy"
        for k in range(max_policy_iter):
            U = evaluate_policy(table, policy)
            iters += 1
            new = _argmin_policy(table, U, old=policy)
            if new == policy:
                break
            policy = new
        else:
            raise NoConvergence("policy iteration did not settle", partial=U)
    res = dfe_residual(table, U)
    if res > tol and not surrogate:
        raise NoConvergence(f"DFE residual {res:.3g} above tol", partial=U)
    logger.info("DFE solved: %d iterations, residual %.3g (%s)", iters, res, method)
    return DiscreteSolution(U, iters, res, method, policy, history)


# -- representation oracles --------------------------------------------------

def circuit_f(table: EdgeMapTable, x: str) -> float:
    """Minimum of ``beta`` over circuits based at ``x`` (``inf`` if none)."""
    circuits = enumerate_circuits(table.graph, x)
    if not circuits:
        return math.inf
    return min(beta_cycle(table, c) for c in circuits)


def representation_U(table: EdgeMapTable, x: str) -> float:
    """Path-and-circuit formula for ``U(x)``; an upper bound in general."""
    g = table.graph
    fvals = {y: circuit_f(table, y) for y in g.vertices}
    best = fvals[x]
    for p in enumerate_simple_paths(g, x):
        start = fvals[p.origin]
        if math.isfinite(start):
            best = min(best, rho_path(table, p, start))
    return best
