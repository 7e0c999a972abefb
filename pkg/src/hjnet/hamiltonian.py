"""Parametric Hamiltonian families on ``[0, 1] x R``.

Three families are available:

``eikonal_power``
    ``H(s, p) = |p|**m - f(s)`` with ``m >= 1``.
``tilted_quadratic``
    ``H(s, p) = 0.5 * (p - b(s))**2 - f(s)``.
``tabulated``
    Bilinear interpolation of a table on ``[0, 1] x [-P, P]``; outside the
    table in ``p`` the values grow linearly with a declared coercive slope.

Potentials ``f`` and drifts ``b`` are samples on a uniform grid of ``[0, 1]``
(a single sample means a constant), interpolated linearly.  All evaluation
routines broadcast over numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    H4Violated,
    LevelBelowMin,
    NotCoercive,
    QuasiconvexityRequired,
    ValidationError,
)

FAMILIES = ("eikonal_power", "tilted_quadratic", "tabulated")
COERCIVITY_CAP = 1e8
GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def _samples(x) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1 or arr.size == 0 or not np.all(np.isfinite(arr)):
        raise ValidationError("samples must be a nonempty finite 1-D sequence")
    return arr


def _interp(samples: np.ndarray, s):
    if samples.size == 1:
        return np.full(np.shape(s), samples[0]) if np.ndim(s) else float(samples[0])
    grid = np.linspace(0.0, 1.0, samples.size)
    return np.interp(s, grid, samples)


@dataclass(frozen=True, eq=False)
class HamiltonianSpec:
    """A Hamiltonian attached to the canonical orientation of one arc.

    Use the constructors :func:`eikonal_power`, :func:`tilted_quadratic` and
    :func:`tabulated` rather than instantiating directly.
    """

    family: str
    m: float = 1.0
    f: np.ndarray = field(default_factory=lambda: np.zeros(1))
    b: np.ndarray = field(default_factory=lambda: np.zeros(1))
    table: np.ndarray | None = None
    p_max: float = 0.0
    slope: float = 1.0
    coercive_level: float = -np.inf
    quasiconvex_declared: bool = True

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown Hamiltonian family {self.family!r}")

    # -- evaluation -----------------------------------------------------
    def __call__(self, s, p):
        return evaluate(self, s, p)

    def dp(self, s, p):
        """A (generalized) derivative of ``H`` in ``p``."""
        s = np.asarray(s, dtype=float)
        p = np.asarray(p, dtype=float)
        if self.family == "eikonal_power":
            if self.m == 1.0:
                return np.sign(p) + 0.0 * s
            return self.m * np.abs(p) ** (self.m - 1.0) * np.sign(p) + 0.0 * s
        if self.family == "tilted_quadratic":
            return p - _interp(self.b, s)
        return _table_dp(self, s, p)

    @property
    def quasiconvex(self) -> bool:
        """Whether the sublevel sets in ``p`` are intervals (always true for the analytic families)."""
        return self.family != "tabulated" or self.quasiconvex_declared

    @property
    def convex(self) -> bool:
        return self.family != "tabulated"

    def knots(self) -> np.ndarray:
        """Dense ``s`` sample containing every interpolation knot."""
        pts = [np.linspace(0.0, 1.0, 1001)]
        for arr in (self.f, self.b):
            if arr.size > 1:
                pts.append(np.linspace(0.0, 1.0, arr.size))
        if self.table is not None:
            pts.append(np.linspace(0.0, 1.0, self.table.shape[0]))
        return np.unique(np.concatenate(pts))

    def shift(self, a: float) -> "HamiltonianSpec":
        """The Hamiltonian ``H - a``."""
        if self.family == "tabulated":
            return replace(self, table=self.table - a, coercive_level=self.coercive_level - a)
        return replace(self, f=self.f + a)

    def reverse(self) -> "HamiltonianSpec":
        return reverse(self)

    def to_dict(self) -> dict:
        if self.family == "eikonal_power":
            params = {"m": self.m, "f": self.f.tolist()}
        elif self.family == "tilted_quadratic":
            params = {"b": self.b.tolist(), "f": self.f.tolist()}
        else:
            params = {
                "values": self.table.tolist(),
                "p_max": self.p_max,
                "slope": self.slope,
                "coercive_level": None if np.isinf(self.coercive_level) else self.coercive_level,
                "quasiconvex": self.quasiconvex_declared,
            }
        return {"family": self.family, "params": params}

    def __repr__(self):
        return f"HamiltonianSpec({self.to_dict()!r})"


def eikonal_power(m: float = 1.0, f=0.0) -> HamiltonianSpec:
    if not m >= 1.0:
        raise ValidationError("exponent m must be >= 1")
    return HamiltonianSpec("eikonal_power", m=float(m), f=_samples(f))


def tilted_quadratic(b=0.0, f=0.0) -> HamiltonianSpec:
    return HamiltonianSpec("tilted_quadratic", b=_samples(b), f=_samples(f))


def tabulated(values, p_max: float, slope: float = 1.0, coercive_level: float | None = None,
              quasiconvex: bool = False) -> HamiltonianSpec:
    """Tabulated Hamiltonian; ``values[i, j]`` is ``H(s_i, p_j)`` on uniform grids.

    ``s_i`` spans ``[0, 1]`` and ``p_j`` spans ``[-p_max, p_max]``.  When a
    ``coercive_level`` is declared, both boundary columns must exceed it.
    """
    table = np.asarray(values, dtype=float)
    if table.ndim != 2 or table.shape[1] < 2 or table.shape[0] < 1 or not np.all(np.isfinite(table)):
        raise ValidationError("tabulated values must be a finite 2-D array with >= 2 columns")
    if not p_max > 0:
        raise ValidationError("p_max must be positive")
    if not slope > 0:
        raise ValidationError("coercive slope must be positive")
    level = -np.inf if coercive_level is None else float(coercive_level)
    if coercive_level is not None and (table[:, 0].min() <= level or table[:, -1].min() <= level):
        raise ValidationError("boundary columns of the table must exceed the declared coercive level")
    return HamiltonianSpec("tabulated", table=table, p_max=float(p_max), slope=float(slope),
                           coercive_level=level, quasiconvex_declared=bool(quasiconvex))


def from_dict(d: dict) -> HamiltonianSpec:
    fam = d["family"]
    params = d.get("params", {})
    if fam == "eikonal_power":
        return eikonal_power(params.get("m", 1.0), params.get("f", 0.0))
    if fam == "tilted_quadratic":
        return tilted_quadratic(params.get("b", 0.0), params.get("f", 0.0))
    if fam == "tabulated":
        return tabulated(params["values"], params["p_max"], params.get("slope", 1.0),
                         params.get("coercive_level"), params.get("quasiconvex", False))
    raise ValidationError(f"unknown Hamiltonian family {fam!r}")


# -- tabulated helpers ---------------------------------------------------

def _table_rows(spec: HamiltonianSpec, s):
    """Table rows linearly interpolated at ``s``; shape ``s.shape + (n_p,)``."""
    t = spec.table
    ns = t.shape[0]
    s = np.asarray(s, dtype=float)
    if ns == 1:
        return np.broadcast_to(t[0], s.shape + t.shape[1:])
    x = np.clip(s, 0.0, 1.0) * (ns - 1)
    i = np.minimum(np.floor(x).astype(int), ns - 2)
    w = (x - i)[..., None]
    return (1.0 - w) * t[i] + w * t[i + 1]


def _table_locate(spec: HamiltonianSpec, s, p):
    s, p = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(p, dtype=float))
    npts = spec.table.shape[1]
    dp = 2.0 * spec.p_max / (npts - 1)
    pc = np.clip(p, -spec.p_max, spec.p_max)
    y = (pc + spec.p_max) / dp
    j = np.clip(np.floor(y).astype(int), 0, npts - 2)
    rows = _table_rows(spec, s)
    lo = np.take_along_axis(rows, j[..., None], axis=-1)[..., 0]
    hi = np.take_along_axis(rows, (j + 1)[..., None], axis=-1)[..., 0]
    return p, y - j, lo, hi, dp


def _table_eval(spec, s, p):
    p, w, lo, hi, _ = _table_locate(spec, s, p)
    val = (1.0 - w) * lo + w * hi
    return val + spec.slope * np.maximum(np.abs(p) - spec.p_max, 0.0)


def _table_dp(spec, s, p):
    p, _, lo, hi, dp = _table_locate(spec, s, p)
    inside = (hi - lo) / dp
    return np.where(p > spec.p_max, spec.slope, np.where(p < -spec.p_max, -spec.slope, inside))


# -- public operations -----------------------------------------------------

def evaluate(spec: HamiltonianSpec, s, p):
    """``H(s, p)``; broadcasts over arrays, returns a float for scalars."""
    scalar = np.ndim(s) == 0 and np.ndim(p) == 0
    s = np.asarray(s, dtype=float)
    p = np.asarray(p, dtype=float)
    if spec.family == "eikonal_power":
        out = np.abs(p) ** spec.m - _interp(spec.f, s)
    elif spec.family == "tilted_quadratic":
        out = 0.5 * (p - _interp(spec.b, s)) ** 2 - _interp(spec.f, s)
    else:
        out = _table_eval(spec, s, p)
    return float(out) if scalar else out


def reverse(spec: HamiltonianSpec) -> HamiltonianSpec:
    """Hamiltonian of the reversed arc, ``R(s, p) = H(1 - s, -p)``."""
    if spec.family == "eikonal_power":
        return replace(spec, f=spec.f[::-1].copy())
    if spec.family == "tilted_quadratic":
        return replace(spec, b=-spec.b[::-1], f=spec.f[::-1].copy())
    return replace(spec, table=spec.table[::-1, ::-1].copy())


def _min_beyond(spec: HamiltonianSpec, P: float) -> float:
    """Lower bound of ``H(s, p)`` over all ``s`` and ``|p| >= P``."""
    if spec.family == "eikonal_power":
        return P ** spec.m - float(spec.f.max())
    if spec.family == "tilted_quadratic":
        s = spec.knots()
        b = np.abs(_interp(spec.b, s))
        if P < b.max():
            return -np.inf
        return float(np.min(0.5 * (P - b) ** 2 - _interp(spec.f, s)))
    t = spec.table
    if P > spec.p_max:
        return float(np.minimum(t[:, 0], t[:, -1]).min() + spec.slope * (P - spec.p_max))
    pgrid = np.linspace(-spec.p_max, spec.p_max, t.shape[1])
    cols = t[:, np.abs(pgrid) >= P]
    edge = _table_eval(spec, np.linspace(0, 1, t.shape[0])[:, None], np.array([-P, P])[None, :])
    return float(min(cols.min() if cols.size else np.inf, edge.min()))


def coercivity_radius(spec: HamiltonianSpec, level: float) -> float:
    """Radius ``P`` with ``H(s, p) > level`` for every ``s`` and ``|p| >= P``.

    Found by doubling from ``P = 1``; raises :class:`NotCoercive` past 1e8.
    """
    P = 1.0
    while _min_beyond(spec, P) <= level:
        P *= 2.0
        if P > COERCIVITY_CAP:
            raise NotCoercive(f"no coercivity radius below {COERCIVITY_CAP:g} at level {level}")
    return P


def max_at_zero(spec: HamiltonianSpec) -> float:
    """``max_s H(s, 0)``."""
    return float(np.max(evaluate(spec, spec.knots(), 0.0)))


def global_min(spec: HamiltonianSpec) -> float:
    """``min_{s,p} H(s, p)``."""
    if spec.family == "tabulated":
        return float(spec.table.min())
    return -float(spec.f.max())


def slope_bound(spec: HamiltonianSpec, P: float, n_s: int = 201, n_p: int = 2001) -> float:
    """Sampled estimate of ``sup |dH/dp|`` over ``[0, 1] x [-P, P]``.

    Takes the larger of finite-difference slopes and analytic derivatives on
    the sample, so convex families get their exact endpoint slope.
    """
    s = np.unique(np.concatenate([np.linspace(0, 1, n_s), spec.knots()[:: max(1, len(spec.knots()) // n_s)]]))
    p = np.linspace(-P, P, n_p)
    vals = evaluate(spec, s[:, None], p[None, :])
    fd = np.abs(np.diff(vals, axis=1)).max() / (p[1] - p[0])
    an = np.abs(spec.dp(s[:, None], p[None, :])).max()
    return float(max(fd, an))


def min_in_p(spec: HamiltonianSpec, s, tol: float = 1e-12):
    """Minimizer and minimum of ``p -> H(s, p)`` by golden-section search.

    Vectorized over ``s``.  Requires a quasiconvex Hamiltonian.
    """
    if not spec.quasiconvex:
        raise QuasiconvexityRequired("min_in_p needs a quasiconvex Hamiltonian")
    scalar = np.ndim(s) == 0
    s = np.atleast_1d(np.asarray(s, dtype=float))
    P = coercivity_radius(spec, max_at_zero(spec))
    lo = np.full(s.shape, -P)
    hi = np.full(s.shape, P)
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1 = evaluate(spec, s, x1)
    f2 = evaluate(spec, s, x2)
    for _ in range(400):
        if np.max(hi - lo) <= tol:
            break
        left = f1 <= f2
        hi = np.where(left, x2, hi)
        lo = np.where(left, lo, x1)
        nx1 = hi - GOLDEN * (hi - lo)
        nx2 = lo + GOLDEN * (hi - lo)
        # reuse one interior point per step
        x1, x2, f1, f2 = (
            np.where(left, nx1, x2),
            np.where(left, x1, nx2),
            np.where(left, evaluate(spec, s, nx1), f2),
            np.where(left, f1, evaluate(spec, s, nx2)),
        )
    pstar = 0.5 * (lo + hi)
    val = evaluate(spec, s, pstar)
    if scalar:
        return float(pstar[0]), float(val[0])
    return pstar, val


def a_gamma(spec: HamiltonianSpec, n: int = 1001) -> float:
    """``max_s min_p H(s, p)``."""
    _, vals = min_in_p(spec, np.linspace(0.0, 1.0, n))
    return float(vals.max())


def check_constant_minimum(spec: HamiltonianSpec, tol: float = 1e-9, n: int = 1001) -> float:
    """Verify that ``s -> min_p H(s, p)`` is constant; return that constant."""
    if spec.family == "tabulated":
        raise QuasiconvexityRequired("tabulated Hamiltonians are excluded from the eikonal layer")
    _, vals = min_in_p(spec, np.linspace(0.0, 1.0, n))
    if vals.max() - vals.min() > tol:
        raise H4Violated(f"min_p H(s, p) varies by {vals.max() - vals.min():.3g} over s")
    return float(vals.max())


def _root(spec: HamiltonianSpec, s, a, sign: int, tol: float):
    scalar = np.ndim(s) == 0
    s = np.atleast_1d(np.asarray(s, dtype=float))
    a = float(a)
    pstar, vmin = min_in_p(spec, s)
    if np.any(vmin > a + 1e-9):
        raise LevelBelowMin(f"level {a} is below min_p H = {vmin.max():.12g}")
    P = coercivity_radius(spec, a)
    lo = pstar.copy()
    hi = np.full(s.shape, sign * P)
    for _ in range(300):
        if np.max(np.abs(hi - lo)) <= tol:
            break
        mid = 0.5 * (lo + hi)
        below = evaluate(spec, s, mid) <= a
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    root = np.where(vmin >= a, pstar, 0.5 * (lo + hi))
    return float(root[0]) if scalar else root


def upper_root(spec: HamiltonianSpec, s, a: float, tol: float = 1e-12):
    """``max{p : H(s, p) <= a}`` by bisection; vectorized over ``s``."""
    return _root(spec, s, a, +1, tol)


def lower_root(spec: HamiltonianSpec, s, a: float, tol: float = 1e-12):
    """``min{p : H(s, p) <= a}`` by bisection; vectorized over ``s``."""
    return _root(spec, s, a, -1, tol)
