"""Monotone finite-difference solver for ``lam * w + H(s, w') = 0`` on ``(0, 1)``.

The interior uses the Lax-Friedrichs numerical Hamiltonian

    Hhat(s, p-, p+) = H(s, (p- + p+) / 2) - theta / 2 * (p+ - p-)

with ``theta`` bounding ``|dH/dp|``.  End points carry no data: the value at
an end node is the largest ``v`` for which the one-sided difference towards
the interior satisfies ``lam * v + H(s, Dv) <= 0``.  This realizes the state
constraint condition.  A Dirichlet datum ``alpha`` is imposed in the weak
sense ``u_0 = min(alpha, one-sided update)``, which yields the maximal
subsolution lying below ``alpha`` at the end point.

The discrete steady state is computed by semismooth Newton iterations on the
tridiagonal system, started from the interpolated solution on a grid of half
the size; the explicit pseudo-time march
``u <- u - dtau * (lam * u + Hhat)`` (CFL ``dtau * (theta / h + lam) <= 1``)
is kept as a fallback and reaches the same fixed point.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import brentq

from . import hamiltonian as ham
from .errors import ForkConditionViolated, NoConvergence, ValidationError
from .hamiltonian import HamiltonianSpec

logger = logging.getLogger(__name__)

STATE_CONSTRAINT = "state_constraint"
DIRICHLET_LEQ = "dirichlet_leq"
FORK_SLACK = 1e-6
COARSEST = 32
ROUNDING_FACTOR = 8.0


# specs hash by identity, so these caches are per spec object
@lru_cache(maxsize=256)
def _slope_bound(spec: HamiltonianSpec, P: float) -> float:
    return ham.slope_bound(spec, P)


@lru_cache(maxsize=256)
def _argmin_p(spec: HamiltonianSpec, sb: float, P: float) -> tuple[float, float]:
    """Smallest and largest minimizers of ``H(sb, .)`` (approximately)."""
    if spec.quasiconvex:
        q0, _ = ham.min_in_p(spec, sb)
        return q0, q0
    grid = np.linspace(-P, P, 4001)
    vals = spec(sb, grid)
    idx = np.nonzero(vals <= vals.min())[0]
    return float(grid[idx[0]]), float(grid[idx[-1]])


@dataclass(frozen=True)
class ArcDiscretization:
    """Grid and stopping parameters of the arc scheme.

    ``theta`` and ``dtau`` are filled in per problem by :meth:`for_problem`.
    """

    N: int = 2000
    tol: float = 1e-10
    max_sweeps: int = 10**6
    newton_iter: int = 500
    theta: float | None = None
    dtau: float | None = None

    def __post_init__(self):
        if self.N < 2:
            raise ValidationError("N must be at least 2")

    @property
    def h(self) -> float:
        return 1.0 / self.N

    @property
    def s(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.N + 1)

    def for_problem(self, spec: HamiltonianSpec, lam: float, lo: float, hi: float) -> tuple["ArcDiscretization", float]:
        """Fill ``theta`` and ``dtau`` for values ranging in ``[lo, hi]``.

        Returns the completed discretization and the Lipschitz radius ``P``.
        """
        level = lam * max(abs(lo), abs(hi))
        P = ham.coercivity_radius(spec, level)
        theta = self.theta if self.theta is not None else _slope_bound(spec, P)
        theta = max(theta, 1e-12)
        dtau = 1.0 / (theta / self.h + lam)
        return replace(self, theta=theta, dtau=dtau), P


@dataclass
class ArcProfile:
    """Grid function on ``[0, 1]`` with its boundary conditions."""

    values: np.ndarray
    lam: float
    bc0: tuple
    bc1: tuple
    residual: float
    iterations: int = 0
    method: str = "newton"
    theta: float = 0.0
    lipschitz_radius: float = np.inf
    meta: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return len(self.values) - 1

    @property
    def s(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.N + 1)

    def reversed(self) -> "ArcProfile":
        return replace(self, values=self.values[::-1].copy(), bc0=self.bc1, bc1=self.bc0, meta=dict(self.meta))

    def csv_rows(self):
        for s, u in zip(self.s, self.values):
            yield s, u


# -- scheme pieces --------------------------------------------------------

class _Scheme:
    def __init__(self, spec, lam, disc, P, alpha=None, beta=None):
        self.spec = spec
        self.lam = float(lam)
        self.disc = disc
        self.N = disc.N
        self.h = disc.h
        self.theta = disc.theta
        self.s = disc.s
        self.P = P
        self.alpha = alpha
        self.beta = beta
                # convex families are extended by tangent lines beyond |p| = P, so
        # theta bounds the slope of H for every iterate, not only near the solution
        self.truncate = spec.convex
        self._p0 = {0: self._branch_start(0.0, -1.0), 1: self._branch_start(1.0, 1.0)}

    def H(self, s, p):
        if not self.truncate:
            return self.spec(s, p)
        P = self.P
        pc = np.clip(p, -P, P)
        return self.spec(s, pc) + self.spec.dp(s, pc) * (p - pc)

    def Hp(self, s, p):
        if not self.truncate:
            return self.spec.dp(s, p)
        return self.spec.dp(s, np.clip(p, -self.P, self.P))

    def _branch_start(self, sb: float, d: float) -> float:
        """Slope from which ``p -> H(sb, d * p)`` is nondecreasing."""
        qmin, qmax = _argmin_p(self.spec, sb, self.P)
        return qmax if d > 0 else -qmin

    def end_update(self, w: float, end: int):
        """End value ``v`` from the neighbour ``w``, and ``dv/dw``.

        With ``v = w + h * p`` the one-sided slope is ``p`` at ``s = 1`` and
        ``-p`` at ``s = 0``.  ``v`` is the root of
        ``lam * v + H(s_end, D v) = 0`` on the branch where ``H`` increases
        with ``v``, i.e. the largest admissible ``v`` whenever the minimizing
        slope is admissible; otherwise ``v = -min H / lam``.  This keeps the
        boundary row monotone in ``w``.
        """
        lam, h = self.lam, self.h
        d = 1.0 if end == 1 else -1.0
        sb = 1.0 if end == 1 else 0.0
        p0 = self._p0[end]

        def phi(p):
            return lam * (w + h * p) + self.H(sb, d * p)

        if phi(p0) > 0.0:
            return -float(self.H(sb, d * p0)) / lam, 0.0
        lo, hi = p0, max(self.P, p0 + 1.0)
        while phi(hi) <= 0.0:
            lo, hi = hi, 2.0 * hi
            if hi > ham.COERCIVITY_CAP:
                raise NoConvergence("boundary update is unbounded")
        # phi increases on [p0, hi], so the root is unique there
        p = lo if phi(lo) == 0.0 else brentq(phi, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        g = d * float(self.Hp(sb, d * p))
        deriv = g / (lam * h + g) if g > 0 else 0.0
        return w + h * p, float(np.clip(deriv, 0.0, 1.0))

    def _ends(self, u):
        v0, d0 = self.end_update(u[1], 0)
        vN, dN = self.end_update(u[-2], 1)
        if self.alpha is not None and self.alpha < v0:
            v0, d0 = self.alpha, 0.0
        if self.beta is not None and self.beta < vN:
            vN, dN = self.beta, 0.0
        return v0, d0, vN, dN

    def residual_vector(self, u, ends=None):
        h, lam, theta = self.h, self.lam, self.theta
        F = np.empty_like(u)
        c = (u[2:] - u[:-2]) / (2 * h)
        F[1:-1] = lam * u[1:-1] + self.H(self.s[1:-1], c) - theta * (u[2:] - 2 * u[1:-1] + u[:-2]) / (2 * h)
        v0, d0, vN, dN = ends if ends is not None else self._ends(u)
        F[0] = u[0] - v0
        F[-1] = u[-1] - vN
        return F, (v0, d0, vN, dN), c

    def jacobian_banded(self, c, ends):
        h, lam, theta = self.h, self.lam, self.theta
        n = self.N + 1
        hp = self.Hp(self.s[1:-1], c)
        ab = np.zeros((3, n))
        ab[1, 1:-1] = lam + theta / h
        ab[0, 2:] = (hp - theta) / (2 * h)       # d F_i / d u_{i+1}
        ab[2, :-2] = (-hp - theta) / (2 * h)     # d F_i / d u_{i-1}
        _, d0, _, dN = ends
        ab[1, 0] = 1.0
        ab[0, 1] = -d0
        ab[1, -1] = 1.0
        ab[2, -2] = -dN
        return ab


def _bounds(spec, lam, alpha=None):
    lo = -ham.max_at_zero(spec) / lam
    hi = -ham.global_min(spec) / lam
    if alpha is not None:
        lo = min(lo, alpha)
    return lo, hi


def _solve(spec: HamiltonianSpec, lam: float, disc: ArcDiscretization, alpha=None, beta=None,
           guess=None) -> ArcProfile:
    if not lam > 0:
        raise ValidationError("discount factor lambda must be positive")
    disc = disc or ArcDiscretization()
    extra = [x for x in (alpha, beta) if x is not None]
    lo, hi = _bounds(spec, lam, min(extra) if extra else None)
    full, P = disc.for_problem(spec, lam, lo, hi)
    sch = _Scheme(spec, lam, full, P, alpha, beta)
    if guess is not None and len(guess) == full.N + 1:
        u = np.array(guess, dtype=float)
    elif full.N >= 2 * COARSEST:
        # grid continuation: kinks travel one node per Newton step, so start
        # from the interpolated solution of the half-size problem
        try:
            coarse = _solve(spec, lam, replace(disc, N=full.N // 2), alpha, beta)
            u = np.interp(full.s, coarse.s, coarse.values)
        except NoConvergence:
            u = np.full(full.N + 1, lo)
    else:
        u = np.full(full.N + 1, lo)
    # the second difference loses about eps * |u| * theta / h to rounding, so
    # an absolute tolerance below that floor is unreachable for large values
    scale = max(1.0, abs(lo), abs(hi), *(abs(x) for x in extra))
    tol = max(full.tol, ROUNDING_FACTOR * np.finfo(float).eps * scale * (full.theta / full.h + lam))

    F, ends, c = sch.residual_vector(u)
    res = np.abs(F).max()
    best = (res, u)
    it = 0
    method = "newton"
    # undamped semismooth Newton: for convex H the Jacobian is an M-matrix and
    # the iterates decrease monotonically after the first step
    while res >= tol and it < full.newton_iter:
        it += 1
        ab = sch.jacobian_banded(c, ends)
        try:
            u = u + solve_banded((1, 1), ab, -F)
            F, ends, c = sch.residual_vector(u)
        except (np.linalg.LinAlgError, ValueError, NoConvergence):
            break
        res = np.abs(F).max()
        if not np.isfinite(res):
            break
        if res < best[0]:
            best = (res, u)
    res, u = best
    if res >= tol:
        method = "pseudo_time"
        logger.debug("Newton stalled at residual %.3g; switching to pseudo-time marching", res)
        u, res, sweeps = _march(sch, u, tol, full.max_sweeps)
        it += sweeps
        if res >= tol:
            raise NoConvergence(f"arc scheme residual {res:.3g} above tol {tol:.3g}",
                                partial=u)
    bc0 = (STATE_CONSTRAINT,) if alpha is None else (DIRICHLET_LEQ, float(alpha))
    bc1 = (STATE_CONSTRAINT,) if beta is None else (DIRICHLET_LEQ, float(beta))
    prof = ArcProfile(u, float(lam), bc0, bc1, float(res), it, method, full.theta, P)
    prof.meta["tol_effective"] = tol
    return prof


def _march(sch: _Scheme, u, tol, max_sweeps):
    """Explicit pseudo-time iteration of the monotone scheme at the CFL limit."""
    dtau = sch.disc.dtau
    u = u.copy()
    best = np.inf
    last_check = 0
    res = np.inf
    for k in range(1, max_sweeps + 1):
        F, ends, _ = sch.residual_vector(u)
        res = np.abs(F).max()
        if res < tol:
            return u, res, k
        u[1:-1] -= dtau * F[1:-1]
        u[0] = ends[0]
        u[-1] = ends[2]
        if k - last_check >= 5000:
            if res > 0.9 * best:
                break
            best, last_check = res, k
    return u, res, k


# -- public operations ------------------------------------------------------

def solve_umax(spec: HamiltonianSpec, lam: float, disc: ArcDiscretization | None = None,
               guess=None) -> ArcProfile:
    """Maximal subsolution: state constraints at both end points."""
    return _solve(spec, lam, disc or ArcDiscretization(), guess=guess)


def solve_ualpha(spec: HamiltonianSpec, lam: float, alpha: float, disc: ArcDiscretization | None = None,
                 guess=None) -> ArcProfile:
    """Maximal subsolution with ``u(0) <= alpha``; state constraint at ``s = 1``."""
    return _solve(spec, lam, disc or ArcDiscretization(), alpha=float(alpha), guess=guess)


def rho_edge(spec: HamiltonianSpec, lam: float, alpha: float, disc: ArcDiscretization | None = None) -> float:
    """Edge map value: the end value ``u_alpha(1)``."""
    return float(solve_ualpha(spec, lam, alpha, disc).values[-1])


def alpha_under(spec: HamiltonianSpec, lam: float, disc: ArcDiscretization | None = None) -> float:
    """Initial value ``u_max(0)`` of the maximal subsolution."""
    return float(solve_umax(spec, lam, disc).values[0])


def alpha_over(spec: HamiltonianSpec, lam: float, disc: ArcDiscretization | None = None) -> float:
    """Terminal value ``u_max(1)`` of the maximal subsolution."""
    return float(solve_umax(spec, lam, disc).values[-1])


def sandwich_violation(u: np.ndarray, ua: np.ndarray, ub_rev: np.ndarray, alpha: float, beta: float) -> float:
    """Largest violation of the two-sided bound for the two-point problem.

    ``ua`` is ``u_alpha`` on the arc and ``ub_rev`` is ``u_beta`` of the
    reversed arc read backwards (so ``ub_rev[-1]`` sits at ``s = 1``).
    """
    upper = np.minimum(ua, ub_rev)
    lower = np.maximum(ub_rev + alpha - ub_rev[0], ua + beta - ua[-1])
    return float(max(np.max(u - upper), np.max(lower - u), 0.0))


def solve_dirichlet_pair(spec: HamiltonianSpec, lam: float, alpha: float, beta: float,
                         disc: ArcDiscretization | None = None,
                         reverse_spec: HamiltonianSpec | None = None,
                         slack: float = FORK_SLACK) -> ArcProfile:
    """Solution with ``u(0) = alpha`` and ``u(1) = beta``.

    Solvable iff ``alpha <= rho_rev(beta)`` and ``beta <= rho(alpha)``; raises
    :class:`ForkConditionViolated` when either fails by more than ``slack``.
    """
    disc = disc or ArcDiscretization()
    rspec = reverse_spec if reverse_spec is not None else ham.reverse(spec)
    ua = solve_ualpha(spec, lam, alpha, disc)
    ub = solve_ualpha(rspec, lam, beta, disc)
    if not (alpha <= ub.values[-1] + slack and beta <= ua.values[-1] + slack):
        raise ForkConditionViolated(
            f"alpha={alpha:.12g} vs rho_rev(beta)={ub.values[-1]:.12g}; "
            f"beta={beta:.12g} vs rho(alpha)={ua.values[-1]:.12g}")
    prof = _solve(spec, lam, disc, alpha=float(alpha), beta=float(beta), guess=np.minimum(ua.values, ub.values[::-1]))
    prof.meta["sandwich_violation"] = sandwich_violation(prof.values, ua.values, ub.values[::-1], alpha, beta)
    return prof


def interior_residual(spec: HamiltonianSpec, prof: ArcProfile, theta: float | None = None) -> float:
    """Sup-norm of ``lam * u + Hhat`` over interior nodes."""
    u = prof.values
    h = 1.0 / prof.N
    th = prof.theta if theta is None else theta
    s = prof.s
    c = (u[2:] - u[:-2]) / (2 * h)
    F = prof.lam * u[1:-1] + spec(s[1:-1], c) - th * (u[2:] - 2 * u[1:-1] + u[:-2]) / (2 * h)
    return float(np.abs(F).max())
