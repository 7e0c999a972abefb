"""Semi-Lagrangian oracle for the edge map of convex Hamiltonians.

The maximal subsolution of ``lam * u + H(s, u') = 0`` with ``u(0) <= alpha``
and a state constraint at ``s = 1`` is the value function of the control
problem

    u(x) = inf  int_0^tau e^{-lam t} L(y, q) dt + e^{-lam tau} alpha,
    y(0) = x,  y' = -q,

where ``tau`` is the exit time through ``s = 0`` (``tau = inf`` if the
trajectory never exits) and ``L`` is the convex conjugate of ``H`` in ``p``.
Trajectories may not leave through ``s = 1`` (state constraint); pushing
against the wall is not allowed, so a trajectory at rest at ``s = 1`` pays
``L(1, 0)``.

The discrete dynamic program

    u(x) = min_q  (1 - e^{-lam dt}) / lam * L(mid, q) + e^{-lam dt} u(x - q dt)

is solved by Gauss-Seidel sweeps in alternating directions.  Optimal
trajectories are monotone in one dimension, so a few sweeps suffice.
Nothing here shares code with the finite-difference solver, which is the
point of an oracle.
"""

from __future__ import annotations

import logging

import numpy as np

from . import hamiltonian as ham
from .errors import ConvexityRequired, NoConvergence
from .hamiltonian import HamiltonianSpec

logger = logging.getLogger(__name__)


def lagrangian(spec: HamiltonianSpec, s, q, P: float, tol: float = 1e-10) -> np.ndarray:
    """``L(s, q) = max_{|p| <= P} p q - H(s, p)`` by golden-section search."""
    s, q = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(q, dtype=float))
    lo = np.full(s.shape, -P)
    hi = np.full(s.shape, P)

    def g(p):
        return p * q - ham.evaluate(spec, s, p)

    x1 = hi - ham.GOLDEN * (hi - lo)
    x2 = lo + ham.GOLDEN * (hi - lo)
    g1, g2 = g(x1), g(x2)
    while np.max(hi - lo) > tol:
        right = g1 < g2
        lo = np.where(right, x1, lo)
        hi = np.where(right, hi, x2)
        x1_new = np.where(right, x2, hi - ham.GOLDEN * (hi - lo))
        x2_new = np.where(right, lo + ham.GOLDEN * (hi - lo), x1)
        g_fresh = g(np.where(right, x2_new, x1_new))
        g1, g2 = np.where(right, g2, g_fresh), np.where(right, g_fresh, g1)
        x1, x2 = x1_new, x2_new
    return g(0.5 * (lo + hi))


def sl_oracle_rho(spec: HamiltonianSpec, lam: float, alpha: float, M: int = 200,
                  nx: int = 2001, nq: int = 401, tol: float = 1e-12, max_sweeps: int = 500) -> float:
    """Oracle value of the edge map ``rho(alpha)`` (the value at ``s = 1``).

    Parameters
    ----------
    M : int
        Time steps per unit time (``dt = 1 / M``).
    nx, nq : int
        Number of space nodes and of control samples.
    """
    if not spec.convex:
        raise ConvexityRequired("the semi-Lagrangian oracle needs a convex Hamiltonian")
    lam = float(lam)
    dt = 1.0 / M
    x = np.linspace(0.0, 1.0, nx)
    dx = x[1] - x[0]

    # the value range bounds the slopes that matter, hence the admissible controls
    lo = min(alpha, -ham.max_at_zero(spec) / lam)
    hi = -ham.global_min(spec) / lam
    P = ham.coercivity_radius(spec, lam * max(abs(lo), abs(hi)))
    if spec.family == "eikonal_power" and spec.m == 1.0:
        Q = 1.0
    else:
        Q = ham.slope_bound(spec, P)
    q = np.linspace(-Q, Q, nq)

    X, Qg = np.meshgrid(x, q, indexing="ij")
    Y = X - Qg * dt
    exits = Y < 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        tau = np.where(exits, X / np.where(Qg > 0, Qg, 1.0), dt)
    Y = np.clip(Y, 0.0, 1.0)
    L = lagrangian(spec, 0.5 * (X + Y), Qg, P)
    disc = np.exp(-lam * tau)
    running = (1.0 - disc) / lam * L
    cost_exit = running + disc * alpha
    # state constraint: controls leaving through s = 1 are not admissible
    running = np.where(X - Qg * dt > 1.0, np.inf, running)

    j = np.minimum(np.floor(Y / dx).astype(int), nx - 2)
    w = Y / dx - j
    gamma = np.exp(-lam * dt)

    # weight of the node itself inside its own interpolation stencil
    a_self = np.where(j == np.arange(nx)[:, None], 1.0 - w, 0.0) + np.where(j + 1 == np.arange(nx)[:, None], w, 0.0)
    a_self = np.where(exits, 0.0, a_self)

    u = np.full(nx, hi)
    for sweep in range(max_sweeps):
        change = 0.0
        order = range(nx) if sweep % 2 == 0 else range(nx - 1, -1, -1)
        for i in order:
            ui = u[i]
            rest = (1.0 - w[i]) * u[j[i]] + w[i] * u[j[i] + 1] - a_self[i] * ui
            cand = np.where(exits[i], cost_exit[i], (running[i] + gamma * rest) / (1.0 - gamma * a_self[i]))
            new = cand.min()
            change = max(change, abs(new - ui))
            u[i] = new
        if change < tol:
            break
    else:
        raise NoConvergence(f"sweeps stalled with change {change:.3g}", partial=u)
    logger.debug("semi-Lagrangian oracle: %d sweeps", sweep + 1)
    return float(u[-1])
