"""Discounted and eikonal Hamilton-Jacobi equations on networks.

The package reduces the equation on a network to a functional equation on
its vertices: each arc contributes an edge map computed by a monotone
finite-difference solver, the vertex values solve a min-type fixed-point
problem, and the arc profiles are recovered afterwards.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .arc import ArcDiscretization, ArcProfile, alpha_over, alpha_under, rho_edge, solve_dirichlet_pair
from .aubry import AubryReport, aubry_representation, detect_aubry, verify_spring
from .discrete import (AffineEdgeMap, EdgeMapTable, NumericEdgeMap, TabulatedEdgeMap, beta_cycle, rho_path,
                       solve_dfe)
from .eikonal import critical_value, eikonal_data, lambda_sweep, sigma_edge, solve_eikonal_dfe
from .errors import HJNetError, NumericalError, ValidationError
from .extension import extend, verify_vertex_conditions
from .graph import OrientedGraph, Path
from .hamiltonian import HamiltonianSpec, eikonal_power, tabulated, tilted_quadratic
from .netfile import Network, emit, load, parse
from .semilagrangian import sl_oracle_rho

__all__ = [
    "AffineEdgeMap", "ArcDiscretization", "ArcProfile", "AubryReport", "EdgeMapTable", "HJNetError",
    "HamiltonianSpec", "Network", "NumericEdgeMap", "NumericalError", "OrientedGraph", "Path",
    "TabulatedEdgeMap", "ValidationError", "alpha_over", "alpha_under", "aubry_representation", "beta_cycle",
    "critical_value", "detect_aubry", "eikonal_data", "eikonal_power", "emit", "extend", "lambda_sweep",
    "load", "parse", "rho_edge", "rho_path", "sigma_edge", "sl_oracle_rho", "solve_dfe",
    "solve_dirichlet_pair", "solve_eikonal_dfe", "tabulated", "tilted_quadratic", "verify_spring",
    "verify_vertex_conditions",
]
