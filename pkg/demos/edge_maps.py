"""Edge maps on a single arc: closed form, saturation and an independent oracle.

For H = |p| - 1 and lambda = 1 the maximal subsolution starting from 0 is
1 - e^{-s}, so rho(0) = 1 - 1/e.  Above the threshold alpha_under the map is
constant.  The semi-Lagrangian control solver gives a second opinion.
"""

from __future__ import annotations

import math

import numpy as np

from hjnet import arc
from hjnet.arc import ArcDiscretization
from hjnet.hamiltonian import eikonal_power, tilted_quadratic
from hjnet.semilagrangian import sl_oracle_rho


def main():
    spec = eikonal_power(1, 1.0)
    exact = 1 - math.exp(-1)
    print("grid refinement for rho(0) with H = |p| - 1, lambda = 1")
    for N in (250, 500, 1000, 2000):
        val = arc.rho_edge(spec, 1.0, 0.0, ArcDiscretization(N=N))
        print(f"  N = {N:5d}  rho = {val:.8f}  error = {abs(val - exact):.2e}")

    spec = tilted_quadratic([0.4, -0.2], [0.6, 1.0])
    lam = 0.5
    under, over = arc.alpha_under(spec, lam), arc.alpha_over(spec, lam)
    print(f"\ntilted quadratic, lambda = {lam}: alpha_under = {under:.6f}, alpha_over = {over:.6f}")
    print("   alpha      rho (FD)    rho (SL)")
    for alpha in np.linspace(under - 3.0, under + 1.0, 6):
        fd = arc.rho_edge(spec, lam, alpha)
        sl = sl_oracle_rho(spec, lam, alpha)
        print(f"  {alpha:8.4f}  {fd:10.6f}  {sl:10.6f}")


if __name__ == "__main__":
    main()
