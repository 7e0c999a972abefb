"""Vanishing discount on two small networks.

On a single arc with H = |p| - 1 the gap |rho_lambda(0) - sigma| behaves like
(1 - e^{-lambda}) / lambda - 1, which halves when lambda halves.  On two
parallel arcs with levels 2 and 3 the critical value is -2, the witnessing
circuit runs along the cheaper arc, and the discounted Aubry sets stay
inside the limit one.
"""

from __future__ import annotations

import math
from pathlib import Path

from hjnet.eikonal import lambda_sweep
from hjnet.netfile import load

HERE = Path(__file__).parent
LAMBDAS = [0.4, 0.2, 0.1, 0.05, 0.025]


def main():
    net = load(HERE / "networks" / "single_edge.json")
    rep = lambda_sweep(net.graph, net.specs, LAMBDAS, net.solver.disc(), normalize=False)
    print("single arc, H = |p| - 1")
    print("  lambda     gap        predicted")
    for st in rep.steps:
        pred = abs((1 - math.exp(-st.lam)) / st.lam - 1)
        print(f"  {st.lam:6.3f}  {st.gaps['e']:.6f}   {pred:.6f}")

    net = load(HERE / "networks" / "parallel.json")
    rep = lambda_sweep(net.graph, net.specs, LAMBDAS, net.solver.disc())
    print(f"\nparallel arcs: critical value {rep.critical_value:.6f}, A = {sorted(rep.A)}")
    for st in rep.steps:
        print(f"  lambda {st.lam:6.3f}: A_lambda = {sorted(st.aubry)}, inside A: {st.inclusion}, "
              f"lambda max|U| = {st.lam_max_abs_U:.2e}")
    print(f"candidate limit V = {rep.V}, subsolution violation {rep.V_subsolution_violation:.1e}")


if __name__ == "__main__":
    main()
