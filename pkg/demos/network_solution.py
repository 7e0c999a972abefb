"""Solve a four-vertex network: vertex values, Aubry set and arc profiles.

The triangle a -> b -> c -> a carries three different Hamiltonians and d
hangs off c.  The pendant vertex cannot lie on a circuit, so it is never in
the Aubry set, and its value is the edge map of the pendant arc.
"""

from __future__ import annotations

from pathlib import Path

from hjnet import arc
from hjnet.aubry import aubry_representation, detect_aubry
from hjnet.discrete import EdgeMapTable, solve_dfe
from hjnet.extension import extend, verify_vertex_conditions
from hjnet.netfile import load

HERE = Path(__file__).parent


def main():
    net = load(HERE / "networks" / "mixed.json")
    lam = net.require_lambda()
    table = EdgeMapTable.numeric(net.graph, net.specs, lam, net.solver.disc())
    sol = solve_dfe(table, tol=net.solver.tol)
    print(f"method {sol.method}, {sol.iterations} iterations, residual {sol.residual:.1e}")
    for x, u in sorted(sol.U.items()):
        print(f"  U({x}) = {u:.10f}")

    rep = detect_aubry(table, sol.U)
    print(f"\nAubry set {sorted(rep.members)}")
    for y, c in sorted(rep.witnesses.items()):
        print(f"  {y}: witnessed by circuit {c}")
    for x in sorted(sol.U):
        print(f"  representation at {x}: {aubry_representation(table, sol.U, rep, x):.10f}")

    ext = extend(net.graph, net.specs, lam, sol.U, net.solver.disc(), tol=net.solver.tol)
    report = verify_vertex_conditions(table, ext, sol.U, tol=net.solver.tol)
    print(f"\nvertex conditions hold: {report.ok}; witnesses {report.witness}")
    for e, prof in ext.profiles.items():
        print(f"  {e}: u(0) = {prof.values[0]:.6f}, u(1) = {prof.values[-1]:.6f}, "
              f"min = {prof.values.min():.6f}, interior residual {ext.residual[e]:.1e}")

    pendant = arc.solve_ualpha(net.specs["e4"], lam, sol.U["c"], net.solver.disc())
    gap = abs(pendant.values - ext.profiles["e4"].values).max()
    print(f"\npendant arc equals the maximal subsolution from U(c): max difference {gap:.1e}")


if __name__ == "__main__":
    main()
