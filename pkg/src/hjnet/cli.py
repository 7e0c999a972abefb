"""Command-line interface.

Exit status is 0 on success, 2 for invalid input and 3 when a numerical
method fails; in the latter two cases a JSON object describing the error is
written to stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys

from . import __version__
from .aubry import detect_aubry
from .discrete import EdgeMapTable, beta_cycle, dfe_residual, rho_path, solve_dfe
from .eikonal import check_eikonal_subsolution, eikonal_data, lambda_sweep, solve_eikonal_dfe
from .errors import HJNetError, NumericalError, SchemaError, ValidationError
from .extension import extend, verify_vertex_conditions
from .netfile import Network, load
from .selftest import run_selftest

logger = logging.getLogger("hjnet")


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _round(obj):
    """Round floats to 12 significant digits for JSON output."""
    if isinstance(obj, float):
        return obj if not math.isfinite(obj) else float(_fmt(obj))
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if hasattr(obj, "item"):
        return _round(obj.item())
    return obj


def _dump(obj, fh=None):
    json.dump(_round(obj), fh or sys.stdout, indent=2)
    (fh or sys.stdout).write("\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ValidationError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _network(args) -> Network:
    net = load(args.network)
    cfg = net.solver
    if args.tol is not None:
        cfg.tol = args.tol
    if args.grid_n is not None:
        cfg.N = args.grid_n
    return net


def _table(net: Network, lam: float) -> EdgeMapTable:
    return EdgeMapTable.numeric(net.graph, net.specs, lam, net.solver.disc())


# -- commands -----------------------------------------------------------------

def cmd_solve(args) -> int:
    net = _network(args)
    lam = net.require_lambda(args.lam)
    cfg = net.solver
    table = _table(net, lam)
    sol = solve_dfe(table, tol=cfg.tol, jacobi=args.jacobi, max_iter=cfg.max_iter)
    ext = extend(net.graph, net.specs, lam, sol.U, cfg.disc(), tol=cfg.tol)
    report = verify_vertex_conditions(table, ext, sol.U, tol=cfg.tol)

    os.makedirs(args.output, exist_ok=True)
    with open(os.path.join(args.output, "U.json"), "w") as fh:
        _dump(dict(sorted(sol.U.items())), fh)
    with open(os.path.join(args.output, "arcs.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["edge_id", "s", "u"])
        for e, s, u in ext.csv_rows():
            w.writerow([e, _fmt(s), _fmt(u)])
    residuals = {
        "lambda": lam,
        "dfe_residual": dfe_residual(table, sol.U),
        "method": sol.method,
        "iterations": sol.iterations,
        "interior_residual": ext.residual,
        "trace_error": ext.trace_error,
        "sandwich_violation": {e: p.meta.get("sandwich_violation") for e, p in ext.profiles.items()},
        "vertex_conditions": report.to_dict(),
    }
    with open(os.path.join(args.output, "residuals.json"), "w") as fh:
        _dump(residuals, fh)
    _dump({"U": dict(sorted(sol.U.items())), "vertex_conditions_ok": report.ok, "output": args.output})
    return 0


def cmd_rho(args) -> int:
    net = _network(args)
    lam = net.require_lambda(args.lam)
    table = _table(net, lam)
    g = net.graph
    if args.path:
        path = g.path(args.path)
    elif args.edge:
        path = g.path([args.edge])
    else:
        raise ValidationError("give --edge or --path")
    print(_fmt(rho_path(table, path, args.alpha)))
    return 0


def cmd_beta(args) -> int:
    net = _network(args)
    lam = net.require_lambda(args.lam)
    table = _table(net, lam)
    print(_fmt(beta_cycle(table, net.graph.path(args.cycle))))
    return 0


def cmd_aubry(args) -> int:
    net = _network(args)
    lam = net.require_lambda(args.lam)
    table = _table(net, lam)
    sol = solve_dfe(table, tol=net.solver.tol, jacobi=args.jacobi, max_iter=net.solver.max_iter)
    eps = args.eps if args.eps is not None else net.solver.eps_aubry
    rep = detect_aubry(table, sol.U, eps)
    out = rep.to_dict()
    out["U"] = dict(sorted(sol.U.items()))
    _dump(out)
    return 0


def cmd_eikonal(args) -> int:
    net = _network(args)
    data = eikonal_data(net.graph, net.specs)
    out = data.to_dict()
    if args.trace:
        with open(args.trace) as fh:
            trace = {str(k): float(v) for k, v in json.load(fh).items()}
        unknown = set(trace) - set(net.graph.vertices)
        if unknown:
            raise ValidationError(f"trace names unknown vertices {sorted(unknown)}")
    elif data.aubry:
        trace = {min(data.aubry): 0.0}
    else:
        trace = None
    if trace is not None:
        V = solve_eikonal_dfe(net.graph, data.sigma, trace)
        out["trace"] = trace
        out["V"] = dict(sorted(V.items()))
        out["subsolution_violation"] = check_eikonal_subsolution(net.graph, data.sigma, V)
    _dump(out)
    return 0


def cmd_sweep(args) -> int:
    net = _network(args)
    probe = args.probe if args.probe == "c*" else float(args.probe)
    rep = lambda_sweep(net.graph, net.specs, _floats(args.lambdas), net.solver.disc(),
                       normalize=args.normalize, probe=probe, tol=net.solver.tol,
                       eps_aubry=net.solver.eps_aubry)
    if args.output:
        os.makedirs(args.output, exist_ok=True)
        with open(os.path.join(args.output, "sweep.json"), "w") as fh:
            _dump(rep.to_dict(), fh)
        rep.write_csv(os.path.join(args.output, "sweep_vertices.csv"),
                      os.path.join(args.output, "sweep_edges.csv"))
    _dump(rep.to_dict())
    return 0


def cmd_selftest(args) -> int:
    seed = args.seed if args.seed is not None else 0
    results = run_selftest(seed=seed, count=args.count, tol=args.tol or 1e-10, grid_n=args.grid_n or 500)
    ok = all(r.ok for r in results)
    _dump({"seed": seed, "ok": ok, "checks": [r.to_dict() for r in results]})
    if not ok:
        raise NumericalError("self-test failed: " + ", ".join(r.name for r in results if not r.ok))
    return 0


# -- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hjnet", description="Discounted and eikonal Hamilton-Jacobi equations on networks.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--tol", type=float, default=None, help="solver tolerance (overrides the network file)")
    p.add_argument("--grid-n", type=int, default=None, help="grid intervals per arc (overrides the network file)")
    p.add_argument("--seed", type=int, default=None, help="random seed for selftest")
    p.add_argument("--jacobi", action="store_true", help="Jacobi instead of Gauss-Seidel value iteration")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def net_cmd(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("network", help="network file (JSON)")
        return sp

    sp = net_cmd("solve", "solve the discrete equation and extend it to every arc")
    sp.add_argument("--lambda", dest="lam", type=float, default=None)
    sp.add_argument("-o", "--output", required=True, help="output directory")
    sp.set_defaults(func=cmd_solve)

    sp = net_cmd("rho", "edge map of one edge or of a path")
    sp.add_argument("--lambda", dest="lam", type=float, default=None)
    sp.add_argument("--edge")
    sp.add_argument("--path", help="comma-separated edge ids")
    sp.add_argument("--alpha", type=float, required=True)
    sp.set_defaults(func=cmd_rho)

    sp = net_cmd("beta", "fixed point of the path map of a cycle")
    sp.add_argument("--lambda", dest="lam", type=float, default=None)
    sp.add_argument("--cycle", required=True, help="comma-separated edge ids")
    sp.set_defaults(func=cmd_beta)

    sp = net_cmd("aubry", "Aubry set of the discounted solution")
    sp.add_argument("--lambda", dest="lam", type=float, default=None)
    sp.add_argument("--eps", type=float, default=None, help="membership tolerance")
    sp.set_defaults(func=cmd_aubry)

    sp = net_cmd("eikonal", "critical value, edge weights, Aubry set and one eikonal solution")
    sp.add_argument("--trace", help="JSON object mapping Aubry vertices to values")
    sp.set_defaults(func=cmd_eikonal)

    sp = net_cmd("sweep", "discounted solutions for decreasing lambda against the eikonal limit")
    sp.add_argument("--lambdas", required=True, help="comma-separated discount factors")
    sp.add_argument("--normalize", action="store_true", help="shift Hamiltonians by the critical value first")
    sp.add_argument("--probe", default="0", help="initial value for edge gaps, or 'c*'")
    sp.add_argument("-o", "--output", help="directory for sweep.json and CSV files")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("selftest", help="randomized property checks")
    sp.add_argument("--count", type=int, default=200, help="random instances per property")
    sp.set_defaults(func=cmd_selftest)
    return p


def _error_payload(exc: BaseException) -> dict:
    out = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, SchemaError):
        out["field"] = exc.field
        out["line"] = exc.line
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)],
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValidationError, OSError) as exc:
        return _fail(exc, 2)
    except HJNetError as exc:
        return _fail(exc, 3)


def _fail(exc: BaseException, code: int) -> int:
    json.dump(_error_payload(exc), sys.stderr)
    sys.stderr.write("\n")
    return code

if __name__ == "__main__":
    sys.exit(main())
