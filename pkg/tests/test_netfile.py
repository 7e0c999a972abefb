from __future__ import annotations

import json

import numpy as np
import pytest

from hjnet.errors import GraphInvalid, SchemaError
from hjnet.netfile import emit, load, parse, save

MINIMAL = """{
  "vertices": [{"id": "x"}, {"id": "y", "coords": [1.0, 0.0]}],
  "edges": [
    {"id": "e", "from": "x", "to": "y",
     "hamiltonian": {"family": "eikonal_power", "params": {"m": 1, "f": 1.0}}}
  ],
  "solver": {"lambda": 1.0, "N": 2000, "tol": 1e-10}
}"""


def test_minimal():
    net = parse(MINIMAL)
    assert net.graph.vertices == ("x", "y")
    assert set(net.graph.edges) == {"e", "-e"}
    assert net.solver.lam == 1.0 and net.solver.N == 2000
    assert net.coords == {"y": [1.0, 0.0]}


def test_bytes_and_files(tmp_path):
    net = parse(MINIMAL.encode())
    path = tmp_path / "n.json"
    save(net, path)
    assert emit(load(path)) == emit(net)


def test_round_trip_all_families():
    doc = json.loads(MINIMAL)
    doc["vertices"].append({"id": "z"})
    doc["edges"] += [
        {"id": "f", "from": "y", "to": "z",
         "hamiltonian": {"family": "tilted_quadratic", "params": {"b": [0.1, -0.2], "f": 0.4}}},
        {"id": "g", "from": "z", "to": "z",
         "hamiltonian": {"family": "tabulated",
                         "params": {"values": [[1.0, 0.0, 1.0], [2.0, 0.5, 2.0]], "p_max": 2.0, "slope": 1.5}}},
    ]
    doc["solver"]["eps_aubry"] = 1e-5
    doc["solver"]["caps"] = {"paths": 10, "sweeps": 100, "iterations": 1000}
    net = parse(json.dumps(doc))
    back = parse(emit(net))
    assert emit(back) == emit(net)
    s, p = np.linspace(0, 1, 9), np.linspace(-3, 3, 9)
    for e in net.specs:
        assert np.array_equal(back.specs[e](s[:, None], p[None, :]), net.specs[e](s[:, None], p[None, :]))
    assert back.solver == net.solver


def test_duplicate_edge_reports_line():
    doc = MINIMAL.replace(
        '"edges": [\n',
        '"edges": [\n    {"id": "e", "from": "y", "to": "x", "hamiltonian": {"family": "eikonal_power"}},\n')
    with pytest.raises(SchemaError) as info:
        parse(doc)
    assert info.value.field == "edges/1/id"
    assert info.value.line == 5


def test_duplicate_vertex():
    with pytest.raises(SchemaError):
        parse(MINIMAL.replace('{"id": "y", ', '{"id": "x", '))


def test_unknown_vertex():
    with pytest.raises(GraphInvalid):
        parse(MINIMAL.replace('"to": "y"', '"to": "q"'))


@pytest.mark.parametrize("old, new, field", [
    ('"m": 1', '"m": 0.5', "edges/0/hamiltonian/params/m"),
    ('"lambda": 1.0', '"lambda": 0', "solver/lambda"),
    ('"family": "eikonal_power"', '"family": "cubic"', "edges/0/hamiltonian/family"),
    ('"N": 2000', '"N": "many"', "solver/N"),
])
def test_schema_errors(old, new, field):
    with pytest.raises(SchemaError) as info:
        parse(MINIMAL.replace(old, new))
    assert info.value.field == field
    assert info.value.line is not None


def test_malformed():
    with pytest.raises(SchemaError) as info:
        parse(MINIMAL.replace('"N": 2000,', '"N": 2000'))
    assert info.value.line == 7
