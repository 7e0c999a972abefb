"""Network files: a JSON document with vertices, arcs and solver settings.

Example::

    {
      "vertices": [{"id": "x"}, {"id": "y", "coords": [1.0, 0.0]}],
      "edges": [
        {"id": "e", "from": "x", "to": "y",
         "hamiltonian": {"family": "eikonal_power", "params": {"m": 1, "f": 1.0}}}
      ],
      "solver": {"lambda": 1.0, "N": 2000, "tol": 1e-10}
    }

Only canonical orientations are listed; reverse edges are synthesized.
Validation errors carry the offending field and, when it can be located,
its line in the source text.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

import jsonschema

from . import hamiltonian as ham
from .arc import ArcDiscretization
from .errors import SchemaError, ValidationError
from .graph import DEFAULT_PATH_CAP, OrientedGraph
from .hamiltonian import HamiltonianSpec

_number_or_samples = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 1},
    ]
}

SCHEMA = {
    "type": "object",
    "required": ["vertices", "edges"],
    "additionalProperties": False,
    "properties": {
        "vertices": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["id"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "coords": {"type": "array", "items": {"type": "number"}},
                },
            },
        },
        "edges": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["id", "from", "to", "hamiltonian"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "string", "pattern": "^[^-]"},
                    "from": {"type": "string"},
                    "to": {"type": "string"},
                    "hamiltonian": {
                        "type": "object",
                        "required": ["family"],
                        "additionalProperties": False,
                        "properties": {
                            "family": {"enum": list(ham.FAMILIES)},
                            "params": {"type": "object"},
                        },
                        "allOf": [
                            {
                                "if": {"properties": {"family": {"const": "eikonal_power"}}},
                                "then": {"properties": {"params": {
                                    "additionalProperties": False,
                                    "properties": {"m": {"type": "number", "minimum": 1},
                                                   "f": _number_or_samples}}}},
                            },
                            {
                                "if": {"properties": {"family": {"const": "tilted_quadratic"}}},
                                "then": {"properties": {"params": {
                                    "additionalProperties": False,
                                    "properties": {"b": _number_or_samples, "f": _number_or_samples}}}},
                            },
                            {
                                "if": {"properties": {"family": {"const": "tabulated"}}},
                                "then": {
                                    "required": ["params"],
                                    "properties": {"params": {
                                        "required": ["values", "p_max"],
                                        "additionalProperties": False,
                                        "properties": {
                                            "values": {"type": "array", "minItems": 1, "items": {
                                                "type": "array", "minItems": 2, "items": {"type": "number"}}},
                                            "p_max": {"type": "number", "exclusiveMinimum": 0},
                                            "slope": {"type": "number", "exclusiveMinimum": 0},
                                            "coercive_level": {"type": ["number", "null"]},
                                            "quasiconvex": {"type": "boolean"},
                                        }}},
                                },
                            },
                        ],
                    },
                },
            },
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "lambda": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "N": {"type": "integer", "minimum": 2},
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "eps_aubry": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "caps": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "paths": {"type": "integer", "minimum": 1},
                        "sweeps": {"type": "integer", "minimum": 1},
                        "iterations": {"type": "integer", "minimum": 1},
                    },
                },
            },
        },
    },
}


@dataclass
class SolverConfig:
    lam: float | None = None
    N: int = 2000
    tol: float = 1e-10
    eps_aubry: float | None = None
    path_cap: int = DEFAULT_PATH_CAP
    max_sweeps: int = 10**6
    max_iter: int = 10**7

    def disc(self) -> ArcDiscretization:
        return ArcDiscretization(N=self.N, tol=self.tol, max_sweeps=self.max_sweeps)

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "N": self.N,
            "tol": self.tol,
            "eps_aubry": self.eps_aubry,
            "caps": {"paths": self.path_cap, "sweeps": self.max_sweeps, "iterations": self.max_iter},
        }


@dataclass
class Network:
    """Parsed network file."""

    graph: OrientedGraph
    specs: dict[str, HamiltonianSpec]
    solver: SolverConfig = field(default_factory=SolverConfig)
    coords: dict[str, list[float]] = field(default_factory=dict)

    def require_lambda(self, override: float | None = None) -> float:
        lam = override if override is not None else self.solver.lam
        if lam is None:
            raise ValidationError("a discount factor is required: set solver.lambda or pass --lambda")
        if not lam > 0:
            raise ValidationError(f"discount factor must be positive, got {lam}")
        return float(lam)

    def to_dict(self) -> dict:
        g = self.graph
        verts = []
        for x in g.vertices:
            item = {"id": x}
            if x in self.coords:
                item["coords"] = list(self.coords[x])
            verts.append(item)
        edges = [{"id": e, "from": g.origin[e], "to": g.terminal(e), "hamiltonian": self.specs[e].to_dict()}
                 for e in g.canonical]
        return {"vertices": verts, "edges": edges, "solver": self.solver.to_dict()}


# -- locating fields in the source text ------------------------------------------

_TOKEN = re.compile(r'"(?:[^"\\]|\\.)*"|[{}\[\]:,]|[^\s{}\[\]:,"]+')


def _field_lines(text: str) -> dict[tuple, int]:
    """Line (1-based) where the value at each JSON path starts."""
    lines: dict[tuple, int] = {}
    stack: list[list] = []        # [container kind, current key or index]
    pending_key = None
    line = 1
    pos = 0
    for m in _TOKEN.finditer(text):
        line += text.count("\n", pos, m.start())
        pos = m.start()
        tok = m.group()
        if tok == ":":
            continue
        if tok == ",":
            if stack and stack[-1][0] == "list":
                stack[-1][1] += 1
            continue
        if tok in "}]":
            if stack:
                stack.pop()
            continue
        if stack and stack[-1][0] == "dict" and pending_key is None and tok.startswith('"'):
            nxt = text[m.end():].lstrip()[:1]
            if nxt == ":":
                pending_key = json.loads(tok)
                stack[-1][1] = pending_key
                lines[tuple(s[1] for s in stack)] = line
                continue
        path = tuple(s[1] for s in stack)
        lines.setdefault(path, line)
        pending_key = None
        if tok == "{":
            stack.append(["dict", None])
        elif tok == "[":
            stack.append(["list", 0])
    return lines


def _where(lines: dict[tuple, int], path) -> tuple[str, int | None]:
    path = tuple(path)
    name = "/".join(str(p) for p in path) or "<root>"
    while path and path not in lines:
        path = path[:-1]
    return name, lines.get(path)


# -- parse / emit ----------------------------------------------------------------

def parse(data: bytes | str) -> Network:
    """Validate a network document and build the graph and Hamiltonians."""
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SchemaError(f"file is not UTF-8: {exc}") from None
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON: {exc.msg}", line=exc.lineno) from None
    lines = _field_lines(data)

    errors = sorted(jsonschema.Draft202012Validator(SCHEMA).iter_errors(doc), key=lambda e: list(e.path))
    if errors:
        err = errors[0]
        name, line = _where(lines, err.path)
        raise SchemaError(err.message, field=name, line=line)

    for kind in ("vertices", "edges"):
        seen = set()
        for i, item in enumerate(doc[kind]):
            if item["id"] in seen:
                name, line = _where(lines, (kind, i, "id"))
                raise SchemaError(f"duplicate id {item['id']!r}", field=name, line=line)
            seen.add(item["id"])

    graph = OrientedGraph([v["id"] for v in doc["vertices"]],
                          [(e["id"], e["from"], e["to"]) for e in doc["edges"]])
    specs = {}
    for i, e in enumerate(doc["edges"]):
        try:
            specs[e["id"]] = ham.from_dict(e["hamiltonian"])
        except ValidationError as exc:
            name, line = _where(lines, ("edges", i, "hamiltonian"))
            raise SchemaError(str(exc), field=name, line=line) from None

    s = doc.get("solver", {})
    caps = s.get("caps", {})
    solver = SolverConfig(
        lam=s.get("lambda"),
        N=s.get("N", 2000),
        tol=s.get("tol", 1e-10),
        eps_aubry=s.get("eps_aubry"),
        path_cap=caps.get("paths", DEFAULT_PATH_CAP),
        max_sweeps=caps.get("sweeps", 10**6),
        max_iter=caps.get("iterations", 10**7),
    )
    coords = {v["id"]: list(v["coords"]) for v in doc["vertices"] if "coords" in v}
    return Network(graph, specs, solver, coords)


def emit(net: Network) -> str:
    return json.dumps(net.to_dict(), indent=2)


def load(path) -> Network:
    with open(path, "rb") as fh:
        return parse(fh.read())


def save(net: Network, path) -> None:
    with open(path, "w") as fh:
        fh.write(emit(net) + "\n")
