"""Oriented multigraphs with an edge-reversal involution.

Every arc ``e`` declared by the user becomes two oriented edges, ``e`` and
``-e``, created together.  The terminal vertex of an edge is the origin of its
reverse.  Loops and parallel arcs are allowed.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .errors import ConcatMismatch, EnumerationCapExceeded, GraphInvalid

DEFAULT_PATH_CAP = 10**6


def reverse_id(edge: str) -> str:
    """Identifier of the reversed edge (``e`` <-> ``-e``)."""
    return edge[1:] if edge.startswith("-") else "-" + edge


@dataclass(frozen=True)
class Path:
    """A nonempty sequence of concatenated oriented edges."""

    graph: "OrientedGraph" = field(repr=False, compare=False)
    edges: tuple[str, ...]

    def __post_init__(self):
        if not self.edges:
            raise GraphInvalid("a path needs at least one edge")
        g = self.graph
        for e in self.edges:
            if e not in g.origin:
                raise GraphInvalid(f"unknown edge {e!r}")
        for a, b in zip(self.edges, self.edges[1:]):
            if g.terminal(a) != g.origin[b]:
                raise ConcatMismatch(f"t({a}) != o({b})")

    def __len__(self):
        return len(self.edges)

    def __iter__(self) -> Iterator[str]:
        return iter(self.edges)

    @property
    def origin(self) -> str:
        return self.graph.origin[self.edges[0]]

    @property
    def terminal(self) -> str:
        return self.graph.terminal(self.edges[-1])

    @property
    def is_cycle(self) -> bool:
        return self.origin == self.terminal

    @property
    def is_simple(self) -> bool:
        # terminal vertices pairwise distinct; the origin may repeat one of them
        ts = [self.graph.terminal(e) for e in self.edges]
        return len(set(ts)) == len(ts)

    @property
    def is_circuit(self) -> bool:
        return self.is_cycle and self.is_simple

    def reversed(self) -> "Path":
        return Path(self.graph, tuple(reverse_id(e) for e in reversed(self.edges)))

    def rotation(self, j: int) -> "Path":
        """The cycle read from its ``j``-th edge onwards (0-based)."""
        if not self.is_cycle:
            raise GraphInvalid("only cycles can be rotated")
        j %= len(self.edges)
        return Path(self.graph, self.edges[j:] + self.edges[:j])

    def sub(self, start: int, stop: int) -> "Path":
        return Path(self.graph, self.edges[start:stop])

    def __str__(self):
        return "(" + ",".join(self.edges) + ")"


class OrientedGraph:
    """Finite connected graph with a fixed-point-free edge involution.

    Parameters
    ----------
    vertices : iterable of str
    arcs : iterable of ``(edge_id, from_vertex, to_vertex)``
        One entry per arc in its canonical orientation; the reverse edge
        ``-edge_id`` is synthesized.
    """

    def __init__(self, vertices: Iterable[str], arcs: Iterable[tuple[str, str, str]]):
        self.vertices: tuple[str, ...] = tuple(vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise GraphInvalid("duplicate vertex id")
        vset = set(self.vertices)
        self.origin: dict[str, str] = {}
        self.canonical: tuple[str, ...]
        canon = []
        for eid, a, b in arcs:
            if not eid or eid.startswith("-"):
                raise GraphInvalid(f"arc id {eid!r} must be nonempty and not start with '-'")
            for v in (a, b):
                if v not in vset:
                    raise GraphInvalid(f"arc {eid!r} references unknown vertex {v!r}")
            if eid in self.origin:
                raise GraphInvalid(f"duplicate arc id {eid!r}")
            self.origin[eid] = a
            self.origin[reverse_id(eid)] = b
            canon.append(eid)
        self.canonical = tuple(canon)
        self.edges: tuple[str, ...] = tuple(sorted(self.origin))
        self._in: dict[str, list[str]] = {v: [] for v in self.vertices}
        self._out: dict[str, list[str]] = {v: [] for v in self.vertices}
        for e in self.edges:
            self._out[self.origin[e]].append(e)
            self._in[self.terminal(e)].append(e)
        self._validate()

    def _validate(self):
        if not self.vertices:
            raise GraphInvalid("graph has no vertices")
        for v in self.vertices:
            if not self._in[v]:
                raise GraphInvalid(f"vertex {v!r} belongs to no arc")
        seen = {self.vertices[0]}
        todo = deque(seen)
        while todo:
            v = todo.popleft()
            for e in self._out[v]:
                w = self.terminal(e)
                if w not in seen:
                    seen.add(w)
                    todo.append(w)
        if len(seen) != len(self.vertices):
            raise GraphInvalid("graph is not connected")

    @staticmethod
    def reverse(edge: str) -> str:
        return reverse_id(edge)

    def terminal(self, edge: str) -> str:
        return self.origin[reverse_id(edge)]

    def in_star(self, x: str) -> tuple[str, ...]:
        """Edges with terminal vertex ``x``."""
        return tuple(self._in[x])

    def out_star(self, x: str) -> tuple[str, ...]:
        return tuple(self._out[x])

    def path(self, edges: Sequence[str] | str) -> Path:
        if isinstance(edges, str):
            edges = [s.strip() for s in edges.split(",") if s.strip()]
        return Path(self, tuple(edges))

    def concat(self, p: Path, q: Path) -> Path:
        if p.terminal != q.origin:
            raise ConcatMismatch(f"terminal {p.terminal!r} of {p} != origin {q.origin!r} of {q}")
        return Path(self, p.edges + q.edges)

    def __repr__(self):
        return f"OrientedGraph({len(self.vertices)} vertices, {len(self.canonical)} arcs)"


def enumerate_simple_paths(g: OrientedGraph, target: str, cap: int = DEFAULT_PATH_CAP) -> list[Path]:
    """All simple paths whose terminal vertex is ``target``.

    Paths are grown backwards from ``target``; prepending an edge adds its
    terminal (the current origin) to the set of used terminal vertices.
    """
    out: list[tuple[str, ...]] = []

    def grow(edges: tuple[str, ...], used: frozenset):
        out.append(edges)
        if len(out) > cap:
            raise EnumerationCapExceeded(f"more than {cap} simple paths end at {target!r}")
        head = g.origin[edges[0]]
        if head in used:
            return
        used = used | {head}
        for e in g.in_star(head):
            grow((e,) + edges, used)

    for e in g.in_star(target):
        grow((e,), frozenset([target]))
    return [Path(g, p) for p in sorted(out)]


def enumerate_circuits(g: OrientedGraph, base: str, cap: int = DEFAULT_PATH_CAP) -> list[Path]:
    """Simple cycles based at ``base``, in lexicographic order of edge ids."""
    return [p for p in enumerate_simple_paths(g, base, cap) if p.origin == base]


def simple_paths_between(g: OrientedGraph, source: str, target: str,
                         cap: int = DEFAULT_PATH_CAP) -> list[Path]:
    return [p for p in enumerate_simple_paths(g, target, cap) if p.origin == source]
