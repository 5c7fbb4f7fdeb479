"""Simple undirected graphs, half-edge indexing and line graphs.

Half-edges are numbered ``2 * edge + side``; side 0 belongs to the smaller
endpoint of the edge, side 1 to the larger one.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple

import numpy as np


class GraphError(ValueError):
    """Raised for malformed or non-simple graphs."""


class HalfEdgeIndex(NamedTuple):
    edge_index: int
    side: int
    owner_vertex: int

    @property
    def index(self) -> int:
        return 2 * self.edge_index + self.side


@dataclass(frozen=True)
class Graph:
    """Immutable simple graph on vertices ``0..vertex_count-1``.

    Edge order is preserved (it fixes the half-edge numbering); endpoints of
    each edge are stored sorted.
    """

    vertex_count: int
    edges: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = int(self.vertex_count)
        if n < 0:
            raise GraphError("vertex_count must be nonnegative")
        canon = []
        seen = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) out of range for {n} vertices")
            e = (u, v) if u < v else (v, u)
            if e in seen:
                raise GraphError(f"duplicate edge {e}")
            seen.add(e)
            canon.append(e)
        inc: list[list[int]] = [[] for _ in range(n)]
        for i, (u, v) in enumerate(canon):
            inc[u].append(i)
            inc[v].append(i)
        object.__setattr__(self, "vertex_count", n)
        object.__setattr__(self, "edges", tuple(canon))
        object.__setattr__(self, "adjacency", tuple(tuple(a) for a in inc))

    @property
    def n(self) -> int:
        return self.vertex_count

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def degrees(self) -> np.ndarray:
        d = np.array([len(a) for a in self.adjacency], dtype=np.int64)
        d.flags.writeable = False
        return d

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.vertex_count else 0

    def degree(self, k: int) -> int:
        return len(self.adjacency[k])

    def half_edge(self, h: int) -> HalfEdgeIndex:
        e, side = divmod(int(h), 2)
        return HalfEdgeIndex(e, side, self.edges[e][side])

    def half_edges(self) -> list[HalfEdgeIndex]:
        return [self.half_edge(h) for h in range(2 * self.m)]

    def half_edges_at(self, k: int) -> list[int]:
        out = []
        for e in self.adjacency[k]:
            out.append(2 * e + (0 if self.edges[e][0] == k else 1))
        return out

    @cached_property
    def owner(self) -> np.ndarray:
        """Owner vertex of every half-edge, shape ``(2m,)``."""
        own = np.asarray(self.edges, dtype=np.int64).reshape(-1) if self.m else np.zeros(0, np.int64)
        own.flags.writeable = False
        return own

    def line_graph_edge_count(self) -> int:
        d = self.degrees
        return int((d * (d - 1) // 2).sum())

    def is_bipartite(self) -> bool:
        color = [-1] * self.n
        for s in range(self.n):
            if color[s] >= 0:
                continue
            color[s] = 0
            stack = [s]
            while stack:
                u = stack.pop()
                for e in self.adjacency[u]:
                    a, b = self.edges[e]
                    w = b if a == u else a
                    if color[w] < 0:
                        color[w] = 1 - color[u]
                        stack.append(w)
                    elif color[w] == color[u]:
                        return False
        return True


def line_graph(g: Graph) -> Graph:
    """Vertices are edge indices of ``g``; adjacent when the edges meet."""
    pairs = set()
    for inc in g.adjacency:
        for i, e in enumerate(inc):
            for f in inc[i + 1:]:
                pairs.add((min(e, f), max(e, f)))
    return Graph(g.m, tuple(sorted(pairs)))


def hex_torus(L: int) -> Graph:
    """Honeycomb lattice on an L x L torus (brick-wall coordinates).

    Two vertices per unit cell; A(x, y) joins B(x, y), B(x-1, y), B(x, y-1).
    Its line graph is an L x L periodic kagome patch.
    """
    L = int(L)
    if L < 2:
        raise GraphError("hex_torus needs L >= 2; smaller tori have parallel edges")

    def a(x, y):
        return 2 * ((x % L) * L + (y % L))

    edges = []
    for x in range(L):
        for y in range(L):
            edges.append((a(x, y), a(x, y) + 1))
            edges.append((a(x, y), a(x - 1, y) + 1))
            edges.append((a(x, y), a(x, y - 1) + 1))
    return Graph(2 * L * L, tuple(edges))


def path_graph(k: int) -> Graph:
    if k < 1:
        raise GraphError("path needs at least one vertex")
    return Graph(k, tuple((i, i + 1) for i in range(k - 1)))


def cycle_graph(k: int) -> Graph:
    if k < 3:
        raise GraphError("cycle needs at least 3 vertices")
    return Graph(k, tuple((i, (i + 1) % k) for i in range(k)))


def star_graph(d: int) -> Graph:
    """K_{1,d} with the center at vertex 0."""
    if d < 1:
        raise GraphError("star needs at least one leaf")
    return Graph(d + 1, tuple((0, i) for i in range(1, d + 1)))


def complete_graph(k: int) -> Graph:
    if k < 1:
        raise GraphError("complete graph needs at least one vertex")
    return Graph(k, tuple((i, j) for i in range(k) for j in range(i + 1, k)))


_GENERATORS = {
    "path": path_graph,
    "cycle": cycle_graph,
    "star": star_graph,
    "complete": complete_graph,
    "hex": hex_torus,
}


def named_graph(name: str, *params) -> Graph:
    """Build a fixture graph: ``named_graph("cycle", 4)`` or ``named_graph("cycle_4")``."""
    m = re.fullmatch(r"([a-z]+)[_:](\d+)", name.strip())
    if m and not params:
        name, params = m.group(1), (int(m.group(2)),)
    if name not in _GENERATORS:
        raise GraphError(f"unknown graph name {name!r}; known: {sorted(_GENERATORS)}")
    if len(params) != 1:
        raise GraphError(f"{name} takes exactly one size parameter")
    return _GENERATORS[name](int(params[0]))


def random_simple_graph(n: int, m: int, rng: np.random.Generator) -> Graph:
    """Uniformly random simple graph with n vertices and m edges."""
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if m > len(pairs):
        raise GraphError(f"cannot place {m} edges on {n} vertices")
    pick = rng.choice(len(pairs), size=m, replace=False)
    return Graph(n, tuple(pairs[i] for i in sorted(pick)))


def parse_edge_list(text: str) -> Graph:
    """Parse ``u v`` lines with an optional ``p <n> <m>`` header; ``#`` starts a comment."""
    header = None
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            if tok[0] == "p":
                if header is not None or edges or len(tok) != 3:
                    raise GraphError(f"line {lineno}: misplaced or malformed header")
                header = (int(tok[1]), int(tok[2]))
                continue
            if len(tok) != 2:
                raise GraphError(f"line {lineno}: expected 'u v'")
            u, v = int(tok[0]), int(tok[1])
        except ValueError as exc:
            if isinstance(exc, GraphError):
                raise
            raise GraphError(f"line {lineno}: not an integer") from exc
        if u < 0 or v < 0:
            raise GraphError(f"line {lineno}: negative vertex index")
        edges.append((u, v))
    if header is not None:
        n, m = header
        if m != len(edges):
            raise GraphError(f"header declares {m} edges, found {len(edges)}")
    else:
        n = 1 + max((max(e) for e in edges), default=-1)
    g = Graph(n, tuple(edges))
    return Graph(n, tuple(sorted(g.edges)))


def serialize_edge_list(g: Graph) -> str:
    lines = [f"p {g.n} {g.m}"]
    lines += [f"{u} {v}" for u, v in sorted(g.edges)]
    return "\n".join(lines) + "\n"


def graph_from_edges(edges: Iterable, n: int | None = None) -> Graph:
    edges = [tuple(int(x) for x in e) for e in edges]
    if n is None:
        n = 1 + max((max(e) for e in edges), default=-1)
    return Graph(n, tuple(edges))
