"""Finite directed graphs, paths, and the reduced incidence matrix."""

from __future__ import annotations

from typing import Iterable, NamedTuple, Sequence

from .errors import SchemaError


class Path(NamedTuple):
    """A finite path.  ``edges == ()`` encodes the vertex ``src``."""

    src: str
    edges: tuple
    rng: str

    def __len__(self) -> int:  # |alpha|
        return len(self.edges)

    @property
    def is_vertex(self) -> bool:
        return not self.edges

    def to_list(self) -> list:
        return list(self.edges) if self.edges else [self.src]

    def __str__(self) -> str:
        return "".join(self.edges) if self.edges else self.src


def concat(p: Path, q: Path) -> Path:
    if p.rng != q.src:
        raise ValueError(f"paths {p} and {q} are not concatenable")
    if not q.edges:
        return p
    if not p.edges:
        return q
    return Path(p.src, p.edges + q.edges, q.rng)


def strip_prefix(p: Path, q: Path):
    """Return ``r`` with ``p == q r``, or None when q is not a prefix of p."""
    n = len(q.edges)
    if n > len(p.edges) or p.src != q.src or p.edges[:n] != q.edges:
        return None
    return Path(q.rng, p.edges[n:], p.rng)


class Graph:
    """A finite directed graph with insertion-ordered vertex and edge ids."""

    def __init__(self, vertices: Sequence[str], edges: Iterable[tuple]):
        self.vertices = tuple(vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise SchemaError("duplicate vertex id")
        vset = set(self.vertices)
        self.src: dict = {}
        self.rng: dict = {}
        order = []
        for e, s, r in edges:
            if e in self.src or e in vset:
                raise SchemaError(f"edge id {e!r} duplicates another id")
            if s not in vset or r not in vset:
                raise SchemaError(f"edge {e!r} has an unknown endpoint")
            self.src[e] = s
            self.rng[e] = r
            order.append(e)
        self.edges = tuple(order)
        self.edge_index = {e: i for i, e in enumerate(self.edges)}
        self.vertex_index = {v: i for i, v in enumerate(self.vertices)}
        self.out_edges = {v: [] for v in self.vertices}
        self.in_edges = {v: [] for v in self.vertices}
        for e in self.edges:
            self.out_edges[self.src[e]].append(e)
            self.in_edges[self.rng[e]].append(e)
        self.out_edges = {v: tuple(es) for v, es in self.out_edges.items()}
        self.in_edges = {v: tuple(es) for v, es in self.in_edges.items()}

    @classmethod
    def from_json(cls, data: dict) -> "Graph":
        try:
            vertices = [str(v) for v in data["vertices"]]
            edges = [(str(e["id"]), str(e["src"]), str(e["rng"])) for e in data["edges"]]
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"malformed graph: {exc}") from exc
        return cls(vertices, edges)

    def to_json(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": [{"id": e, "src": self.src[e], "rng": self.rng[e]} for e in self.edges],
        }

    def is_vertex(self, x) -> bool:
        return x in self.vertex_index

    def is_edge(self, x) -> bool:
        return x in self.edge_index

    # paths

    def vertex_path(self, v: str) -> Path:
        if v not in self.vertex_index:
            raise SchemaError(f"unknown vertex {v!r}")
        return Path(v, (), v)

    def path(self, items: Sequence[str]) -> Path:
        """Build a path from edge ids, or from a single vertex id."""
        items = tuple(items)
        if len(items) == 1 and items[0] in self.vertex_index:
            return self.vertex_path(items[0])
        if not items:
            raise SchemaError("empty edge list; give [vertex] for a length-0 path")
        for e in items:
            if e not in self.edge_index:
                raise SchemaError(f"unknown edge {e!r}")
        for a, b in zip(items, items[1:]):
            if self.rng[a] != self.src[b]:
                raise SchemaError(f"{a}{b} is not a path: r({a}) != s({b})")
        return Path(self.src[items[0]], items, self.rng[items[-1]])

    def edge_path(self, e: str) -> Path:
        return Path(self.src[e], (e,), self.rng[e])

    def extend(self, p: Path, e: str) -> Path:
        if p.rng != self.src[e]:
            raise ValueError(f"cannot extend {p} by {e}")
        return Path(p.src, p.edges + (e,), self.rng[e])

    def path_key(self, p: Path) -> tuple:
        return (tuple(self.edge_index[e] for e in p.edges), self.vertex_index[p.src])

    # vertex classes

    def sinks(self) -> list:
        return [v for v in self.vertices if not self.out_edges[v]]

    def regular_vertices(self) -> list:
        # every vertex of a finite graph emits finitely many edges
        return [v for v in self.vertices if self.out_edges[v]]

    def adjacency(self) -> list:
        n = len(self.vertices)
        m = [[0] * n for _ in range(n)]
        for e in self.edges:
            m[self.vertex_index[self.src[e]]][self.vertex_index[self.rng[e]]] += 1
        return m


def regular_vertices(g: Graph) -> list:
    return g.regular_vertices()


def paths_up_to(g: Graph, n: int, source: str | None = None, range_: str | None = None) -> list:
    """All paths of length <= n with the optional source/range filter.

    Ordered lexicographically by edge-index sequence; length-0 paths come
    first in vertex order.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    out = []
    frontier = [g.vertex_path(v) for v in g.vertices if source is None or v == source]
    for _ in range(n + 1):
        out.extend(frontier)
        nxt = []
        for p in frontier:
            for e in g.out_edges[p.rng]:
                nxt.append(g.extend(p, e))
        frontier = nxt
    if range_ is not None:
        out = [p for p in out if p.rng == range_]
    out.sort(key=g.path_key)
    return out


def reduced_incidence(g: Graph):
    """Return ``(rows, cols, A)`` with ``A[v][w] = |v E^1 w|`` for regular v."""
    rows = g.regular_vertices()
    cols = list(g.vertices)
    ci = {w: j for j, w in enumerate(cols)}
    a = [[0] * len(cols) for _ in rows]
    for i, v in enumerate(rows):
        for e in g.out_edges[v]:
            a[i][ci[g.rng[e]]] += 1
    return rows, cols, a
