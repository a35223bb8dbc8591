"""Combinatorial regular cell complexes of dimension at most 3.

A complex is stored as a graded list of cells; each cell of dimension
p >= 1 records the sequence of (p-1)-cells on its boundary.  The four
adjacency structures (boundary, coboundary, lower, upper) are derived
eagerly at construction time and the object is immutable afterwards,
so complexes can be shared freely between workers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .errors import (
    BadDimension,
    DanglingBoundary,
    NotACycle,
    SelfLoopEdge,
    UnknownCell,
)

MAX_DIM = 3


class CellId(NamedTuple):
    dim: int
    index: int


def _norm_edge(u, v):
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph with optional integer labels."""

    n: int
    edges: tuple
    node_labels: tuple | None = None
    edge_labels: dict | None = None

    def __post_init__(self):
        edges = tuple(sorted(_norm_edge(u, v) for u, v in self.edges))
        for u, v in edges:
            if u == v:
                raise SelfLoopEdge(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise DanglingBoundary(f"edge ({u},{v}) outside vertex range")
        if len(set(edges)) != len(edges):
            raise DanglingBoundary("parallel edges are not allowed in a simple graph")
        object.__setattr__(self, "edges", edges)
        if self.node_labels is not None:
            labels = tuple(self.node_labels)
            if len(labels) != self.n:
                raise DanglingBoundary("node_labels length must equal n")
            object.__setattr__(self, "node_labels", labels)
        if self.edge_labels is not None:
            object.__setattr__(
                self,
                "edge_labels",
                {_norm_edge(u, v): l for (u, v), l in self.edge_labels.items()},
            )

    def adjacency(self):
        """Neighbour sets, one per vertex."""
        adj = [set() for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def degree_sequence(self):
        adj = self.adjacency()
        return tuple(len(a) for a in adj)

    def has_edge(self, u, v):
        return _norm_edge(u, v) in set(self.edges)

    def permuted(self, perm: Sequence[int]) -> "Graph":
        """Relabel vertices; perm[v] is the new name of vertex v."""
        node_labels = None
        if self.node_labels is not None:
            node_labels = [0] * self.n
            for v, l in enumerate(self.node_labels):
                node_labels[perm[v]] = l
            node_labels = tuple(node_labels)
        edge_labels = None
        if self.edge_labels is not None:
            edge_labels = {
                _norm_edge(perm[u], perm[v]): l
                for (u, v), l in self.edge_labels.items()
            }
        return Graph(
            self.n,
            tuple(_norm_edge(perm[u], perm[v]) for u, v in self.edges),
            node_labels,
            edge_labels,
        )


def _check_one_cycle(edge_endpoints):
    """True iff the given (vertex, vertex) multiset of edges is one closed cycle.

    Works on multigraphs: the sphere 2-cells are bounded by two parallel
    edges forming a 2-gon.
    """
    if not edge_endpoints:
        return False
    incidence = {}
    for eidx, (u, v) in enumerate(edge_endpoints):
        incidence.setdefault(u, []).append(eidx)
        incidence.setdefault(v, []).append(eidx)
    if any(len(es) != 2 for es in incidence.values()):
        return False
    if len(incidence) != len(edge_endpoints):
        return False
    # walk the cycle and check connectivity
    seen_edges = set()
    start = min(incidence)
    vertex = start
    edge = incidence[vertex][0]
    while edge not in seen_edges:
        seen_edges.add(edge)
        u, v = edge_endpoints[edge]
        vertex = v if vertex == u else u
        e0, e1 = incidence[vertex]
        edge = e1 if e0 == edge else e0
    return len(seen_edges) == len(edge_endpoints) and vertex == start


class CellComplex:
    """Immutable regular cell complex with cached adjacencies.

    Do not mutate the lists this object exposes; they are shared.
    """

    def __init__(self, cells_by_dim: Sequence[Sequence[Sequence[int]]]):
        cells_by_dim = [list(level) for level in cells_by_dim]
        while cells_by_dim and not cells_by_dim[-1]:
            cells_by_dim.pop()
        if len(cells_by_dim) - 1 > MAX_DIM:
            raise BadDimension(
                f"complex dimension {len(cells_by_dim) - 1} exceeds cap {MAX_DIM}"
            )
        self.dims = [len(level) for level in cells_by_dim]
        if not self.dims:
            self.dims = [0]
            cells_by_dim = [[]]
        self.boundaries = [
            [tuple(b) for b in level] for level in cells_by_dim
        ]
        self._validate()
        self._build_caches()

    # -- construction ---------------------------------------------------

    def _validate(self):
        for b in self.boundaries[0]:
            if b:
                raise DanglingBoundary("0-cells must have empty boundary")
        for p in range(1, len(self.dims)):
            below = self.dims[p - 1]
            for idx, bd in enumerate(self.boundaries[p]):
                for ref in bd:
                    if not (0 <= ref < below):
                        raise DanglingBoundary(
                            f"{p}-cell {idx} references undeclared {p - 1}-cell {ref}"
                        )
                if p == 1:
                    if len(bd) != 2 or bd[0] == bd[1]:
                        raise SelfLoopEdge(
                            f"1-cell {idx} must have 2 distinct endpoints, got {bd}"
                        )
                if len(set(bd)) != len(bd):
                    raise DanglingBoundary(
                        f"{p}-cell {idx} repeats a boundary cell"
                    )
                if p == 2:
                    endpoints = [self.boundaries[1][e] for e in bd]
                    if not _check_one_cycle(endpoints):
                        raise NotACycle(
                            f"2-cell {idx} boundary is not a single closed cycle"
                        )

    def _build_caches(self):
        d = len(self.dims)
        self.coboundary = [
            [[] for _ in range(self.dims[p])] for p in range(d)
        ]
        for p in range(1, d):
            for idx, bd in enumerate(self.boundaries[p]):
                for ref in bd:
                    self.coboundary[p - 1][ref].append(idx)
        for level in self.coboundary:
            for lst in level:
                lst.sort()
        # upper[p][i] and lower[p][i]: sorted (neighbour, witness) pairs,
        # one entry per witness (multiplicity matters)
        self.upper = [[[] for _ in range(self.dims[p])] for p in range(d)]
        for p in range(1, d):
            for delta, bd in enumerate(self.boundaries[p]):
                for sigma in bd:
                    for tau in bd:
                        if tau != sigma:
                            self.upper[p - 1][sigma].append((tau, delta))
        for level in self.upper:
            for lst in level:
                lst.sort()
        # the lower adjacency is quadratic in coboundary degree and only
        # needed by the full-adjacency tests, so it is built on demand
        self._lower = None
        # vertex closure per cell
        self.vertex_sets = [
            [frozenset((i,)) for i in range(self.dims[0])]
        ]
        for p in range(1, d):
            level = []
            for bd in self.boundaries[p]:
                verts = frozenset().union(
                    *(self.vertex_sets[p - 1][ref] for ref in bd)
                ) if bd else frozenset()
                level.append(verts)
            self.vertex_sets.append(level)

    # -- queries ---------------------------------------------------------

    @property
    def lower(self):
        """lower[p][i]: sorted (neighbour, witness) pairs sharing a face."""
        if self._lower is None:
            d = len(self.dims)
            lower = [[[] for _ in range(self.dims[p])] for p in range(d)]
            for p in range(d - 1):
                for delta in range(self.dims[p]):
                    cb = self.coboundary[p][delta]
                    for sigma in cb:
                        for tau in cb:
                            if tau != sigma:
                                lower[p + 1][sigma].append((tau, delta))
            for level in lower:
                for lst in level:
                    lst.sort()
            self._lower = lower
        return self._lower

    @property
    def dim(self) -> int:
        return len(self.dims) - 1

    def size(self, p: int) -> int:
        return self.dims[p] if p <= self.dim else 0

    def num_cells(self) -> int:
        return sum(self.dims)

    def cell_ids(self):
        for p, count in enumerate(self.dims):
            for i in range(count):
                yield CellId(p, i)

    def _check(self, sigma: CellId):
        if not (0 <= sigma.dim <= self.dim and 0 <= sigma.index < self.dims[sigma.dim]):
            raise UnknownCell(f"no cell {tuple(sigma)} in this complex")

    def boundary_of(self, sigma: CellId):
        self._check(sigma)
        if sigma.dim == 0:
            return []
        return [CellId(sigma.dim - 1, i) for i in sorted(self.boundaries[sigma.dim][sigma.index])]

    def coboundary_of(self, sigma: CellId):
        self._check(sigma)
        return [CellId(sigma.dim + 1, i) for i in self.coboundary[sigma.dim][sigma.index]]

    def upper_adjacent(self, sigma: CellId):
        self._check(sigma)
        return [
            (CellId(sigma.dim, tau), CellId(sigma.dim + 1, delta))
            for tau, delta in self.upper[sigma.dim][sigma.index]
        ]

    def lower_adjacent(self, sigma: CellId):
        self._check(sigma)
        return [
            (CellId(sigma.dim, tau), CellId(sigma.dim - 1, delta))
            for tau, delta in self.lower[sigma.dim][sigma.index]
        ]

    # -- derived complexes -------------------------------------------------

    def skeleton(self, k: int) -> "CellComplex":
        if not (0 <= k <= MAX_DIM):
            raise BadDimension(f"skeleton dimension {k} outside [0, {MAX_DIM}]")
        return CellComplex(self.boundaries[: k + 1])

    def permuted(self, perms: Sequence[Sequence[int]]) -> "CellComplex":
        """Relabel cells; perms[p][i] is the new index of p-cell i."""
        perms = list(perms) + [
            list(range(self.dims[p])) for p in range(len(perms), self.dim + 1)
        ]
        new_levels = []
        for p in range(self.dim + 1):
            level = [None] * self.dims[p]
            below = perms[p - 1] if p else None
            for i, bd in enumerate(self.boundaries[p]):
                new_bd = tuple(below[r] for r in bd) if p else ()
                level[perms[p][i]] = new_bd
            new_levels.append(level)
        return CellComplex(new_levels)

    def __eq__(self, other):
        if not isinstance(other, CellComplex):
            return NotImplemented
        if self.dims != other.dims:
            return False
        for p in range(1, self.dim + 1):
            mine = [tuple(sorted(b)) for b in self.boundaries[p]]
            theirs = [tuple(sorted(b)) for b in other.boundaries[p]]
            if mine != theirs:
                return False
        return True

    # -- serialization ------------------------------------------------------

    def to_json(self) -> str:
        return json.dumps(
            {
                "dims": self.dims,
                "boundaries": [
                    [list(b) for b in level] for level in self.boundaries[1:]
                ],
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "CellComplex":
        data = json.loads(text)
        dims = data["dims"]
        levels = [[() for _ in range(dims[0])]]
        levels.extend(data["boundaries"])
        return cls(levels)


def graph_to_complex(g: Graph) -> CellComplex:
    """The 1-dimensional complex of a graph (vertices and edges only)."""
    return CellComplex([[() for _ in range(g.n)], list(g.edges)])


def complex_to_graph(x: CellComplex) -> Graph | None:
    """The 1-skeleton as a simple graph, or None if it is a multigraph."""
    edges = [tuple(sorted(b)) for b in x.boundaries[1]] if x.dim >= 1 else []
    if len(set(edges)) != len(edges):
        return None
    return Graph(x.dims[0], tuple(edges))


def disjoint_union(complexes: Sequence[CellComplex]) -> tuple[CellComplex, list]:
    """Concatenate complexes; returns the union and per-part (dim -> slice) offsets."""
    max_d = max(c.dim for c in complexes)
    levels = [[] for _ in range(max_d + 1)]
    offsets = []
    counts = [0] * (max_d + 1)
    for c in complexes:
        offsets.append(list(counts))
        for p in range(c.dim + 1):
            shift = counts[p - 1] if p else 0
            for bd in c.boundaries[p]:
                levels[p].append(tuple(r + shift for r in bd))
        for p in range(c.dim + 1):
            counts[p] += c.dims[p]
    return CellComplex(levels), offsets
