"""Graph-to-complex lifting maps based on cliques and cycles.

Substructures of size at most k are attached as higher cells:
cycles (simple or chordless) become 2-cells glued along their edges,
cliques become simplices (triangles as 2-cells, 4-cliques as 3-cells
when the lifting allows dimension 3).
"""

from __future__ import annotations

from dataclasses import dataclass

from .cells import CellComplex, Graph, complex_to_graph
from .errors import BadDimension

KINDS = ("CL", "IC", "C")


@dataclass(frozen=True)
class LiftingSpec:
    """Which substructures to attach, e.g. LiftingSpec.parse("IC:6,CL:3")."""

    parts: tuple  # tuple of (kind, k)
    max_dim: int = 2

    def __post_init__(self):
        if not self.parts:
            raise ValueError("lifting spec needs at least one part")
        for kind, k in self.parts:
            if kind not in KINDS:
                raise ValueError(f"unknown lifting kind {kind!r}")
            if k < 3:
                raise ValueError(f"substructure size must be >= 3, got {k}")
        if not (1 <= self.max_dim <= 3):
            raise BadDimension(f"max_dim must be in [1, 3], got {self.max_dim}")
        object.__setattr__(self, "parts", tuple(sorted(set(self.parts))))

    @classmethod
    def parse(cls, text: str, max_dim: int = 2) -> "LiftingSpec":
        parts = []
        for chunk in text.split(","):
            kind, _, num = chunk.strip().partition(":")
            parts.append((kind.upper(), int(num)))
        return cls(tuple(parts), max_dim)

    def __str__(self):
        return ",".join(f"{kind}:{k}" for kind, k in self.parts)


def ic(k: int, max_dim: int = 2) -> LiftingSpec:
    return LiftingSpec((("IC", k),), max_dim)


def cl(k: int, max_dim: int = 2) -> LiftingSpec:
    return LiftingSpec((("CL", k),), max_dim)


def cyc(k: int, max_dim: int = 2) -> LiftingSpec:
    return LiftingSpec((("C", k),), max_dim)


def list_cliques(g: Graph, k: int):
    """All cliques of size 3..k, as sorted vertex tuples."""
    if k < 3:
        raise ValueError("k must be >= 3")
    adj = g.adjacency()
    out = []

    def grow(clique, candidates):
        for v in sorted(candidates):
            cur = clique + (v,)
            if len(cur) >= 3:
                out.append(cur)
            if len(cur) < k:
                grow(cur, candidates & adj[v] & set(range(v + 1, g.n)))

    for v in range(g.n):
        grow((v,), adj[v] & set(range(v + 1, g.n)))
    return out


def list_simple_cycles(g: Graph, k: int):
    """All simple cycles of length 3..k, canonicalized.

    Each cycle is reported once as the vertex sequence rooted at its
    smallest vertex, walking toward the smaller of the root's two cycle
    neighbours.
    """
    if k < 3:
        raise ValueError("k must be >= 3")
    adj = [sorted(a) for a in g.adjacency()]
    cycles = []
    path = []
    on_path = [False] * g.n

    def extend(root, vertex):
        for nxt in adj[vertex]:
            if nxt == root:
                if len(path) >= 3 and path[1] < path[-1]:
                    cycles.append(tuple(path))
            elif nxt > root and not on_path[nxt] and len(path) < k:
                path.append(nxt)
                on_path[nxt] = True
                extend(root, nxt)
                on_path[nxt] = False
                path.pop()

    for root in range(g.n):
        path[:] = [root]
        extend(root, root)
    return cycles


def _is_chordless(cycle, adj):
    m = len(cycle)
    for i in range(m):
        for j in range(i + 2, m):
            if i == 0 and j == m - 1:
                continue
            if cycle[j] in adj[cycle[i]]:
                return False
    return True


def list_induced_cycles(g: Graph, k: int):
    """Chordless cycles of length 3..k, canonicalized as in list_simple_cycles."""
    adj = g.adjacency()
    return [c for c in list_simple_cycles(g, k) if _is_chordless(c, adj)]


def cycle_census(g: Graph, max_k: int, induced: bool):
    """Per-length counts {3: n3, ..., max_k: nk}."""
    cycles = list_induced_cycles(g, max_k) if induced else list_simple_cycles(g, max_k)
    counts = {size: 0 for size in range(3, max_k + 1)}
    for c in cycles:
        counts[len(c)] += 1
    return counts


def lift(g: Graph, spec: LiftingSpec) -> CellComplex:
    """Attach cells to the union of the spec's substructures.

    0-cells are the vertices and 1-cells the edges of g, in sorted order.
    Substructures matched by several parts of a union spec collapse to a
    single cell (dedup key: the set of boundary cells one level down).
    Provenance is recorded on the returned complex as
    ``provenance[dim][index] -> list of (kind, vertex tuple)``.
    """
    edge_index = {e: i for i, e in enumerate(g.edges)}

    def edge(u, v):
        return edge_index[(u, v) if u < v else (v, u)]

    two_cells = {}   # frozenset of edge ids -> (boundary tuple, provenance list)
    tri_by_verts = {}  # sorted vertex triple -> 2-cell key (for 3-cell boundaries)
    four_cliques = []

    def add_two_cell(boundary, prov):
        key = frozenset(boundary)
        if key in two_cells:
            two_cells[key][1].append(prov)
        else:
            two_cells[key] = (tuple(boundary), [prov])
        return key

    for kind, k in spec.parts:
        if kind == "CL":
            for clique in list_cliques(g, k):
                if len(clique) == 3:
                    a, b, c = clique
                    key = add_two_cell(
                        (edge(a, b), edge(b, c), edge(a, c)), ("CL", clique)
                    )
                    tri_by_verts[clique] = key
                elif len(clique) == 4 and spec.max_dim >= 3:
                    four_cliques.append(clique)
                # cliques larger than the dimension cap allows are skipped
        else:
            cycles = (
                list_induced_cycles(g, k) if kind == "IC" else list_simple_cycles(g, k)
            )
            for cyc_verts in cycles:
                boundary = tuple(
                    edge(cyc_verts[i], cyc_verts[(i + 1) % len(cyc_verts)])
                    for i in range(len(cyc_verts))
                )
                key = add_two_cell(boundary, (kind, cyc_verts))
                if len(cyc_verts) == 3:
                    tri_by_verts.setdefault(tuple(sorted(cyc_verts)), key)

    two_keys = sorted(two_cells, key=lambda key: tuple(sorted(key)))
    two_index = {key: i for i, key in enumerate(two_keys)}

    three_cells = {}
    for clique in four_cliques:
        a, b, c, d = clique
        faces = [(b, c, d), (a, c, d), (a, b, d), (a, b, c)]
        boundary = tuple(two_index[tri_by_verts[f]] for f in faces)
        key = frozenset(boundary)
        if key in three_cells:
            three_cells[key][1].append(("CL", clique))
        else:
            three_cells[key] = (boundary, [("CL", clique)])
    three_keys = sorted(three_cells, key=lambda key: tuple(sorted(key)))

    levels = [[() for _ in range(g.n)], list(g.edges)]
    if spec.max_dim >= 2:
        levels.append([two_cells[key][0] for key in two_keys])
    if spec.max_dim >= 3 and three_keys:
        levels.append([three_cells[key][0] for key in three_keys])

    x = CellComplex(levels)
    prov = [
        [("V", (i,)) for i in range(g.n)],
        [("E", e) for e in g.edges],
    ]
    if spec.max_dim >= 2:
        prov.append([two_cells[key][1] for key in two_keys])
    if spec.max_dim >= 3 and three_keys:
        prov.append([three_cells[key][1] for key in three_keys])
    x.provenance = prov
    return x


def clique_complex(g: Graph, k: int) -> CellComplex:
    """The clique-complex lifting capped at dimension 3."""
    return lift(g, LiftingSpec((("CL", k),), max_dim=3))


def check_skeleton_preserving(g: Graph, x: CellComplex) -> bool:
    """True iff the 1-skeleton of x is g under the identity vertex map."""
    back = complex_to_graph(x.skeleton(1))
    return back is not None and back.n == g.n and back.edges == g.edges
