"""Named graphs and complexes used by the CLI, the tests and the docs."""

from __future__ import annotations

from .cells import CellComplex, Graph


def rook44() -> Graph:
    """The 4x4 rook's graph: cells of a 4x4 board, adjacent iff they
    share a row or a column.  Strongly regular with parameters
    (16, 6, 2, 2)."""
    edges = []
    for a in range(16):
        for b in range(a + 1, 16):
            if a // 4 == b // 4 or a % 4 == b % 4:
                edges.append((a, b))
    return Graph(16, tuple(edges))


def shrikhande() -> Graph:
    """The Shrikhande graph: Cayley graph of Z4 x Z4 with connection set
    {(+-1, 0), (0, +-1), (1, 1), (-1, -1)}.  Shares the strongly regular
    parameters (16, 6, 2, 2) with the 4x4 rook's graph without being
    isomorphic to it."""
    conn = {(1, 0), (3, 0), (0, 1), (0, 3), (1, 1), (3, 3)}
    edges = set()
    for x in range(4):
        for y in range(4):
            for dx, dy in conn:
                u = 4 * x + y
                v = 4 * ((x + dx) % 4) + ((y + dy) % 4)
                edges.add((u, v) if u < v else (v, u))
    return Graph(16, tuple(sorted(edges)))


def decalin() -> Graph:
    """Carbon skeleton of decalin: two hexagons sharing one edge."""
    ring1 = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)]
    ring2 = [(5, 6), (6, 7), (7, 8), (8, 9), (0, 9)]
    return Graph(10, tuple(ring1 + ring2))


def bicyclopentyl() -> Graph:
    """Carbon skeleton of bicyclopentyl: two pentagons joined by a
    bridge edge.  Has the same degree sequence as decalin and the same
    WL colour histogram, but different cycle structure."""
    ring1 = [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]
    ring2 = [(5, 6), (6, 7), (7, 8), (8, 9), (5, 9)]
    return Graph(10, tuple(ring1 + ring2 + [(0, 5)]))


def hexagon() -> Graph:
    return cycle_graph(6)


def cycle_graph(n: int) -> Graph:
    return Graph(n, tuple((i, (i + 1) % n) for i in range(n)))


def two_triangles() -> Graph:
    """Two disjoint triangles: same size as the hexagon, not WL-equivalent
    to it at the cycle census level."""
    return Graph(6, ((0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)))


def sphere_complex() -> CellComplex:
    """A 2-sphere: two vertices, two parallel edges, two hemispheres.

    The two 2-cells are glued along the same pair of edges, so every
    boundary/coboundary relation here holds with multiplicity two."""
    return CellComplex(
        [
            [(), ()],
            [(0, 1), (0, 1)],
            [(0, 1), (0, 1)],
        ]
    )


def hexagon_with_disk() -> CellComplex:
    """A hexagon boundary with one 2-cell filling it."""
    edges = [(i, (i + 1) % 6) for i in range(6)]
    return CellComplex([[() for _ in range(6)], edges, [tuple(range(6))]])


GRAPH_FIXTURES = {
    "rook44": rook44,
    "shrikhande": shrikhande,
    "decalin": decalin,
    "bicyclopentyl": bicyclopentyl,
    "hexagon": hexagon,
    "two_triangles": two_triangles,
}

COMPLEX_FIXTURES = {
    "sphere": sphere_complex,
    "hexagon_disk": hexagon_with_disk,
}


def get_graph(name: str) -> Graph:
    try:
        return GRAPH_FIXTURES[name]()
    except KeyError:
        raise KeyError(
            f"unknown graph fixture {name!r}; available: {sorted(GRAPH_FIXTURES)}"
        ) from None


def get_complex(name: str) -> CellComplex:
    try:
        return COMPLEX_FIXTURES[name]()
    except KeyError:
        raise KeyError(
            f"unknown complex fixture {name!r}; available: {sorted(COMPLEX_FIXTURES)}"
        ) from None
