"""Boundary matrices, Hodge Laplacians and polynomial cochain filters.

Signs follow one fixed admissible convention: edges point from their low
vertex to their high vertex; a 2-cell is oriented by walking its boundary
cycle from its least vertex toward the lesser neighbour; 3-cells (which
only arise from 4-cliques) carry the simplicial alternating signs.  Any
convention satisfying the composite-zero law would do; tests assert the
law, not the sign pattern.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cells import CellComplex
from .errors import BadDimension, CellnetError, ShapeMismatch


@dataclass(frozen=True)
class BoundaryMatrix:
    k: int
    signed: bool
    matrix: np.ndarray  # (S_{k-1}, S_k), integer entries

    @property
    def rows(self):
        return self.matrix.shape[0]

    @property
    def cols(self):
        return self.matrix.shape[1]

    def triplets(self):
        out = []
        for i, j in zip(*np.nonzero(self.matrix)):
            out.append([int(i), int(j), int(self.matrix[i, j])])
        return out


@dataclass(frozen=True)
class Laplacian:
    p: int
    matrix: np.ndarray
    provenance: tuple  # names of the boundary matrices used


def _edge_signs(x: CellComplex, two_cell: int):
    """Traverse the boundary cycle of a 2-cell; sign per boundary edge."""
    edge_ids = x.boundaries[2][two_cell]
    endpoints = {e: tuple(x.boundaries[1][e]) for e in edge_ids}
    incident = {}
    for e in edge_ids:
        for v in endpoints[e]:
            incident.setdefault(v, []).append(e)
    start = min(incident)

    def other(e, v):
        u, w = endpoints[e]
        return w if v == u else u

    # step toward the lesser neighbour; parallel edges tie-break by edge id
    first = min(incident[start], key=lambda e: (other(e, start), e))
    signs = {}
    vertex, edge = start, first
    while edge not in signs:
        nxt = other(edge, vertex)
        signs[edge] = 1 if vertex == min(endpoints[edge]) else -1
        vertex = nxt
        e0, e1 = incident[vertex]
        edge = e1 if e0 == edge else e0
    return signs


def boundary_matrix(x: CellComplex, k: int, signed: bool = False) -> BoundaryMatrix:
    if not (1 <= k <= x.dim):
        raise BadDimension(f"boundary matrix needs 1 <= k <= dim, got k={k}")
    mat = np.zeros((x.dims[k - 1], x.dims[k]), dtype=np.int64)
    if not signed:
        for j, bd in enumerate(x.boundaries[k]):
            for i in bd:
                mat[i, j] = 1
        return BoundaryMatrix(k, False, mat)
    if k == 1:
        for j, (u, v) in enumerate(x.boundaries[1]):
            lo, hi = (u, v) if u < v else (v, u)
            mat[lo, j] = -1
            mat[hi, j] = 1
    elif k == 2:
        for j in range(x.dims[2]):
            for e, s in _edge_signs(x, j).items():
                mat[e, j] = s
    else:
        for j, bd in enumerate(x.boundaries[3]):
            cell_verts = sorted(x.vertex_sets[3][j])
            if len(cell_verts) != 4:
                raise CellnetError(
                    "signed 3-cell boundaries are only defined for 4-clique cells"
                )
            for t in bd:
                tri = x.vertex_sets[2][t]
                if len(tri) != 3:
                    raise CellnetError("3-cell face is not a triangle")
                (dropped,) = set(cell_verts) - tri
                mat[t, j] = (-1) ** cell_verts.index(dropped)
    return BoundaryMatrix(k, True, mat)


def hodge_laplacian(x: CellComplex, p: int) -> Laplacian:
    """L_p = B_p^T B_p + B_{p+1} B_{p+1}^T with missing matrices as zero."""
    if not (0 <= p <= x.dim):
        raise BadDimension(f"laplacian dimension {p} outside [0, {x.dim}]")
    size = x.dims[p]
    mat = np.zeros((size, size), dtype=np.float64)
    prov = []
    if p >= 1:
        b = boundary_matrix(x, p, signed=True).matrix.astype(np.float64)
        mat += b.T @ b
        prov.append(f"B_{p}")
    if p + 1 <= x.dim and x.dims[p + 1] > 0:
        b = boundary_matrix(x, p + 1, signed=True).matrix.astype(np.float64)
        mat += b @ b.T
        prov.append(f"B_{p + 1}")
    return Laplacian(p, mat, tuple(prov))


_NONLINEARITIES = {
    "identity": lambda z: z,
    "relu": lambda z: np.maximum(z, 0.0),
    "elu": lambda z: np.where(z > 0, z, np.expm1(z)),
}


def poly_conv(x: CellComplex, p: int, h: np.ndarray, weights, nonlinearity="identity"):
    """Polynomial filter sum_r L_p^r H W_r followed by a pointwise map."""
    h = np.asarray(h, dtype=np.float64)
    if h.shape[0] != x.dims[p]:
        raise ShapeMismatch(
            f"feature rows {h.shape[0]} != number of {p}-cells {x.dims[p]}"
        )
    weights = [np.asarray(w, dtype=np.float64) for w in weights]
    for w in weights:
        if w.shape[0] != h.shape[1]:
            raise ShapeMismatch("every W_r must have input width equal to H's width")
    if nonlinearity not in _NONLINEARITIES:
        raise ValueError(f"unknown nonlinearity {nonlinearity!r}")
    lap = hodge_laplacian(x, p).matrix
    acc = h @ weights[0]
    cur = h
    for w in weights[1:]:
        cur = lap @ cur
        acc = acc + cur @ w
    return _NONLINEARITIES[nonlinearity](acc)
