"""Cell complex liftings of graphs, cellular WL refinement, Hodge
Laplacians and CW message-passing networks."""

__version__ = "0.1.0"

from .cells import CellComplex, CellId, Graph, disjoint_union, graph_to_complex
from .lifting import LiftingSpec, clique_complex, cycle_census, lift
from .refinement import (
    AdjacencySet,
    FULL_ADJ,
    SPARSE_ADJ,
    Verdict,
    cwl_refine,
    distinguish,
    three_wl_refine,
    wl_refine,
)
from .spectral import boundary_matrix, hodge_laplacian, poly_conv

__all__ = [
    "AdjacencySet",
    "CellComplex",
    "CellId",
    "FULL_ADJ",
    "Graph",
    "LiftingSpec",
    "SPARSE_ADJ",
    "Verdict",
    "boundary_matrix",
    "clique_complex",
    "cwl_refine",
    "cycle_census",
    "disjoint_union",
    "distinguish",
    "graph_to_complex",
    "hodge_laplacian",
    "lift",
    "poly_conv",
    "three_wl_refine",
    "wl_refine",
]
