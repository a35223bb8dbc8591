from collections import Counter

import numpy as np
import pytest

from cellnet.cells import CellId, Graph
from cellnet.errors import TooLarge
from cellnet.fixtures import (
    bicyclopentyl,
    decalin,
    hexagon,
    rook44,
    shrikhande,
    sphere_complex,
    two_triangles,
)
from cellnet.lifting import LiftingSpec, cl, ic, lift
from cellnet.refinement import (
    FULL_ADJ,
    SPARSE_ADJ,
    AdjacencySet,
    Verdict,
    cwl_refine,
    distinguish,
    distinguish_3wl,
    distinguish_cwl_complexes,
    distinguish_wl,
    three_wl_refine,
    wl_refine,
)


def random_graph(n, p, seed):
    rng = np.random.default_rng(seed)
    edges = [
        (u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p
    ]
    return Graph(n, tuple(edges))


def test_adjacency_set_parse():
    assert AdjacencySet.parse("all") == FULL_ADJ
    assert AdjacencySet.parse("b,up") == SPARSE_ADJ
    with pytest.raises(ValueError):
        AdjacencySet(False, False, False, False)


def test_wl_path_partition():
    # path on 4 vertices: ends and middles form the two stable classes
    g = Graph(4, ((0, 1), (1, 2), (2, 3)))
    part = wl_refine(g)
    stable = part.stable
    assert stable[0] == stable[3]
    assert stable[1] == stable[2]
    assert stable[0] != stable[1]


def test_wl_respects_labels():
    g = Graph(2, ((0, 1),), node_labels=(0, 1))
    assert len(set(wl_refine(g).stable.values())) == 2


def test_wl_blind_to_regular_pairs():
    assert distinguish_wl(hexagon(), two_triangles()) is Verdict.INCONCLUSIVE
    assert distinguish_wl(decalin(), bicyclopentyl()) is Verdict.INCONCLUSIVE
    # but separates a path from a star
    assert (
        distinguish_wl(
            Graph(4, ((0, 1), (1, 2), (2, 3))),
            Graph(4, ((0, 1), (0, 2), (0, 3))),
        )
        is Verdict.DISTINGUISHED
    )


def test_cwl_sphere_symmetry():
    # every cell of a given dimension is symmetric to its peer
    part = cwl_refine(sphere_complex(), FULL_ADJ)
    stable = part.stable
    for p in range(3):
        assert stable[CellId(p, 0)] == stable[CellId(p, 1)]
    assert len(set(stable.values())) == 3


def test_cwl_hexagon_pair():
    x1 = lift(hexagon(), ic(6))
    x2 = lift(two_triangles(), ic(6))
    assert distinguish_cwl_complexes(x1, x2, SPARSE_ADJ) is Verdict.DISTINGUISHED


def test_cwl_isomorphic_copies_merge():
    g = decalin()
    perm = list(np.random.default_rng(0).permutation(g.n))
    v = distinguish(g, g.permuted(perm), "cwl", spec=ic(6))
    assert v is Verdict.INCONCLUSIVE


def test_3wl_separates_cycle_structure():
    # triples see cycles, so 3-WL splits the hexagon / two-triangles pair WL misses
    assert distinguish_3wl(hexagon(), two_triangles()) is Verdict.DISTINGUISHED


def test_3wl_blind_to_sr_pair():
    assert distinguish_3wl(rook44(), shrikhande()) is Verdict.INCONCLUSIVE


def test_3wl_cap():
    with pytest.raises(TooLarge):
        three_wl_refine(random_graph(70, 0.1, 0), cap=64)


def test_3wl_isomorphism_invariance():
    g = random_graph(8, 0.4, 3)
    perm = list(np.random.default_rng(1).permutation(g.n))
    h = g.permuted(perm)
    hist_g = Counter(three_wl_refine(g).stable_histogram.values())
    hist_h = Counter(three_wl_refine(h).stable_histogram.values())
    assert hist_g == hist_h
    assert distinguish_3wl(g, h) is Verdict.INCONCLUSIVE


def test_swl_vs_cwl_on_molecule_pair():
    d, b = decalin(), bicyclopentyl()
    assert distinguish(d, b, "swl", k=3) is Verdict.INCONCLUSIVE
    spec = LiftingSpec.parse("CL:3,IC:6")
    assert distinguish(d, b, "cwl", spec=spec) is Verdict.DISTINGUISHED


def test_sparse_matches_full_on_random_pairs():
    # stable distinguishability with {B, up} equals all four adjacencies
    rng = np.random.default_rng(7)
    for trial in range(25):
        n = int(rng.integers(5, 11))
        g1 = random_graph(n, 0.4, 100 + trial)
        g2 = random_graph(n, 0.4, 200 + trial)
        x1, x2 = lift(g1, ic(6)), lift(g2, ic(6))
        sparse = distinguish_cwl_complexes(x1, x2, SPARSE_ADJ)
        full = distinguish_cwl_complexes(x1, x2, FULL_ADJ)
        assert sparse is full


def test_wl_upper_bound_by_cwl():
    # any WL-distinguished pair is CWL-distinguished under a skeleton lifting
    g1 = Graph(4, ((0, 1), (1, 2), (2, 3)))
    g2 = Graph(4, ((0, 1), (0, 2), (0, 3)))
    assert distinguish(g1, g2, "cwl", spec=ic(6)) is Verdict.DISTINGUISHED


def test_distinguish_dispatcher_rejects_unknown():
    with pytest.raises(ValueError):
        distinguish(hexagon(), hexagon(), "5wl")
