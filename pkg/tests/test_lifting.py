import itertools

import numpy as np
import pytest

from cellnet.cells import Graph
from cellnet.fixtures import (
    bicyclopentyl,
    decalin,
    hexagon,
    rook44,
    shrikhande,
    two_triangles,
)
from cellnet.lifting import (
    LiftingSpec,
    check_skeleton_preserving,
    cl,
    clique_complex,
    cycle_census,
    ic,
    lift,
    list_cliques,
    list_induced_cycles,
    list_simple_cycles,
)


def random_graph(n, p, seed):
    rng = np.random.default_rng(seed)
    edges = [
        (u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p
    ]
    return Graph(n, tuple(edges))


# -- brute-force oracles -----------------------------------------------------


def oracle_cliques(g, k):
    adj = g.adjacency()
    out = []
    for size in range(3, k + 1):
        for combo in itertools.combinations(range(g.n), size):
            if all(b in adj[a] for a, b in itertools.combinations(combo, 2)):
                out.append(combo)
    return out


def canon(cycle):
    size = len(cycle)
    return min(
        tuple(seq[(i + d) % size] for i in range(size))
        for seq in (tuple(cycle), tuple(cycle[::-1]))
        for d in range(size)
    )


def oracle_cycles(g, k, induced):
    """Enumerate edge subsets that form one closed cycle of length <= k."""
    adj = g.adjacency()
    found = set()
    for size in range(3, k + 1):
        for combo in itertools.combinations(range(g.n), size):
            sub = {v: [u for u in adj[v] if u in combo] for v in combo}
            if any(len(nb) != 2 for nb in sub.values()):
                if induced:
                    continue
                # a simple cycle through these vertices may still exist
                for perm in itertools.permutations(combo[1:]):
                    seq = (combo[0],) + perm
                    if all(
                        seq[(i + 1) % size] in adj[seq[i]] for i in range(size)
                    ):
                        found.add(canon(seq))
                continue
            # 2-regular induced subgraph: check it is one cycle, not several
            seen = {combo[0]}
            prev, cur = None, combo[0]
            while True:
                nxt = [u for u in sub[cur] if u != prev]
                prev, cur = cur, nxt[0]
                if cur == combo[0]:
                    break
                seen.add(cur)
            if len(seen) == size:
                seq = []
                prev, cur = None, combo[0]
                while len(seq) < size:
                    seq.append(cur)
                    nxt = [u for u in sub[cur] if u != prev]
                    prev, cur = cur, nxt[0]
                found.add(canon(seq))
    return found


@pytest.mark.parametrize("seed", range(6))
def test_cliques_match_bruteforce(seed):
    g = random_graph(9, 0.45, seed)
    assert sorted(list_cliques(g, 5)) == sorted(oracle_cliques(g, 5))


@pytest.mark.parametrize("seed", range(6))
def test_simple_cycles_match_bruteforce(seed):
    g = random_graph(8, 0.35, seed)
    mine = {canon(c) for c in list_simple_cycles(g, 8)}
    assert mine == oracle_cycles(g, 8, induced=False)
    assert len(mine) == len(list_simple_cycles(g, 8))  # no duplicates


@pytest.mark.parametrize("seed", range(6))
def test_induced_cycles_match_bruteforce(seed):
    g = random_graph(9, 0.35, seed)
    mine = {canon(c) for c in list_induced_cycles(g, 9)}
    assert mine == oracle_cycles(g, 9, induced=True)


def test_published_cycle_censuses():
    assert cycle_census(rook44(), 8, induced=True) == {
        3: 32, 4: 36, 5: 0, 6: 96, 7: 0, 8: 72}
    assert cycle_census(shrikhande(), 8, induced=True) == {
        3: 32, 4: 12, 5: 96, 6: 64, 7: 0, 8: 36}
    assert cycle_census(rook44(), 8, induced=False) == {
        3: 32, 4: 60, 5: 288, 6: 1248, 7: 4032, 8: 11952}
    assert cycle_census(shrikhande(), 8, induced=False) == {
        3: 32, 4: 60, 5: 288, 6: 1248, 7: 4032, 8: 11688}


def test_census_permutation_invariant():
    g = random_graph(9, 0.4, 11)
    perm = list(np.random.default_rng(5).permutation(g.n))
    for induced in (True, False):
        assert cycle_census(g, 7, induced) == cycle_census(
            g.permuted(perm), 7, induced
        )


def test_lift_hexagon():
    x = lift(hexagon(), ic(6))
    assert x.dims == [6, 6, 1]
    assert check_skeleton_preserving(hexagon(), x)
    # max_dim=1 keeps only the skeleton
    assert lift(hexagon(), ic(6, max_dim=1)).dims == [6, 6]


def test_lift_dedup_union():
    # a triangle is both a 3-clique and an induced 3-cycle: one cell only
    g = Graph(3, ((0, 1), (1, 2), (0, 2)))
    x = lift(g, LiftingSpec.parse("CL:3,IC:3"))
    assert x.dims == [3, 3, 1]
    assert sorted(x.provenance[2][0]) == [("CL", (0, 1, 2)), ("IC", (0, 1, 2))]


def test_clique_complex_k4():
    g = Graph(4, tuple(itertools.combinations(range(4), 2)))
    x = clique_complex(g, 4)
    assert x.dims == [4, 6, 4, 1]
    assert sorted(len(b) for b in x.boundaries[3]) == [4]


def test_clique_complex_caps_dimension():
    g = Graph(5, tuple(itertools.combinations(range(5), 2)))
    x = clique_complex(g, 5)  # 5-cliques exceed the cap and are skipped
    assert x.dim == 3
    assert x.dims == [5, 10, 10, 5]


def test_lift_isomorphism_invariance():
    g = decalin()
    perm = list(np.random.default_rng(2).permutation(g.n))
    x1 = lift(g, ic(6))
    x2 = lift(g.permuted(perm), ic(6))
    assert x1.dims == x2.dims


def test_spec_parsing_and_errors():
    s = LiftingSpec.parse("cl:3 , ic:6")
    assert s.parts == (("CL", 3), ("IC", 6))
    with pytest.raises(ValueError):
        LiftingSpec.parse("XX:4")
    with pytest.raises(ValueError):
        LiftingSpec.parse("CL:2")


def test_fixture_cycle_structures():
    assert cycle_census(decalin(), 8, induced=True)[6] == 2
    assert cycle_census(bicyclopentyl(), 8, induced=True)[5] == 2
    assert cycle_census(two_triangles(), 6, induced=True) == {
        3: 2, 4: 0, 5: 0, 6: 0}
