import itertools
import random

import numpy as np
import pytest

import oracles
from depnet.community import (
    CommunityPartition,
    intersection_report,
    k_step_neighborhood,
    louvain,
    modularity,
    to_undirected,
    top_package_study,
)
from depnet.errors import EmptyInputError, ParameterError
from depnet.generators import GeneratorConfig, gnm_random, preferential_attachment
from depnet.graph import build_graph, weakly_connected_components


def clique_edges(nodes):
    return list(itertools.combinations(nodes, 2))


def test_to_undirected_examples(g1):
    ug = to_undirected(g1)
    assert sorted(zip(ug.u.tolist(), ug.v.tolist())) == [(0, 1), (1, 2), (1, 3)]
    assert ug.weight.tolist() == [1.0, 1.0, 1.0]
    cyc = to_undirected(build_graph([("A", "B"), ("B", "A")]))
    assert (cyc.edge_count, cyc.weight.tolist()) == (1, [2.0])
    assert to_undirected(build_graph([], labels="AB")).edge_count == 0


def test_modularity_matches_dense_formula():
    rng = random.Random(0)
    for _ in range(30):
        n = rng.randint(2, 15)
        edges = oracles.random_edges(n, rng.randint(1, 3 * n), rng)
        g = build_graph(edges, num_nodes=n)
        labels = np.array([rng.randrange(3) for _ in range(n)])
        W = np.zeros((n, n))
        ug = to_undirected(g)
        for a, b, w in zip(ug.u, ug.v, ug.weight):
            W[a, b] = W[b, a] = w
        assert modularity(ug, labels) == pytest.approx(oracles.dense_modularity(W, labels), abs=1e-12)


def test_two_cliques_joined():
    edges = clique_edges(range(4)) + clique_edges(range(4, 8)) + [(3, 4)]
    ug = to_undirected(build_graph(edges))
    W = oracles.undirected_weights(8, edges)
    best, optima = oracles.exhaustive_best_partitions(W)
    assert len(optima) == 1
    part = louvain(ug, seed=1)
    assert oracles.same_partition(part.community_of, optima[0])
    assert part.community_of.tolist() == [0, 0, 0, 0, 1, 1, 1, 1]
    assert part.modularity == pytest.approx(best, abs=1e-12)


def test_single_clique():
    edges = clique_edges(range(5))
    _, optima = oracles.exhaustive_best_partitions(oracles.undirected_weights(5, edges))
    assert [o.tolist() for o in optima] == [[0] * 5]
    part = louvain(to_undirected(build_graph(edges)))
    assert part.community_of.tolist() == [0] * 5


def test_edgeless_convention():
    part = louvain(to_undirected(build_graph([], labels="ABCD")))
    assert part.community_of.tolist() == [0, 1, 2, 3]
    assert part.modularity == 0.0


def test_louvain_empty():
    with pytest.raises(EmptyInputError):
        louvain(to_undirected(build_graph([])))


def test_reported_modularity_recomputes():
    rng = random.Random(3)
    for _ in range(30):
        n = rng.randint(2, 80)
        g = gnm_random(GeneratorConfig(n, edge_count=rng.randint(0, min(3 * n, n * (n - 1))), seed=rng.randrange(1000)))
        ug = to_undirected(g)
        part = louvain(ug, seed=rng.randrange(1000))
        assert abs(part.modularity - modularity(ug, part.community_of)) < 1e-9
        assert part.modularity >= modularity(ug, np.arange(n)) - 1e-12
        assert -0.5 <= part.modularity <= 1
        ids = np.unique(part.community_of)
        assert ids.tolist() == list(range(len(ids)))


def test_louvain_deterministic_per_seed():
    g = preferential_attachment(GeneratorConfig(600, edges_per_node=2, seed=3))
    ug = to_undirected(g)
    a = louvain(ug, seed=7)
    b = louvain(ug, seed=7)
    assert np.array_equal(a.community_of, b.community_of) and a.modularity == b.modularity


def test_louvain_respects_components():
    left = gnm_random(GeneratorConfig(30, edge_count=60, seed=1)).edges().tolist()
    right = gnm_random(GeneratorConfig(30, edge_count=60, seed=2)).edges().tolist()
    edges = left + [(u + 30, v + 30) for u, v in right]
    g = build_graph(edges, num_nodes=60)
    comp = weakly_connected_components(g).component_of
    part = louvain(to_undirected(g), seed=4)
    for c in range(part.community_count):
        assert len(set(comp[part.community_of == c].tolist())) == 1


def test_resolution_validation(g1):
    with pytest.raises(ParameterError):
        louvain(to_undirected(g1), resolution=0)


# ---- neighbourhoods -----------------------------------------------------------------


def test_k_step_examples(g1):
    assert k_step_neighborhood(g1, 3, 1) == {3, 1}
    assert k_step_neighborhood(g1, 3, 2) == {3, 1, 0, 2}
    assert k_step_neighborhood(build_graph([], labels="AB"), 0, 1) == {0}
    assert k_step_neighborhood(g1, 3, 1, include_root=False) == {1}


@pytest.mark.parametrize("k", [0, 4, -1])
def test_k_step_rejects_k(g1, k):
    with pytest.raises(ParameterError):
        k_step_neighborhood(g1, 0, k)


def test_k_step_matches_bfs_oracle():
    rng = random.Random(17)
    for _ in range(40):
        n = rng.randint(1, 200)
        edges = [(rng.randrange(n), rng.randrange(n)) for _ in range(rng.randint(0, 2 * n))]
        g = build_graph(edges, num_nodes=n)
        v = rng.randrange(n)
        prev = set()
        for k in (1, 2, 3):
            got = k_step_neighborhood(g, v, k)
            assert got == oracles.bfs_in_hops(n, edges, v, k)
            assert prev <= got
            prev = got


def test_intersection_arithmetic():
    # community {A,B,C,D}; neighbourhood of A at k=1 is {A,B,E}
    g = build_graph([("B", "A"), ("E", "A"), ("C", "D")])
    part = CommunityPartition(np.array([0, 0, 0, 0, 1]), 0.0)
    r = intersection_report(g, part, g.index_of("A"), 1)
    assert (r.community_size, r.neighborhood_size, r.intersection_size) == (4, 3, 2)
    assert r.frac_of_community == 0.5
    assert r.frac_of_neighborhood == 2 / 3
    assert r.dependencies == 0 and r.package == "A"


def test_intersection_contained_neighbourhood(g1):
    part = CommunityPartition(np.zeros(4, dtype=np.int64), 0.0)
    r = intersection_report(g1, part, 3, 1)
    assert r.frac_of_neighborhood == 1.0


def test_top_package_study_g1(g1):
    reports = top_package_study(g1, top_n=1, ks=[1, 2], seed=0)
    assert [(r.package, r.k) for r in reports] == [("D", 1), ("D", 2)]
    assert reports[0].neighborhood_size <= reports[1].neighborhood_size


def test_top_package_study_parameters(g1):
    with pytest.raises(ParameterError):
        top_package_study(g1, top_n=5)
    with pytest.raises(ParameterError):
        top_package_study(g1, top_n=1, ks=[4])


def framework_fixture():
    """Two hubs with small trees of dependents and one stray cross link.

    ids: hub 0 with dependents 1-4 (3, 4 via 1); hub 5 with dependents
    6-9 (8, 9 via 6); 2 also depends on 7.
    """
    group = [(1, 0), (2, 0), (3, 1), (4, 1), (2, 1), (3, 0)]
    edges = group + [(u + 5, v + 5) for u, v in group] + [(2, 7)]
    return 10, edges


def test_framework_hubs_share_their_community():
    n, edges = framework_fixture()
    g = build_graph(edges, num_nodes=n)
    _, optima = oracles.exhaustive_best_partitions(oracles.undirected_weights(n, edges))
    assert len(optima) == 1
    best = optima[0]
    assert len(set(best[:5])) == 1 and len(set(best[5:])) == 1 and best[0] != best[5]

    reports = top_package_study(g, top_n=2, ks=[2], seed=0)
    assert {r.node for r in reports} == {0, 5}
    for r in reports:
        assert r.frac_of_neighborhood > 0.5
        assert r.frac_of_community > 0.5
