import itertools
import json

import networkx as nx
import numpy as np
import pytest
from networkx.generators.atlas import graph_atlas_g

from rgtopo import recognition as rec
from rgtopo.components import decompose
from rgtopo.errors import TooLarge
from rgtopo.pointproc import Manifold, Seed, from_points, sample_uniform
from rgtopo.proximity import GeometricGraph, build_graph


def adj_of(n, edges):
    adj = [set() for _ in range(n)]
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    return adj


def naive_ordering_exists(adj):
    # every permutation, no pruning
    n = len(adj)
    for order in itertools.permutations(range(n)):
        pos = {v: i for i, v in enumerate(order)}
        ok = True
        for v in range(n):
            idx = sorted(pos[u] for u in adj[v] | {v})
            if idx[-1] - idx[0] + 1 != len(idx):
                ok = False
                break
        if ok:
            return True
    return False


def connected_atlas(max_n):
    return [G for G in graph_atlas_g()[1:] if G.number_of_nodes() <= max_n and nx.is_connected(G)]


def test_examples():
    assert rec.is_unit_interval(adj_of(5, [(0, 1), (1, 2), (2, 3), (3, 4)])).is_unit_interval
    claw = rec.is_unit_interval(adj_of(4, rec.CLAW))
    assert not claw.is_unit_interval
    assert claw.witness.type == "claw" and sorted(claw.witness.vertices) == [0, 1, 2, 3]
    c4 = rec.is_unit_interval(adj_of(4, [(0, 1), (1, 2), (2, 3), (3, 0)]))
    assert c4.witness.type == "hole" and len(c4.witness.vertices) == 4


def test_bruteforce_examples():
    assert rec.unit_interval_bruteforce(adj_of(3, [(0, 1), (1, 2), (0, 2)]))
    assert not rec.unit_interval_bruteforce(adj_of(6, rec.NET))
    with pytest.raises(TooLarge):
        rec.unit_interval_bruteforce(adj_of(10, []))


@pytest.mark.parametrize("name", ["net", "3-sun"])
def test_figure_graphs_rejected_with_own_witness(name):
    res = rec.is_unit_interval(adj_of(6, rec.PATTERNS[name]))
    assert not res.is_unit_interval
    assert res.witness.type == name


def test_ordering_is_valid_when_accepted():
    for G in connected_atlas(7):
        adj = rec.adjacency_sets(G)
        res = rec.is_unit_interval(adj)
        if res.is_unit_interval:
            assert sorted(res.ordering) == list(range(len(adj)))
            assert rec.is_umbrella_free(adj, list(res.ordering))


def test_bruteforce_matches_naive_permutations():
    for G in connected_atlas(6):
        adj = rec.adjacency_sets(G)
        assert rec.unit_interval_bruteforce(adj) == naive_ordering_exists(adj)


def test_agrees_with_bruteforce_exhaustive():
    graphs = connected_atlas(7)
    assert len(graphs) == 1 + 1 + 2 + 6 + 21 + 112 + 853
    for G in graphs:
        adj = rec.adjacency_sets(G)
        res = rec.is_unit_interval(adj)
        assert res.is_unit_interval == rec.unit_interval_bruteforce(adj), list(G.edges())
        assert (res.witness is None) == res.is_unit_interval
        if res.witness is not None:
            assert rec.certify(adj, res.witness)


@pytest.mark.slow
def test_agrees_with_bruteforce_random():
    rng = np.random.default_rng(0)
    for _ in range(10_000):
        n = int(rng.integers(1, 10))
        p = rng.uniform(0.1, 0.9)
        adj = adj_of(n, [e for e in itertools.combinations(range(n), 2) if rng.random() < p])
        res = rec.is_unit_interval(adj)
        assert res.is_unit_interval == rec.unit_interval_bruteforce(adj)
        if res.witness is not None:
            assert rec.certify(adj, res.witness)


def test_certify_rejects_bad_witnesses():
    adj = adj_of(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)])
    assert not rec.certify(adj, rec.Witness("hole", (0, 1, 2, 3)))
    assert not rec.certify(adj, rec.Witness("claw", (0, 1, 2, 3)))
    assert not rec.certify(adj, rec.Witness("hole", (0, 1, 2)))
    assert not rec.certify(adj, rec.Witness("mystery", (0, 1)))


def test_witness_json():
    res = rec.is_unit_interval(adj_of(4, rec.CLAW))
    d = json.loads(res.witness.dumps())
    assert set(d) == {"type", "vertices"} and d["type"] == "claw"
    assert res.to_json()["is_unit_interval"] is False


def test_find_induced_star_examples():
    k17 = adj_of(8, [(0, i) for i in range(1, 8)])
    centre, leaves = rec.find_induced_star(k17, 7)
    assert centre == 0 and sorted(leaves) == list(range(1, 8))
    assert rec.find_induced_star(k17, 8) is None
    assert rec.find_induced_star(adj_of(4, list(itertools.combinations(range(4), 2))), 2) is None
    with pytest.raises(ValueError):
        rec.find_induced_star(k17, 1)


def test_find_induced_star_needs_backtracking():
    # a greedy pick of leaf 1 blocks both 2 and 3; the independent triple is 2, 3, 4
    adj = adj_of(5, [(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (1, 3)])
    centre, leaves = rec.find_induced_star(adj, 3)
    assert centre == 0 and sorted(leaves) == [2, 3, 4]


def test_star_against_networkx_independent_sets():
    rng = np.random.default_rng(5)
    for _ in range(300):
        n = int(rng.integers(2, 12))
        edges = [e for e in itertools.combinations(range(n), 2) if rng.random() < 0.4]
        adj = adj_of(n, edges)
        s = int(rng.integers(2, 5))
        g = nx.Graph(edges)
        g.add_nodes_from(range(n))
        expected = any(
            any(all(b not in adj[a] for a, b in itertools.combinations(leaves, 2))
                for leaves in itertools.combinations(sorted(adj[v]), s))
            for v in range(n))
        got = rec.find_induced_star(adj, s)
        assert (got is not None) == expected
        if got is not None:
            c, leaves = got
            assert all(u in adj[c] for u in leaves)
            assert all(b not in adj[a] for a, b in itertools.combinations(leaves, 2))


def test_segment_graphs_are_unit_interval():
    rng = np.random.default_rng(1)
    for _ in range(50):
        pts = rng.uniform(-5, 5, (200, 1))
        g = build_graph(from_points(Manifold.ball(1, 6.0), pts, r=0.04))
        for mem in decompose(g).members:
            assert rec.is_unit_interval(g.induced(mem)).is_unit_interval


def test_circle_components_unit_interval():
    for t in range(50):
        cloud = sample_uniform(Manifold.torus(1), 500, 0.4, Seed(3, t))
        g = build_graph(cloud)
        for mem in decompose(g).members:
            if rec.wraps_circle(cloud.points[mem], cloud.r):
                continue
            assert rec.is_unit_interval(g.induced(mem)).is_unit_interval


def test_wraps_circle():
    assert rec.wraps_circle(np.linspace(0, 1, 10, endpoint=False), 0.06)
    assert not rec.wraps_circle(np.linspace(0, 0.5, 10), 0.06)
    assert not rec.wraps_circle([0.3], 1.0)


def test_networkx_input_accepted():
    assert not rec.is_unit_interval(nx.cycle_graph(5)).is_unit_interval
    assert rec.is_unit_interval(nx.complete_graph(5)).is_unit_interval
    assert rec.is_unit_interval(GeometricGraph.from_edges(3, [(0, 1), (1, 2)])).is_unit_interval
