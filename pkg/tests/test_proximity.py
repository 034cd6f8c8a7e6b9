import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rgtopo.errors import RadiusTooLarge
from rgtopo.pointproc import SPHERE_RADIUS, Manifold, PointCloud, Seed, from_points, sample_uniform
from rgtopo.proximity import (GeometricGraph, brute_force_cech, brute_force_edges, build_cech,
                              build_graph, miniball)


def edge_set(g):
    return set(map(tuple, g.edges().tolist()))


def test_three_points_on_circle_make_a_path():
    c = from_points(Manifold.torus(1), [0.0, 0.001, 0.002], r=0.0006)
    assert edge_set(build_graph(c)) == {(0, 1), (1, 2)}


def test_single_point():
    c = from_points(Manifold.torus(2), [[0.3, 0.3]], r=0.1)
    g = build_graph(c)
    assert g.n_vertices == 1 and g.n_edges == 0


def test_closed_ball_convention():
    c = from_points(Manifold.ball(1, 10.0), [[0.0], [1.0]], r=0.5)
    assert edge_set(build_graph(c)) == {(0, 1)}


def test_wraparound_edge():
    c = from_points(Manifold.torus(2), [[0.01, 0.5], [0.99, 0.5]], r=0.02)
    assert edge_set(build_graph(c)) == {(0, 1)}


def _clouds():
    yield from (sample_uniform(Manifold.torus(2), 200, 0.5, Seed(1, t)) for t in range(100))
    yield sample_uniform(Manifold.torus(1), 300, 0.5, Seed(2))
    yield sample_uniform(Manifold.torus(3), 300, 0.5, Seed(3))
    yield sample_uniform(Manifold.sphere(), 300, 0.5, Seed(4))
    rng = np.random.default_rng(5)
    yield from_points(Manifold.ball(2, 5.0), rng.uniform(-3, 3, (200, 2)), r=0.4)
    yield from_points(Manifold.box(3, 4.0), rng.uniform(-2, 2, (200, 3)), r=0.4)


def test_grid_matches_brute_force():
    for c in _clouds():
        g = build_graph(c)
        assert edge_set(g) == set(map(tuple, brute_force_edges(c).tolist()))


def test_graph_symmetric_and_loop_free():
    for c in itertools.islice(_clouds(), 10):
        g = build_graph(c)
        A = g.dense_adjacency()
        assert np.array_equal(A, A.T) and not np.any(np.diag(A))
        assert np.array_equal(g.degrees, A.sum(axis=1))


def test_radius_check_propagates():
    c = PointCloud(Manifold.torus(2), np.zeros((2, 2)), 0.3, 0.3, "given")
    with pytest.raises(RadiusTooLarge):
        build_graph(c)


def test_miniball_examples():
    c, r = miniball([[0.0, 0.0]])
    assert r == 0 and np.allclose(c, 0)
    c, r = miniball([[0.0, 0.0], [2.0, 0.0]])
    assert r == pytest.approx(1.0) and np.allclose(c, [1, 0])


def _brute_miniball_radius(pts):
    best = math.inf
    cands = [(p, 0.0) for p in pts]
    for a, b in itertools.combinations(pts, 2):
        cands.append(((a + b) / 2, np.linalg.norm(a - b) / 2))
    for a, b, c in itertools.combinations(pts, 3):
        # circumcentre of a triangle in the plane
        M = 2 * np.array([b - a, c - a])
        rhs = np.array([b @ b - a @ a, c @ c - a @ a])
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        o = np.linalg.solve(M, rhs)
        cands.append((o, np.linalg.norm(a - o)))
    for o, r in cands:
        if np.all(np.linalg.norm(pts - o, axis=1) <= r + 1e-12):
            best = min(best, r)
    return best


def test_miniball_against_candidate_enumeration():
    rng = np.random.default_rng(0)
    for _ in range(500):
        pts = rng.random((4, 2))
        _, r = miniball(pts)
        assert r == pytest.approx(_brute_miniball_radius(pts), abs=1e-10)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10)),
                min_size=1, max_size=4))
def test_miniball_encloses(points):
    pts = np.array(points)
    c, r = miniball(pts)
    assert np.all(np.linalg.norm(pts - c, axis=1) <= r * (1 + 1e-9) + 1e-9)
    diam = max((np.linalg.norm(a - b) for a, b in itertools.combinations(pts, 2)), default=0.0)
    assert r >= diam / 2 - 1e-9
    # Jung's bound in three dimensions
    assert r <= math.sqrt(3 / 8) * diam + 1e-9


def test_equilateral_triangle():
    pts = [[0, 0], [1, 0], [0.5, math.sqrt(3) / 2]]
    full = build_cech(from_points(Manifold.ball(2, 10.0), pts, r=0.6), 2)
    assert full.count(1) == 3 and full.count(2) == 1
    hollow = build_cech(from_points(Manifold.ball(2, 10.0), pts, r=0.55), 2)
    assert hollow.count(1) == 3 and hollow.count(2) == 0


@pytest.mark.slow
def test_cech_matches_brute_force_triples():
    for t in range(100):
        c = sample_uniform(Manifold.torus(2), 50, 0.8, Seed(6, t))
        sk = build_cech(c, 2)
        oracle = brute_force_cech(c, 2)
        for d in (1, 2):
            assert sk.simplex_set(d) == oracle[d]


def test_cech_matches_brute_force_tetrahedra():
    for t in range(10):
        c = sample_uniform(Manifold.torus(3), 30, 0.35, Seed(7, t))
        sk = build_cech(c, 3)
        oracle = brute_force_cech(c, 3)
        for d in (1, 2, 3):
            assert sk.simplex_set(d) == oracle[d]


def _downward_closed(sk):
    for d in range(2, sk.k_max + 1):
        lower = sk.simplex_set(d - 1)
        for s in sk.simplex_set(d):
            if not all(f in lower for f in itertools.combinations(s, d)):
                return False
    return True


def test_skeleton_structure_and_monotonicity():
    man = Manifold.torus(2)
    rng = np.random.default_rng(3)
    pts = rng.random((300, 2))
    prev = None
    for r in (0.02, 0.03, 0.04):
        sk = build_cech(from_points(man, pts, r), 3)
        assert _downward_closed(sk)
        edges = sk.simplex_set(1)
        for d in (2, 3):
            for s in sk.simplex_set(d):
                assert all(e in edges for e in itertools.combinations(s, 2))
        if prev is not None:
            for d in (1, 2, 3):
                assert prev.simplex_set(d) <= sk.simplex_set(d)
        prev = sk


def test_sphere_cech_runs_and_is_closed():
    c = sample_uniform(Manifold.sphere(), 400, 0.8, Seed(1))
    sk = build_cech(c, 3)
    assert _downward_closed(sk) and sk.count(2) > 0
    assert np.allclose(np.linalg.norm(c.points, axis=1), SPHERE_RADIUS)


def test_torus_cech_needs_small_radius():
    c = from_points(Manifold.torus(2), [[0.1, 0.1], [0.2, 0.2]], r=0.13)
    build_cech(c, 1)
    with pytest.raises(RadiusTooLarge):
        build_cech(c, 2)


def test_graph_constructors():
    g = GeometricGraph.from_edges(4, [(0, 1), (1, 0), (2, 2), (1, 3)])
    assert edge_set(g) == {(0, 1), (1, 3)}
    h = g.induced([3, 1])
    assert edge_set(h) == {(0, 1)}
    with pytest.raises(ValueError):
        GeometricGraph.from_edges(2, [(0, 5)])


def test_exports(tmp_path):
    c = sample_uniform(Manifold.torus(2), 60, 0.8, Seed(2))
    sk = build_cech(c, 2)
    sk.base.write_edges_csv(tmp_path / "e.csv")
    lines = (tmp_path / "e.csv").read_text().splitlines()
    assert lines[0] == "i,j" and len(lines) == 1 + sk.count(1)
    sk.write_json(tmp_path / "s.json")
    import json
    d = json.loads((tmp_path / "s.json").read_text())
    assert len(d["simplices"]["2"]) == sk.count(2)
