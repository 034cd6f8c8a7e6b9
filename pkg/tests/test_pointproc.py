import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rgtopo.errors import RadiusTooLarge, UnsupportedManifold
from rgtopo.pointproc import (SPHERE_RADIUS, Manifold, PointCloud, Seed, distance,
                              read_csv_points, sample_poisson, sample_uniform,
                              thermodynamic_radius, unit_ball_volume)


def test_torus_radius_from_alpha():
    assert thermodynamic_radius(0.5, 4, 2) == 0.25
    # 2r = 1/2 sits exactly on the injectivity radius, which is rejected
    with pytest.raises(RadiusTooLarge):
        sample_uniform(Manifold.torus(2), 4, 0.5, Seed(1))
    c = sample_uniform(Manifold.torus(2), 4, 0.49, Seed(1))
    assert c.points.shape == (4, 2)
    assert np.all((c.points >= 0) & (c.points < 1))
    assert c.r == 0.49 * 4 ** -0.5


def test_circle_radius():
    c = sample_uniform(Manifold.torus(1), 100, 0.3, Seed(1))
    assert c.r == pytest.approx(0.003, abs=1e-15)


def test_radius_too_large_rejected():
    with pytest.raises(RadiusTooLarge):
        sample_uniform(Manifold.torus(2), 4, 1.0, Seed(1))  # 2r = 1 >= 1/2


def test_unsupported():
    with pytest.raises(UnsupportedManifold):
        Manifold.torus(4)
    with pytest.raises(UnsupportedManifold):
        sample_uniform(Manifold.ball(2, 3.0), 10, 0.5, Seed(0))


def test_uniform_first_coordinate_mean():
    c = sample_uniform(Manifold.torus(2), 100_000, 0.5, Seed(11))
    x = c.points[:, 0]
    se = x.std(ddof=1) / math.sqrt(len(x))
    assert abs(x.mean() - 0.5) < 3 * se


def test_sphere_points_on_sphere():
    c = sample_uniform(Manifold.sphere(), 500, 0.5, Seed(2))
    assert np.allclose(np.linalg.norm(c.points, axis=1), SPHERE_RADIUS)
    assert 4 * math.pi * SPHERE_RADIUS ** 2 == pytest.approx(1.0)


def test_seed_reproducible_and_streams_differ():
    a = sample_uniform(Manifold.torus(3), 50, 0.5, Seed(5, 2, 1)).points
    b = sample_uniform(Manifold.torus(3), 50, 0.5, Seed(5, 2, 1)).points
    c = sample_uniform(Manifold.torus(3), 50, 0.5, Seed(5, 3, 1)).points
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, c)


def test_poisson_mean_count_ball():
    win = Manifold.ball(2, 3.0)
    counts = np.array([len(sample_poisson(win, 1.0, Seed(3, t))) for t in range(10_000)])
    se = counts.std(ddof=1) / math.sqrt(len(counts))
    assert abs(counts.mean() - 9 * math.pi) < 3 * se


def test_poisson_zero_window():
    win = Manifold.box(1, 0.0)
    assert all(len(sample_poisson(win, 1.0, Seed(1, t))) == 0 for t in range(20))


def test_poisson_tail_probabilities():
    # window of volume V = 2; tail sum_{k>=l} V^k e^{-V} / k!
    V = 2.0
    win = Manifold.ball(2, math.sqrt(V / math.pi))
    assert win.volume == pytest.approx(V)
    T = 20_000
    counts = np.array([len(sample_poisson(win, 0.1, Seed(9, t))) for t in range(T)])
    for l in range(7):
        p = 1.0 - sum(V ** k * math.exp(-V) / math.factorial(k) for k in range(l))
        emp = float(np.mean(counts >= l))
        se = math.sqrt(max(p * (1 - p), 1e-12) / T)
        assert abs(emp - p) <= 4 * se + 1e-12, (l, emp, p)


def test_poisson_disjoint_windows_uncorrelated():
    win = Manifold.box(2, (4.0, 2.0))
    left, right = [], []
    for t in range(3000):
        p = sample_poisson(win, 0.5, Seed(4, t)).points
        left.append(np.sum(p[:, 0] < 0))
        right.append(np.sum(p[:, 0] >= 0))
    left, right = np.array(left, float), np.array(right, float)
    prod = (left - left.mean()) * (right - right.mean())
    se = prod.std(ddof=1) / math.sqrt(len(prod))
    assert abs(prod.mean()) < 3 * se


def test_poisson_radius_is_alpha():
    c = sample_poisson(Manifold.ball(3, 2.0), 0.7, Seed(1))
    assert c.r == 0.7 and c.model == "poisson"
    assert np.all(np.linalg.norm(c.points, axis=1) <= 2.0)


def test_distance_examples():
    assert distance(Manifold.torus(1), 0.1, 0.9) == pytest.approx(0.2)
    assert distance(Manifold.torus(2), (0, 0), (0.5, 0.5)) == pytest.approx(math.sqrt(2) / 2)
    s = Manifold.sphere()
    north = (0, 0, SPHERE_RADIUS)
    south = (0, 0, -SPHERE_RADIUS)
    assert distance(s, north, south) == pytest.approx(math.pi / math.sqrt(4 * math.pi))


@pytest.mark.parametrize("man", [Manifold.torus(1), Manifold.torus(2), Manifold.torus(3),
                                 Manifold.sphere(), Manifold.ball(2, 5.0)])
def test_distance_is_metric(man):
    rng = np.random.default_rng(0)
    k = 10_000
    if man.kind == "torus":
        p, q, r = (rng.random((k, man.m)) for _ in range(3))
        bound = math.sqrt(man.m) / 2
    elif man.kind == "sphere":
        p, q, r = (SPHERE_RADIUS * g / np.linalg.norm(g, axis=1, keepdims=True)
                   for g in (rng.standard_normal((k, 3)) for _ in range(3)))
        bound = math.pi * SPHERE_RADIUS
    else:
        p, q, r = (rng.uniform(-5, 5, (k, 2)) for _ in range(3))
        bound = math.inf
    dpq, dqp = distance(man, p, q), distance(man, q, p)
    dqr, dpr = distance(man, q, r), distance(man, p, r)
    assert np.allclose(dpq, dqp, atol=1e-12, rtol=0)
    assert np.all(dpr <= dpq + dqr + 1e-12)
    assert np.all(dpq <= bound + 1e-12)
    assert np.all(distance(man, p, p) <= 1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 3), st.floats(0.01, 0.4), st.integers(1, 200))
def test_torus_radius_formula(m, alpha, n):
    r = alpha * n ** (-1.0 / m)
    if 2 * r >= 0.5:
        with pytest.raises(RadiusTooLarge):
            sample_uniform(Manifold.torus(m), n, alpha, Seed(0))
    else:
        c = sample_uniform(Manifold.torus(m), n, alpha, Seed(0))
        assert c.r == r and len(c) == n


def test_unit_ball_volume():
    assert unit_ball_volume(1) == pytest.approx(2.0)
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)


def test_cloud_csv_and_json_roundtrip(tmp_path):
    c = sample_uniform(Manifold.torus(2), 25, 0.5, Seed(8, 1, 2))
    c.write_csv(tmp_path / "p.csv")
    assert (tmp_path / "p.csv").read_text().splitlines()[0] == "x0,x1"
    assert np.array_equal(read_csv_points(tmp_path / "p.csv"), c.points)
    c.write_json(tmp_path / "c.json")
    import json
    d = json.loads((tmp_path / "c.json").read_text())
    assert d["manifold"]["kind"] == "torus" and d["alpha"] == 0.5 and d["n"] == 25
    back = PointCloud.from_json(d)
    assert np.array_equal(back.points, c.points) and back.r == c.r and back.seed == c.seed
