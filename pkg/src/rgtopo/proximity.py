"""Geometric graphs and Čech skeleta built from point clouds.

Neighbour search uses a uniform grid whose cells are at least ``2r`` wide, so
every pair at distance ``<= 2r`` lies in the same or adjacent cells.  Higher
simplices are found by clique expansion and certified with a smallest
enclosing ball test.
"""
from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import RadiusTooLarge, UnwrapFailure
from .pointproc import SPHERE_RADIUS, Manifold, PointCloud, distance, torus_delta

K_MAX_CAP = 3
SIMPLEX_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class GeometricGraph:
    """Undirected simple graph in CSR form with sorted neighbour lists."""

    n_vertices: int
    indptr: np.ndarray
    indices: np.ndarray

    @classmethod
    def from_edges(cls, n: int, edges) -> "GeometricGraph":
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        e = e[e[:, 0] != e[:, 1]]
        if len(e) and (e.min() < 0 or e.max() >= n):
            raise ValueError("edge endpoint out of range")
        both = np.concatenate([e, e[:, ::-1]])
        if len(both):
            both = np.unique(both, axis=0)  # sorts by (row, col)
        counts = np.bincount(both[:, 0], minlength=n) if len(both) else np.zeros(n, np.int64)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        indices = both[:, 1].astype(np.int64) if len(both) else np.zeros(0, np.int64)
        return cls(n, indptr, indices)

    @classmethod
    def from_adjacency(cls, adj) -> "GeometricGraph":
        a = np.asarray(adj)
        i, j = np.nonzero(np.triu(a, 1))
        return cls.from_edges(len(a), np.column_stack([i, j]))

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def n_edges(self) -> int:
        return len(self.indices) // 2

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def edges(self) -> np.ndarray:
        """(E, 2) array of edges with i < j, sorted lexicographically."""
        rows = np.repeat(np.arange(self.n_vertices), self.degrees)
        keep = rows < self.indices
        return np.column_stack([rows[keep], self.indices[keep]])

    def adjacency_sets(self) -> list[set[int]]:
        return [set(self.neighbors(i).tolist()) for i in range(self.n_vertices)]

    def dense_adjacency(self) -> np.ndarray:
        a = np.zeros((self.n_vertices, self.n_vertices))
        e = self.edges()
        a[e[:, 0], e[:, 1]] = 1.0
        a[e[:, 1], e[:, 0]] = 1.0
        return a

    def induced(self, vertices) -> "GeometricGraph":
        """Induced subgraph, relabelled 0..k-1 in the given vertex order."""
        vertices = np.asarray(vertices, dtype=np.int64)
        pos = -np.ones(self.n_vertices, dtype=np.int64)
        pos[vertices] = np.arange(len(vertices))
        e = self.edges()
        if len(e):
            e = pos[e]
            e = e[(e[:, 0] >= 0) & (e[:, 1] >= 0)]
        return GeometricGraph.from_edges(len(vertices), e)

    def write_edges_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["i", "j"])
            w.writerows(self.edges().tolist())

    def __repr__(self):
        return f"GeometricGraph(n={self.n_vertices}, edges={self.n_edges})"


class GridIndex:
    """Hash grid over point coordinates with cells at least ``2r`` wide."""

    def __init__(self, manifold: Manifold, points: np.ndarray, r: float):
        self.manifold = manifold
        self.points = np.asarray(points, dtype=float)
        reach = 2.0 * r
        d = self.points.shape[1] if self.points.ndim == 2 else manifold.ambient_dim
        if manifold.kind == "torus":
            self.periodic = True
            self.ncell = max(1, int(math.floor(1.0 / reach))) if reach > 0 else 1
            self.cell_size = 1.0 / self.ncell
            cells = np.floor(self.points * self.ncell).astype(np.int64)
            cells = np.clip(cells, 0, self.ncell - 1)
        else:
            # sphere points live in R^3; a chord never exceeds the arc
            self.periodic = False
            self.ncell = None
            self.cell_size = reach if reach > 0 else 1.0
            if len(self.points):
                lo = self.points.min(axis=0)
            else:
                lo = np.zeros(d)
            cells = np.floor((self.points - lo) / self.cell_size).astype(np.int64)
        self.dim = d
        self.cells = cells.reshape(-1, d)
        uniq, inverse = np.unique(self.cells, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        self.cell_coords = uniq
        self.order = np.argsort(inverse, kind="stable")
        counts = np.bincount(inverse, minlength=len(uniq))
        self.start = np.concatenate([[0], np.cumsum(counts)[:-1]]).astype(np.int64)
        self.count = counts.astype(np.int64)
        self.lookup = {tuple(c): k for k, c in enumerate(uniq.tolist())}

    def neighbor_cells(self, k: int) -> list[int]:
        base = self.cell_coords[k]
        out = set()
        for off in itertools.product((-1, 0, 1), repeat=self.dim):
            c = base + np.asarray(off)
            if self.periodic:
                c = np.mod(c, self.ncell)
            t = self.lookup.get(tuple(c.tolist()))
            if t is not None:
                out.add(t)
        return sorted(out)

    def candidate_pairs(self) -> np.ndarray:
        """All (i, j), i < j, with i and j in the same or adjacent cells."""
        src, dst = [], []
        for k in range(len(self.cell_coords)):
            for t in self.neighbor_cells(k):
                if t >= k:
                    src.append(k)
                    dst.append(t)
        if not src:
            return np.zeros((0, 2), dtype=np.int64)
        src = np.asarray(src)
        dst = np.asarray(dst)
        na, nb = self.count[src], self.count[dst]
        tot = na * nb
        g = np.repeat(np.arange(len(src)), tot)
        local = np.arange(tot.sum()) - np.repeat(np.cumsum(tot) - tot, tot)
        a = self.order[self.start[src][g] + local // nb[g]]
        b = self.order[self.start[dst][g] + local % nb[g]]
        i = np.minimum(a, b)
        j = np.maximum(a, b)
        keep = i < j
        pairs = np.column_stack([i[keep], j[keep]])
        return np.unique(pairs, axis=0) if len(pairs) else pairs


def _require_radius(cloud: PointCloud) -> None:
    if not 2.0 * cloud.r < cloud.manifold.injectivity_radius:
        raise RadiusTooLarge("2r must be below the injectivity radius")


def build_graph(cloud: PointCloud) -> GeometricGraph:
    """Edges exactly between points at distance at most ``2r`` (closed balls)."""
    _require_radius(cloud)
    n = len(cloud.points)
    if n < 2:
        return GeometricGraph.from_edges(n, np.zeros((0, 2)))
    pairs = GridIndex(cloud.manifold, cloud.points, cloud.r).candidate_pairs()
    if len(pairs):
        d = distance(cloud.manifold, cloud.points[pairs[:, 0]], cloud.points[pairs[:, 1]])
        pairs = pairs[np.asarray(d) <= 2.0 * cloud.r]
    return GeometricGraph.from_edges(n, pairs)


def brute_force_edges(cloud: PointCloud) -> np.ndarray:
    n = len(cloud.points)
    i, j = np.triu_indices(n, 1)
    if not len(i):
        return np.zeros((0, 2), dtype=np.int64)
    d = distance(cloud.manifold, cloud.points[i], cloud.points[j])
    keep = np.asarray(d) <= 2.0 * cloud.r
    return np.column_stack([i[keep], j[keep]])


# --- smallest enclosing ball -------------------------------------------------

def _circumball(pts: np.ndarray) -> tuple[np.ndarray, float]:
    """Smallest ball with all of ``pts`` on its boundary (centre in their affine hull)."""
    p0 = pts[0]
    if len(pts) == 1:
        return p0.copy(), 0.0
    A = pts[1:] - p0
    rhs = 0.5 * np.sum(A * A, axis=1)
    G = A @ A.T
    lam, *_ = np.linalg.lstsq(G, rhs, rcond=None)
    c = p0 + lam @ A
    return c, float(np.max(np.linalg.norm(pts - c, axis=1)))


def _inside(center, radius, p) -> bool:
    return float(np.linalg.norm(p - center)) <= radius * (1.0 + 1e-12) + 1e-15


def _mtf(pts: list, end: int, support: list, dim: int):
    center, radius = _circumball(np.array(support)) if support else (None, -1.0)
    if len(support) == dim + 1:
        return center, radius
    i = 0
    while i < end:
        p = pts[i]
        if center is None or not _inside(center, radius, p):
            center, radius = _mtf(pts, i, support + [p], dim)
            # move to front
            pts.insert(0, pts.pop(i))
        i += 1
    return center, radius


_MB_RNG_SEED = 0x5EED


def miniball(points) -> tuple[np.ndarray, float]:
    """Smallest enclosing ball via Welzl's move-to-front recursion."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if len(pts) == 0:
        raise ValueError("miniball of an empty set")
    perm = np.random.default_rng(_MB_RNG_SEED).permutation(len(pts))
    lst = [pts[k] for k in perm]
    center, radius = _mtf(lst, len(lst), [], pts.shape[1])
    return np.asarray(center, dtype=float), float(radius)


# --- Čech skeleton -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CechSkeleton:
    """Simplices up to ``k_max``; ``simplices[d]`` is a sorted (count, d+1) array."""

    k_max: int
    simplices: dict
    base: GeometricGraph
    meta: dict = field(default_factory=dict)

    @property
    def n_vertices(self) -> int:
        return self.base.n_vertices

    def count(self, d: int) -> int:
        return len(self.simplices.get(d, ()))

    def simplex_set(self, d: int) -> set[tuple[int, ...]]:
        return set(map(tuple, self.simplices.get(d, np.zeros((0, d + 1))).tolist()))

    def to_json(self) -> dict:
        return {
            "k_max": self.k_max,
            "n_vertices": self.n_vertices,
            "simplices": {str(d): s.tolist() for d, s in sorted(self.simplices.items())},
        }

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json()))


def _local_coords(cloud: PointCloud, verts) -> np.ndarray:
    """Points of a candidate simplex in one Euclidean chart."""
    pts = cloud.points[list(verts)]
    if cloud.manifold.kind != "torus":
        return pts
    anchor = pts[0]
    out = anchor + torus_delta(anchor, pts)
    # every unwrapped pair must reproduce the torus distance
    for a, b in itertools.combinations(range(len(out)), 2):
        chart = float(np.linalg.norm(out[a] - out[b]))
        true = distance(cloud.manifold, pts[a], pts[b])
        if abs(chart - true) > 1e-9:
            raise UnwrapFailure(f"simplex {tuple(verts)} does not fit in one chart")
    return out


def cech_threshold(cloud: PointCloud) -> float:
    """Largest admissible enclosing-ball radius in the chart used for testing."""
    if cloud.manifold.kind == "sphere":
        # caps of geodesic radius r are cut out by ambient balls whose
        # circle-radius is rho*sin(r/rho); exact for up to three points
        return SPHERE_RADIUS * math.sin(cloud.r / SPHERE_RADIUS)
    return cloud.r


def is_cech_simplex(cloud: PointCloud, verts) -> bool:
    _, rad = miniball(_local_coords(cloud, verts))
    return rad <= cech_threshold(cloud) + SIMPLEX_SLACK


def build_cech(cloud: PointCloud, k_max: int = 3, graph: GeometricGraph | None = None) -> CechSkeleton:
    if not 1 <= k_max <= K_MAX_CAP:
        raise ValueError(f"k_max must be in 1..{K_MAX_CAP}")
    _require_radius(cloud)
    if cloud.manifold.kind == "torus" and k_max >= 2 and not 2.0 * cloud.r < 0.25:
        raise RadiusTooLarge("torus Čech construction needs 2r < 1/4")
    g = graph if graph is not None else build_graph(cloud)
    n = g.n_vertices
    simplices = {0: np.arange(n, dtype=np.int64).reshape(-1, 1), 1: g.edges()}
    if k_max >= 2:
        adj = g.adjacency_sets()
        prev = [tuple(s) for s in simplices[1].tolist()]
        prev_set = set(prev)
        for d in range(2, k_max + 1):
            found = []
            for s in prev:
                common = set.intersection(*(adj[v] for v in s))
                for k in sorted(c for c in common if c > s[-1]):
                    cand = s + (k,)
                    # faces must already be simplices (downward closure)
                    if d >= 3 and not all(
                            f in prev_set for f in itertools.combinations(cand, d)):
                        continue
                    if is_cech_simplex(cloud, cand):
                        found.append(cand)
            found.sort()
            simplices[d] = np.asarray(found, dtype=np.int64).reshape(-1, d + 1)
            prev = found
            prev_set = set(found)
    return CechSkeleton(k_max, simplices, g, meta={"cloud": cloud})


def brute_force_cech(cloud: PointCloud, k_max: int) -> dict:
    """Oracle: test every vertex subset directly, no clique pruning."""
    n = len(cloud.points)
    out = {0: {(i,) for i in range(n)},
           1: set(map(tuple, brute_force_edges(cloud).tolist()))}
    for d in range(2, k_max + 1):
        out[d] = set()
        for c in itertools.combinations(range(n), d + 1):
            pts = cloud.points[list(c)]
            if cloud.manifold.kind == "torus":
                # far-apart tuples have no unique chart and cannot be simplices
                far = any(distance(cloud.manifold, pts[a], pts[b]) > 0.25
                          for a, b in itertools.combinations(range(d + 1), 2))
                if far:
                    continue
            if is_cech_simplex(cloud, c):
                out[d].add(c)
    return out
