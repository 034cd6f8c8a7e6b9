"""Connected components, component type keys and empirical type measures."""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .canon import canonical_order
from .errors import EmptyComplex, NoInteriorComponents
from .pointproc import PointCloud, unit_ball_volume
from .proximity import CechSkeleton, GeometricGraph, build_cech

DEFAULT_SIZE_CAP = 16


class UnionFind:
    def __init__(self, size: int):
        self.parent = list(range(size))

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if ra < rb:
                self.parent[rb] = ra
            else:
                self.parent[ra] = rb


@dataclass(frozen=True, eq=False)
class ComponentDecomposition:
    labels: np.ndarray
    b0: int
    members: list

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.b0)


def decompose(graph: GeometricGraph) -> ComponentDecomposition:
    """Union-find over the edges; ids numbered by smallest contained vertex."""
    n = graph.n_vertices
    uf = UnionFind(n)
    for i, j in graph.edges().tolist():
        uf.union(i, j)
    labels = np.empty(n, dtype=np.int64)
    ids: dict[int, int] = {}
    for v in range(n):
        root = uf.find(v)
        if root not in ids:
            ids[root] = len(ids)
        labels[v] = ids[root]
    b0 = len(ids)
    order = np.argsort(labels, kind="stable")
    splits = np.cumsum(np.bincount(labels, minlength=b0))[:-1]
    members = np.split(order, splits) if n else []
    return ComponentDecomposition(labels, b0, members)


# --- type keys -------------------------------------------------------------------

@dataclass(frozen=True)
class TypeKey:
    """Isomorphism-class key of a component's k-skeleton.

    Exact keys are canonical simplex lists; coarse keys are invariant
    fingerprints and carry ``approximate=True``.
    """

    data: bytes
    k: int
    approximate: bool = False

    @property
    def hex(self) -> str:
        return self.data.hex()

    @property
    def text(self) -> str:
        return self.data.decode("ascii")

    @property
    def n_vertices(self) -> int:
        return int(self.text.split("|", 2)[1])

    def __repr__(self):
        flag = "~" if self.approximate else ""
        return f"TypeKey({flag}{self.text})"


@dataclass(frozen=True, eq=False)
class Piece:
    """A connected sub-complex with vertices relabelled 0..nv-1."""

    nv: int
    simplices: dict  # dim -> list of sorted tuples, dim >= 1

    def adjacency(self) -> list[list[int]]:
        adj = [[] for _ in range(self.nv)]
        for i, j in self.simplices.get(1, ()):
            adj[i].append(j)
            adj[j].append(i)
        return adj


def pieces(skeleton: CechSkeleton, dec: ComponentDecomposition | None = None) -> list[Piece]:
    """Split a skeleton into per-component pieces (in component-id order)."""
    dec = dec or decompose(skeleton.base)
    local = np.empty(skeleton.n_vertices, dtype=np.int64)
    for mem in dec.members:
        local[mem] = np.arange(len(mem))
    per = [dict() for _ in range(dec.b0)]
    for d, arr in skeleton.simplices.items():
        if d == 0 or len(arr) == 0:
            continue
        comp = dec.labels[arr[:, 0]]
        loc = local[arr]
        order = np.argsort(comp, kind="stable")
        comp_s = comp[order]
        loc_s = loc[order]
        bounds = np.searchsorted(comp_s, np.arange(dec.b0 + 1))
        for c in np.unique(comp_s).tolist():
            rows = loc_s[bounds[c]:bounds[c + 1]]
            per[c][d] = [tuple(sorted(r)) for r in rows.tolist()]
    return [Piece(len(mem), per[c]) for c, mem in enumerate(dec.members)]


def piece_of(skeleton: CechSkeleton, vertices) -> Piece:
    vertices = list(vertices)
    pos = {v: i for i, v in enumerate(vertices)}
    simp = {}
    for d, arr in skeleton.simplices.items():
        if d == 0:
            continue
        rows = [tuple(sorted(pos[v] for v in s)) for s in arr.tolist() if all(v in pos for v in s)]
        if rows:
            simp[d] = rows
    return Piece(len(vertices), simp)


def _coarse_key(piece: Piece, k: int) -> TypeKey:
    adj = [set(a) for a in piece.adjacency()]
    degs = sorted(len(a) for a in adj)
    tri = sum(1 for i, j in piece.simplices.get(1, ()) for t in adj[i] & adj[j] if t > j)
    counts = [len(piece.simplices.get(d, ())) for d in range(1, k + 1)]
    text = "coarse|%d|%d|%s|%d|%s" % (
        piece.nv, len(piece.simplices.get(1, ())), ",".join(map(str, degs)), tri,
        ",".join(map(str, counts)))
    return TypeKey(text.encode("ascii"), k, approximate=True)


def piece_key(piece: Piece, k: int, size_cap: int = DEFAULT_SIZE_CAP) -> TypeKey:
    if piece.nv > size_cap:
        return _coarse_key(piece, k)
    nv = piece.nv
    adj = piece.adjacency()
    colors = [0] * nv
    # simplices of dimension >= 2 become extra nodes coloured by dimension
    higher = [(d, s) for d in range(2, k + 1) for s in piece.simplices.get(d, ())]
    for d, s in higher:
        node = len(adj)
        adj.append(list(s))
        colors.append(d - 1)
        for v in s:
            adj[v].append(node)
    order = canonical_order(adj, colors)
    rank = {v: p for p, v in enumerate(order) if v < nv}
    parts = ["exact", str(nv)]
    for d in range(1, k + 1):
        rel = sorted(tuple(sorted(rank[v] for v in s)) for s in piece.simplices.get(d, ()))
        parts.append(";".join("-".join(map(str, s)) for s in rel))
    return TypeKey("|".join(parts).encode("ascii"), k)


def canonical_key(skeleton: CechSkeleton, k: int = 1, size_cap: int = DEFAULT_SIZE_CAP) -> TypeKey:
    """Key of a connected skeleton; equal keys iff isomorphic k-skeleta (within the cap)."""
    if k > skeleton.k_max:
        raise ValueError("k exceeds the skeleton's k_max")
    return piece_key(piece_of(skeleton, range(skeleton.n_vertices)), k, size_cap)


def graph_key(graph: GeometricGraph, size_cap: int = DEFAULT_SIZE_CAP) -> TypeKey:
    piece = Piece(graph.n_vertices, {1: [tuple(e) for e in graph.edges().tolist()]})
    return piece_key(piece, 1, size_cap)


# --- type measures ---------------------------------------------------------------

@dataclass(eq=False)
class TypeMeasure:
    masses: dict  # TypeKey -> float
    b0: int = 0
    counts: dict = field(default_factory=dict)

    def total(self) -> float:
        return math.fsum(self.masses.values())

    @property
    def has_approximate(self) -> bool:
        return any(key.approximate for key in self.masses)

    def exact_only(self) -> "TypeMeasure":
        """Restriction to exact keys, renormalised."""
        kept = {key: m for key, m in self.masses.items() if not key.approximate}
        tot = math.fsum(kept.values())
        return TypeMeasure({key: m / tot for key, m in kept.items()} if tot > 0 else {}, self.b0)

    def to_json(self) -> list:
        items = sorted(self.masses.items(), key=lambda kv: (-kv[1], kv[0].data))
        return [{"key_hex": key.hex, "key": key.text, "mass": m,
                 "approximate": key.approximate} for key, m in items]

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, rows: list, k: int = 1) -> "TypeMeasure":
        return cls({TypeKey(bytes.fromhex(r["key_hex"]), k, r["approximate"]): r["mass"]
                    for r in rows})

    @classmethod
    def from_counts(cls, counts: dict) -> "TypeMeasure":
        b0 = sum(counts.values())
        if b0 == 0:
            raise EmptyComplex("no components")
        return cls({key: c / b0 for key, c in counts.items()}, b0, dict(counts))

    @classmethod
    def average(cls, measures: list) -> "TypeMeasure":
        """Equal-weight mixture, accumulated in the given order."""
        acc: dict = {}
        for mu in measures:
            for key, m in mu.masses.items():
                acc[key] = acc.get(key, 0.0) + m
        T = len(measures)
        return cls({key: v / T for key, v in acc.items()}, sum(mu.b0 for mu in measures))


def component_keys(skeleton: CechSkeleton, k: int = 1, size_cap: int = DEFAULT_SIZE_CAP,
                   dec: ComponentDecomposition | None = None) -> list[TypeKey]:
    dec = dec or decompose(skeleton.base)
    cache: dict = {}
    out = []
    for piece in pieces(skeleton, dec):
        sig = (piece.nv, tuple((d, tuple(piece.simplices.get(d, ()))) for d in range(1, k + 1)))
        key = cache.get(sig)
        if key is None:
            key = cache[sig] = piece_key(piece, k, size_cap)
        out.append(key)
    return out


def type_measure(skeleton: CechSkeleton, k: int = 1, size_cap: int = DEFAULT_SIZE_CAP) -> TypeMeasure:
    if skeleton.n_vertices == 0:
        raise EmptyComplex("complex has no vertices")
    counts: dict = {}
    for key in component_keys(skeleton, k, size_cap):
        counts[key] = counts.get(key, 0) + 1
    return TypeMeasure.from_counts(counts)


def tv_distance(a: TypeMeasure, b: TypeMeasure) -> float:
    keys = set(a.masses) | set(b.masses)
    return 0.5 * math.fsum(abs(a.masses.get(k, 0.0) - b.masses.get(k, 0.0)) for k in keys)


# --- Poisson window --------------------------------------------------------------

def window_radius(cloud: PointCloud) -> float:
    """Radius R of the counting window: the sampled ball minus a 2r margin."""
    return cloud.manifold.radius - 2.0 * cloud.r


def interior_components(cloud: PointCloud, dec: ComponentDecomposition, R: float) -> np.ndarray:
    """Ids of components whose union of closed r-balls lies in the open ball B(0, R)."""
    if cloud.manifold.kind == "ball":
        reach = np.linalg.norm(cloud.points, axis=1) + cloud.r
        inside = reach < R
    elif cloud.manifold.kind == "box":
        half = np.asarray(cloud.manifold.side) / 2.0 - 2.0 * cloud.r
        inside = np.all(np.abs(cloud.points) + cloud.r < half, axis=1)
    else:
        raise ValueError("interior components need a Euclidean window")
    ok = np.ones(dec.b0, dtype=bool)
    np.logical_and.at(ok, dec.labels, inside)
    return np.flatnonzero(ok)


def counting_volume(cloud: PointCloud, R: float) -> float:
    if cloud.manifold.kind == "ball":
        return unit_ball_volume(cloud.manifold.m) * R ** cloud.manifold.m
    half = np.asarray(cloud.manifold.side) / 2.0 - 2.0 * cloud.r
    return float(np.prod(2.0 * np.maximum(half, 0.0)))


@dataclass(eq=False)
class PoissonWindow:
    """Components of a Poisson sample retained inside the counting window."""

    R: float
    volume: float
    skeleton: CechSkeleton
    decomposition: ComponentDecomposition
    retained: np.ndarray  # component ids

    @property
    def n_retained(self) -> int:
        return len(self.retained)

    @property
    def retained_vertices(self) -> np.ndarray:
        if not len(self.retained):
            return np.zeros(0, dtype=np.int64)
        return np.sort(np.concatenate([self.decomposition.members[c] for c in self.retained]))

    def graph(self) -> GeometricGraph:
        return self.skeleton.base.induced(self.retained_vertices)


def poisson_window(cloud: PointCloud, k_max: int = 1, R: float | None = None,
                   skeleton: CechSkeleton | None = None) -> PoissonWindow:
    """Retain the components of a Poisson sample lying inside B(0, R).

    The sample must cover B(0, R + r): then every neighbour of a retained
    point was sampled, so retained components are components of the full
    process.  By default R is the sampled radius minus ``2r``.
    """
    if R is None:
        R = window_radius(cloud) if cloud.manifold.kind == "ball" else None
    skeleton = skeleton or build_cech(cloud, k_max)
    dec = decompose(skeleton.base)
    if cloud.manifold.kind == "ball":
        keep = interior_components(cloud, dec, R)
        vol = counting_volume(cloud, R)
    else:
        keep = interior_components(cloud, dec, 0.0)
        vol = counting_volume(cloud, 0.0)
    return PoissonWindow(R, vol, skeleton, dec, keep)


def poisson_component_measure(cloud: PointCloud, k: int = 1, size_cap: int = DEFAULT_SIZE_CAP,
                              R: float | None = None) -> TypeMeasure:
    win = poisson_window(cloud, max(k, 1), R)
    if win.n_retained == 0:
        raise NoInteriorComponents("every component touches the window boundary")
    keys = component_keys(win.skeleton, k, size_cap, win.decomposition)
    counts: dict = {}
    for c in win.retained.tolist():
        counts[keys[c]] = counts.get(keys[c], 0) + 1
    return TypeMeasure.from_counts(counts)


# --- integral-geometry sandwich ------------------------------------------------------

@dataclass(eq=False)
class LocalCountReport:
    lower: float
    global_count: int
    upper: float
    params: dict
    centers_lower: np.ndarray = field(repr=False, default=None)
    inner_counts: np.ndarray = field(repr=False, default=None)
    centers_upper: np.ndarray = field(repr=False, default=None)
    touch_counts: np.ndarray = field(repr=False, default=None)

    def holds(self, slack: float = 0.0) -> bool:
        return (self.lower <= (1.0 + slack) * self.global_count
                and self.global_count <= (1.0 + slack) * self.upper)

    def to_json(self) -> dict:
        return {"lower": self.lower, "global": self.global_count, "upper": self.upper,
                "params": self.params}


def _grid_centers(radius: float, step: float, m: int) -> np.ndarray:
    k = int(math.ceil(radius / step)) + 1
    ax = (np.arange(-k, k) + 0.5) * step
    grid = np.stack(np.meshgrid(*([ax] * m), indexing="ij"), axis=-1).reshape(-1, m)
    return grid[np.linalg.norm(grid, axis=1) < radius]


def sandwich_check(skeleton: CechSkeleton, w: TypeKey, r_loc: float, grid_step: float,
                   cloud: PointCloud | None = None, R: float | None = None,
                   size_cap: int = DEFAULT_SIZE_CAP) -> LocalCountReport:
    """Midpoint Riemann sums of the local sandwich integrals for type ``w``.

    lower = int_{B_{R-r_loc}} N(U, B(x, r_loc); w) / vol(B_{r_loc}) dx
    upper = int_{B_{R+r_loc}} N*(U, B(x, r_loc); w) / vol(B_{r_loc}) dx
    """
    cloud = cloud if cloud is not None else skeleton.meta.get("cloud")
    if cloud is None:
        raise ValueError("sandwich_check needs the point cloud")
    if R is None:
        R = cloud.manifold.radius
    if not 0 < r_loc < R:
        raise ValueError("need 0 < r_loc < R")
    m = cloud.manifold.m
    params = {"R": R, "r_loc": r_loc, "grid_step": grid_step, "r": cloud.r, "key": w.text}
    if skeleton.n_vertices == 0:
        return LocalCountReport(0.0, 0, 0.0, params)
    dec = decompose(skeleton.base)
    keys = component_keys(skeleton, w.k, size_cap, dec)
    comps = [c for c, key in enumerate(keys) if key == w]
    r = cloud.r
    pts = cloud.points
    reach = np.array([np.max(np.linalg.norm(pts[dec.members[c]], axis=1)) for c in comps])
    global_count = int(np.sum(reach + r < R)) if comps else 0

    cell = grid_step ** m / (unit_ball_volume(m) * r_loc ** m)
    lo_centers = _grid_centers(R - r_loc, grid_step, m)
    up_centers = _grid_centers(R + r_loc, grid_step, m)
    inner = np.zeros(len(lo_centers), dtype=np.int64)
    touch = np.zeros(len(up_centers), dtype=np.int64)
    for c in comps:
        P = pts[dec.members[c]]
        dl = np.linalg.norm(lo_centers[:, None, :] - P[None, :, :], axis=2)
        inner += (dl.max(axis=1) + r < r_loc)
        du = np.linalg.norm(up_centers[:, None, :] - P[None, :, :], axis=2)
        touch += (du.min(axis=1) <= r_loc + r)
    lower = float(inner.sum()) * cell
    upper = float(touch.sum()) * cell
    return LocalCountReport(lower, global_count, upper, params,
                            lo_centers, inner, up_centers, touch)


def singleton_key(k: int = 1) -> TypeKey:
    return piece_key(Piece(1, {}), k)


def brute_isomorphic(p: Piece, q: Piece, k: int) -> bool:
    """Oracle: try every vertex bijection (small pieces only)."""
    if p.nv != q.nv:
        return False
    sp = {d: {tuple(sorted(s)) for s in p.simplices.get(d, ())} for d in range(1, k + 1)}
    sq = {d: {tuple(sorted(s)) for s in q.simplices.get(d, ())} for d in range(1, k + 1)}
    if any(len(sp[d]) != len(sq[d]) for d in sp):
        return False
    for perm in itertools.permutations(range(p.nv)):
        if all({tuple(sorted(perm[v] for v in s)) for s in sp[d]} == sq[d] for d in sp):
            return True
    return False
