"""Unit-volume manifolds, their metrics, and seeded point samplers.

Two random models are supported:

* the uniform model: ``n`` i.i.d. uniform points on a compact manifold of
  volume one, with ball radius ``r = alpha * n ** (-1/m)``;
* the Poisson model: a unit-intensity Poisson process in a Euclidean window,
  with ball radius ``r = alpha``.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import RadiusTooLarge, UnsupportedManifold

SPHERE_RADIUS = 1.0 / math.sqrt(4.0 * math.pi)

KINDS = ("torus", "sphere", "box", "ball")


@dataclass(frozen=True)
class Manifold:
    """Ambient space descriptor.

    ``kind`` is one of ``torus`` (flat, side 1), ``sphere`` (round, area 1),
    ``box`` (Euclidean, centred at the origin) or ``ball`` (Euclidean,
    centred at the origin).
    """

    kind: str
    m: int
    side: tuple[float, ...] | None = None
    radius: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UnsupportedManifold(f"unknown manifold kind {self.kind!r}")
        if self.kind == "torus" and self.m not in (1, 2, 3):
            raise UnsupportedManifold("flat tori are supported in dimensions 1, 2, 3")
        if self.kind == "sphere" and self.m != 2:
            raise UnsupportedManifold("only the round 2-sphere is supported")
        if self.kind == "box":
            if self.side is None or len(self.side) != self.m:
                raise ValueError("box needs one side length per axis")
            if any(s < 0 for s in self.side):
                raise ValueError("box sides must be non-negative")
        if self.kind == "ball" and (self.radius is None or self.radius < 0):
            raise ValueError("ball needs a non-negative radius")

    @classmethod
    def torus(cls, m: int) -> "Manifold":
        return cls("torus", m)

    @classmethod
    def sphere(cls) -> "Manifold":
        return cls("sphere", 2)

    @classmethod
    def box(cls, m: int, side) -> "Manifold":
        if np.isscalar(side):
            side = (float(side),) * m
        return cls("box", m, side=tuple(float(s) for s in side))

    @classmethod
    def ball(cls, m: int, radius: float) -> "Manifold":
        return cls("ball", m, radius=float(radius))

    @property
    def is_compact_unit(self) -> bool:
        return self.kind in ("torus", "sphere")

    @property
    def is_euclidean(self) -> bool:
        return self.kind in ("box", "ball")

    @property
    def ambient_dim(self) -> int:
        return 3 if self.kind == "sphere" else self.m

    @property
    def volume(self) -> float:
        if self.is_compact_unit:
            return 1.0
        if self.kind == "box":
            return float(np.prod(self.side))
        return unit_ball_volume(self.m) * self.radius ** self.m

    @property
    def injectivity_radius(self) -> float:
        if self.kind == "torus":
            return 0.5
        if self.kind == "sphere":
            return math.pi * SPHERE_RADIUS / 2.0
        return math.inf

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "m": self.m}
        if self.side is not None:
            d["side"] = list(self.side)
        if self.radius is not None:
            d["radius"] = self.radius
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Manifold":
        side = d.get("side")
        return cls(d["kind"], int(d["m"]),
                   side=tuple(side) if side is not None else None,
                   radius=d.get("radius"))


def unit_ball_volume(m: int) -> float:
    return math.pi ** (m / 2) / math.gamma(m / 2 + 1)


@dataclass(frozen=True)
class Seed:
    """Key of an independent random stream: (master seed, trial, stream)."""

    master: int
    trial: int = 0
    stream: int = 0

    def generator(self) -> np.random.Generator:
        # Philox is counter based; the spawn key splits the master seed.
        ss = np.random.SeedSequence(self.master, spawn_key=(self.trial, self.stream))
        return np.random.Generator(np.random.Philox(ss))

    def to_dict(self) -> dict:
        return {"master": self.master, "trial": self.trial, "stream": self.stream}


@dataclass(frozen=True, eq=False)
class PointCloud:
    manifold: Manifold
    points: np.ndarray
    r: float
    alpha: float
    model: str  # "uniform" | "poisson" | "given"
    n: int | None = None
    seed: Seed | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.points)

    def to_json(self) -> dict:
        return {
            "manifold": self.manifold.to_dict(),
            "model": self.model,
            "alpha": self.alpha,
            "n": self.n,
            "R": self.manifold.radius if self.manifold.kind == "ball" else None,
            "r": self.r,
            "seed": self.seed.to_dict() if self.seed else None,
            "points": self.points.tolist(),
        }

    @classmethod
    def from_json(cls, d: dict) -> "PointCloud":
        man = Manifold.from_dict(d["manifold"])
        pts = np.asarray(d["points"], dtype=float).reshape(-1, man.ambient_dim)
        seed = Seed(**d["seed"]) if d.get("seed") else None
        return cls(man, pts, float(d["r"]), float(d["alpha"]), d.get("model", "given"),
                   n=d.get("n"), seed=seed)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"x{i}" for i in range(self.points.shape[1])])
            for row in self.points:
                w.writerow([repr(float(v)) for v in row])

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json()))


def read_csv_points(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        return np.zeros((0, 0))
    return np.array([[float(v) for v in row] for row in rows[1:]], dtype=float).reshape(
        -1, len(rows[0]))


def from_points(manifold: Manifold, points, r: float, alpha: float | None = None) -> PointCloud:
    """Wrap explicit coordinates, e.g. hand-built test configurations."""
    pts = np.asarray(points, dtype=float).reshape(-1, manifold.ambient_dim)
    if manifold.kind == "torus":
        pts = np.mod(pts, 1.0)
    _check_radius(manifold, r)
    return PointCloud(manifold, pts, float(r), float(alpha if alpha is not None else r),
                      "given", n=len(pts))


def _check_radius(manifold: Manifold, r: float) -> None:
    if not 2.0 * r < manifold.injectivity_radius:
        raise RadiusTooLarge(
            f"2r = {2 * r:g} must be below the injectivity radius "
            f"{manifold.injectivity_radius:g} of the {manifold.kind}")


def thermodynamic_radius(alpha: float, n: int, m: int) -> float:
    return alpha * n ** (-1.0 / m)


def sample_uniform(manifold: Manifold, n: int, alpha: float, seed: Seed) -> PointCloud:
    if n < 1:
        raise ValueError("n must be positive")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if not manifold.is_compact_unit:
        raise UnsupportedManifold("uniform sampling needs a unit-volume compact manifold")
    r = thermodynamic_radius(alpha, n, manifold.m)
    _check_radius(manifold, r)
    rng = seed.generator()
    if manifold.kind == "torus":
        pts = rng.random((n, manifold.m))
    else:
        g = rng.standard_normal((n, 3))
        pts = SPHERE_RADIUS * g / np.linalg.norm(g, axis=1, keepdims=True)
    return PointCloud(manifold, pts, r, float(alpha), "uniform", n=n, seed=seed)


def uniform_in_window(window: Manifold, k: int, rng: np.random.Generator) -> np.ndarray:
    m = window.m
    if window.kind == "box":
        side = np.asarray(window.side)
        return (rng.random((k, m)) - 0.5) * side
    if window.kind == "ball":
        g = rng.standard_normal((k, m))
        norms = np.linalg.norm(g, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        rad = window.radius * rng.random((k, 1)) ** (1.0 / m)
        return g / norms * rad
    raise UnsupportedManifold("Poisson windows must be Euclidean boxes or balls")


def sample_poisson(window: Manifold, alpha: float, seed: Seed) -> PointCloud:
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if not window.is_euclidean:
        raise UnsupportedManifold("Poisson windows must be Euclidean boxes or balls")
    rng = seed.generator()
    k = int(rng.poisson(window.volume))
    pts = uniform_in_window(window, k, rng)
    return PointCloud(window, pts, float(alpha), float(alpha), "poisson", n=k, seed=seed)


def torus_delta(p, q) -> np.ndarray:
    """Per-axis wrapped difference q - p, each entry in [-1/2, 1/2]."""
    d = np.asarray(q, dtype=float) - np.asarray(p, dtype=float)
    return d - np.round(d)


def distance(manifold: Manifold, p, q):
    """Geodesic distance; broadcasts over leading axes."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if manifold.m == 1 and manifold.kind != "sphere":
        # allow bare scalars for one-dimensional spaces
        if p.ndim == 0 or p.shape[-1] != 1:
            p = p[..., None]
        if q.ndim == 0 or q.shape[-1] != 1:
            q = q[..., None]
    if manifold.kind == "torus":
        d = np.abs(q - p) % 1.0
        d = np.minimum(d, 1.0 - d)
        out = np.sqrt(np.sum(d * d, axis=-1))
    elif manifold.kind == "sphere":
        cross = np.linalg.norm(np.cross(p, q), axis=-1)
        dot = np.sum(p * q, axis=-1)
        out = SPHERE_RADIUS * np.arctan2(cross, dot)
    else:
        out = np.linalg.norm(q - p, axis=-1)
    return float(out) if np.ndim(out) == 0 else out
