"""Graph matrices, Jacobi spectra, spectral measures and perturbation checks."""
from __future__ import annotations

import csv
import functools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, MultiplicityMismatch, NoConvergence, TooManyEdits
from .proximity import GeometricGraph

ATOM_TOL = 1e-8
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


def sym(Q) -> np.ndarray:
    """Symmetric matrix read from the upper triangle of ``Q``."""
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise DimensionMismatch("expected a square matrix")
    U = np.triu(Q)
    return U + np.triu(Q, 1).T


@dataclass(frozen=True, eq=False)
class GraphMatrices:
    A: np.ndarray
    D: np.ndarray
    L: np.ndarray
    Lhat: np.ndarray


def graph_matrices(graph: GeometricGraph) -> GraphMatrices:
    """Adjacency, degree, Laplacian and symmetric normalised Laplacian.

    Isolated vertices get a zero row in ``Lhat`` (diagonal 0), so the
    multiplicity of the eigenvalue 0 equals the number of components.
    """
    A = graph.dense_adjacency()
    deg = A.sum(axis=1)
    D = np.diag(deg)
    L = D - A
    inv = np.zeros_like(deg)
    pos = deg > 0
    inv[pos] = 1.0 / np.sqrt(deg[pos])
    Lhat = np.diag(pos.astype(float)) - inv[:, None] * A * inv[None, :]
    return GraphMatrices(A, D, L, Lhat)


def normalized_laplacian(graph: GeometricGraph) -> np.ndarray:
    return graph_matrices(graph).Lhat


# --- cyclic Jacobi -------------------------------------------------------------------

@functools.lru_cache(maxsize=256)
def _round_robin(n: int) -> tuple:
    """Disjoint rotation pairs per round; every pair appears once per sweep."""
    N = n + (n % 2)
    players = list(range(N))
    rounds = []
    for _ in range(N - 1):
        pairs = [(players[i], players[N - 1 - i]) for i in range(N // 2)]
        pairs = [(min(a, b), max(a, b)) for a, b in pairs if a < n and b < n]
        if pairs:
            p = np.array([a for a, _ in pairs])
            q = np.array([b for _, b in pairs])
            rounds.append((p, q))
        players = [players[0], players[-1]] + players[1:-1]
    return tuple(rounds)


def _off(A: np.ndarray) -> float:
    # subtracting the diagonal from the full norm cancels catastrophically
    B = A.copy()
    np.fill_diagonal(B, 0.0)
    return float(np.linalg.norm(B))


def jacobi_eigenvalues(Q, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS) -> np.ndarray:
    """Cyclic Jacobi with a fixed round-robin ordering of disjoint rotations."""
    A = sym(Q).copy()
    n = len(A)
    if n == 0:
        return np.zeros(0)
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    norm = float(np.linalg.norm(A))
    if n == 1 or norm == 0.0:
        return np.sort(np.diag(A).copy())
    target = tol * norm
    rounds = _round_robin(n)
    for _ in range(max_sweeps):
        if _off(A) <= target:
            return np.sort(np.diag(A).copy())
        for p, q in rounds:
            apq = A[p, q]
            active = np.abs(apq) > 0.0
            if not np.any(active):
                continue
            p, q, apq = p[active], q[active], apq[active]
            app, aqq = A[p, p], A[q, q]
            with np.errstate(over="ignore", divide="ignore"):
                tau = (aqq - app) / (2.0 * apq)
                t = np.sign(tau) / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
            t[~np.isfinite(t)] = 0.0
            t[tau == 0] = 1.0
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            Ap, Aq = A[:, p].copy(), A[:, q].copy()
            A[:, p] = c * Ap - s * Aq
            A[:, q] = s * Ap + c * Aq
            Rp, Rq = A[p, :].copy(), A[q, :].copy()
            A[p, :] = c[:, None] * Rp - s[:, None] * Rq
            A[q, :] = s[:, None] * Rp + c[:, None] * Rq
            A[p, q] = 0.0
            A[q, p] = 0.0
        A = 0.5 * (A + A.T)
    if _off(A) <= target:
        return np.sort(np.diag(A).copy())
    raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")


def eigenvalues(Q) -> np.ndarray:
    """Full spectrum of a symmetric matrix, ascending."""
    return jacobi_eigenvalues(Q)


# --- spectral measures -------------------------------------------------------------

def _group(values: np.ndarray, weights: np.ndarray, tol: float):
    order = np.argsort(values, kind="stable")
    v, w = values[order], weights[order]
    if len(v) == 0:
        return np.zeros(0), np.zeros(0)
    starts = np.concatenate([[0], np.flatnonzero(np.diff(v) > tol) + 1])
    mass = np.add.reduceat(w, starts)
    # weighted mean location of each group
    loc = np.add.reduceat(v * w, starts) / mass
    return loc, mass


@dataclass(eq=False)
class SpectralMeasure:
    """Finite atomic measure: strictly increasing locations, positive masses."""

    locations: np.ndarray
    masses: np.ndarray
    n: int | None = None
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_eigenvalues(cls, eigs, tol: float = ATOM_TOL, normalize: bool = True) -> "SpectralMeasure":
        eigs = np.asarray(eigs, dtype=float)
        n = len(eigs)
        w = np.full(n, 1.0 / n if normalize and n else 1.0)
        loc, mass = _group(eigs, w, tol)
        return cls(loc, mass, n)

    @classmethod
    def from_atoms(cls, atoms, tol: float = ATOM_TOL) -> "SpectralMeasure":
        atoms = list(atoms.items()) if isinstance(atoms, dict) else list(atoms)
        loc = np.array([a for a, _ in atoms], dtype=float)
        mass = np.array([b for _, b in atoms], dtype=float)
        loc, mass = _group(loc, mass, tol)
        return cls(loc, mass)

    @classmethod
    def average(cls, measures: list, tol: float = ATOM_TOL) -> "SpectralMeasure":
        if not measures:
            raise ValueError("nothing to average")
        loc = np.concatenate([m.locations for m in measures])
        mass = np.concatenate([m.masses for m in measures]) / len(measures)
        loc, mass = _group(loc, mass, tol)
        return cls(loc, mass)

    @property
    def total_mass(self) -> float:
        return math.fsum(self.masses.tolist())

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.locations.tolist(), self.masses.tolist()))

    def mass_at(self, x: float, tol: float = ATOM_TOL) -> float:
        hit = np.abs(self.locations - x) <= tol
        return float(self.masses[hit].sum())

    def integrate(self, f) -> float:
        return float(np.dot(self.masses, np.asarray(f(self.locations), dtype=float)))

    def cdf(self, x) -> np.ndarray:
        csum = np.concatenate([[0.0], np.cumsum(self.masses)])
        return csum[np.searchsorted(self.locations, x, side="right")]

    def to_json(self) -> list:
        return [{"x": x, "mass": m} for x, m in self.atoms]

    @classmethod
    def from_json(cls, rows) -> "SpectralMeasure":
        return cls.from_atoms([(r["x"], r["mass"]) for r in rows])

    def histogram(self, bins: int = 400, lo: float = 0.0, hi: float = 2.0):
        edges = np.linspace(lo, hi, bins + 1)
        idx = np.clip(np.searchsorted(edges, self.locations, side="right") - 1, 0, bins - 1)
        h = np.bincount(idx, weights=self.masses, minlength=bins)
        return edges, h

    def write_histogram_csv(self, path, bins: int = 400) -> None:
        edges, h = self.histogram(bins)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["bin_left", "bin_right", "mass"])
            for a, b, m in zip(edges[:-1], edges[1:], h):
                w.writerow([repr(float(a)), repr(float(b)), repr(float(m))])

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def graph_spectrum(graph: GeometricGraph, dec=None) -> np.ndarray:
    """Spectrum of ``Lhat`` computed block-wise over connected components."""
    from .components import decompose

    dec = dec or decompose(graph)
    out = []
    for mem in dec.members:
        k = len(mem)
        if k == 1:
            out.append(np.zeros(1))
        elif k == 2:
            out.append(np.array([0.0, 2.0]))
        else:
            out.append(eigenvalues(normalized_laplacian(graph.induced(mem))))
    return np.sort(np.concatenate(out)) if out else np.zeros(0)


def spectral_measure(graph: GeometricGraph, tol: float = ATOM_TOL, dec=None) -> SpectralMeasure:
    return SpectralMeasure.from_eigenvalues(graph_spectrum(graph, dec), tol)


def zero_mass(measure: SpectralMeasure, graph: GeometricGraph, tol: float = ATOM_TOL, dec=None) -> float:
    """Mass of the atom at 0; checked against b0 / n."""
    from .components import decompose

    n = graph.n_vertices
    mass = measure.mass_at(0.0, tol)
    b0 = (dec or decompose(graph)).b0
    zeros = int(round(mass * n))
    if zeros != b0 or abs(mass - b0 / n) > 0.5 / n:
        raise MultiplicityMismatch(f"{zeros} zero eigenvalues but b0 = {b0}")
    return b0 / n


# --- closed-form families -------------------------------------------------------------

def complete_graph(N: int) -> GeometricGraph:
    i, j = np.triu_indices(N, 1)
    return GeometricGraph.from_edges(N, np.column_stack([i, j]))


def path_graph(N: int) -> GeometricGraph:
    return GeometricGraph.from_edges(N, [(i, i + 1) for i in range(N - 1)])


def cycle_graph(N: int) -> GeometricGraph:
    return GeometricGraph.from_edges(N, [(i, (i + 1) % N) for i in range(N)])


def star_graph(N: int) -> GeometricGraph:
    """K_{1, N-1}: centre 0 and N-1 leaves."""
    return GeometricGraph.from_edges(N, [(0, i) for i in range(1, N)])


def disjoint_union(*graphs: GeometricGraph) -> GeometricGraph:
    edges, off = [], 0
    for g in graphs:
        edges.append(g.edges() + off)
        off += g.n_vertices
    return GeometricGraph.from_edges(off, np.concatenate(edges) if edges else np.zeros((0, 2)))


def complete_disjoint_pair(N: int) -> GeometricGraph:
    return disjoint_union(complete_graph(N), complete_graph(N))


def complete_joined(N: int, c: int) -> GeometricGraph:
    """Two copies of K_N plus c bridges (v_i, v'_i) with distinct endpoints."""
    g = complete_disjoint_pair(N)
    bridges = np.array([(i, N + i) for i in range(c)]).reshape(-1, 2)
    return GeometricGraph.from_edges(2 * N, np.concatenate([g.edges(), bridges]))


@dataclass(frozen=True)
class ConstraintSet:
    """Partial description of the spectral measure of two joined complete graphs."""

    N: int
    c: int

    @property
    def zero_mass(self) -> float:
        return 1.0 / (2 * self.N)

    @property
    def big_atom(self) -> float:
        return self.N / (self.N - 1)

    @property
    def big_atom_min_mass(self) -> float:
        return (self.N - 1 - self.c) / self.N

    @property
    def interior_mass(self) -> float:
        return (2 * self.c + 1) / (2 * self.N)

    def check(self, mu: SpectralMeasure, tol: float = 1e-7) -> bool:
        zero = mu.mass_at(0.0, tol)
        big = mu.mass_at(self.big_atom, tol)
        rest = mu.total_mass - zero - big
        at_two = mu.mass_at(2.0, tol)
        return (abs(zero - self.zero_mass) < 1e-12 and big >= self.big_atom_min_mass - 1e-12
                and rest <= self.interior_mass + 1e-12 and at_two == 0.0)


FAMILIES = ("complete", "path", "cycle", "star", "complete_disjoint_pair", "complete_joined")


@functools.lru_cache(maxsize=None)
def _computed_family(family: str, N: int) -> tuple:
    g = cycle_graph(N) if family == "cycle" else star_graph(N)
    return tuple(SpectralMeasure.from_eigenvalues(eigenvalues(normalized_laplacian(g))).atoms)


def oracle_spectrum(family: str, N: int, c: int | None = None):
    """Closed-form (or cached computed) spectral measures of named families."""
    family = family.lower()
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    if N < 2 or (family == "cycle" and N < 3):
        raise ValueError("N too small for this family")
    if family in ("complete", "complete_disjoint_pair"):
        return SpectralMeasure.from_atoms([(0.0, 1.0 / N), (N / (N - 1), (N - 1) / N)])
    if family == "path":
        k = np.arange(N)
        return SpectralMeasure.from_atoms(list(zip(1.0 - np.cos(np.pi * k / (N - 1)),
                                                   np.full(N, 1.0 / N))))
    if family == "complete_joined":
        if c is None or not 1 <= c <= N:
            raise ValueError("complete_joined needs 1 <= c <= N")
        return ConstraintSet(N, c)
    return SpectralMeasure.from_atoms(_computed_family(family, N))


def family_graph(family: str, N: int, c: int | None = None) -> GeometricGraph:
    return {
        "complete": lambda: complete_graph(N),
        "path": lambda: path_graph(N),
        "cycle": lambda: cycle_graph(N),
        "star": lambda: star_graph(N),
        "complete_disjoint_pair": lambda: complete_disjoint_pair(N),
        "complete_joined": lambda: complete_joined(N, c),
    }[family.lower()]()


# --- perturbation theory ---------------------------------------------------------------

def schatten1(Q) -> float:
    return float(np.sum(np.abs(eigenvalues(Q))))


def weilandt_hoffman_check(Q1, Q2, tol: float = 1e-8):
    Q1, Q2 = sym(Q1), sym(Q2)
    if Q1.shape != Q2.shape:
        raise DimensionMismatch("matrices differ in order")
    lhs = float(np.sum(np.abs(eigenvalues(Q1) - eigenvalues(Q2))))
    rhs = schatten1(Q1 - Q2)
    return lhs, rhs, lhs <= rhs + tol


@dataclass
class BoundCheck:
    value: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.value <= self.bound + 1e-9


def edge_perturbation_bounds(g1: GeometricGraph, g2: GeometricGraph, C: int) -> dict:
    """Schatten-1 norms of the four matrix differences against their edit bounds."""
    if g1.n_vertices != g2.n_vertices:
        raise DimensionMismatch("graphs must share the vertex set")
    e1 = set(map(tuple, g1.edges().tolist()))
    e2 = set(map(tuple, g2.edges().tolist()))
    edits = len(e1 ^ e2)
    if edits > C:
        raise TooManyEdits(f"{edits} edge edits exceed C = {C}")
    n = g1.n_vertices
    m1, m2 = graph_matrices(g1), graph_matrices(g2)
    return {
        "A": BoundCheck(schatten1(m1.A - m2.A), 4.0 * C),
        "D": BoundCheck(schatten1(m1.D - m2.D), 4.0 * C * C),
        "L": BoundCheck(schatten1(m1.L - m2.L), 4.0 * C * C),
        "Lhat": BoundCheck(schatten1(m1.Lhat - m2.Lhat), 2.0 * C * math.sqrt(2.0) * math.sqrt(max(n - 1, 0))),
        "edits": edits,
    }


@dataclass(frozen=True)
class PiecewiseLinear:
    """Continuous test function on [0, 2] given by breakpoints."""

    xs: tuple
    ys: tuple

    def __call__(self, x):
        return np.interp(x, self.xs, self.ys)

    @classmethod
    def identity(cls) -> "PiecewiseLinear":
        return cls((0.0, 2.0), (0.0, 2.0))

    @classmethod
    def constant(cls, v: float = 1.0) -> "PiecewiseLinear":
        return cls((0.0, 2.0), (v, v))


def weak_star_gap(m1: SpectralMeasure, m2: SpectralMeasure, f) -> float:
    return abs(m1.integrate(f) - m2.integrate(f))


def _merged(m1: SpectralMeasure, m2: SpectralMeasure, tol: float):
    loc = np.concatenate([m1.locations, m2.locations])
    w1 = np.concatenate([m1.masses, np.zeros(len(m2.masses))])
    w2 = np.concatenate([np.zeros(len(m1.masses)), m2.masses])
    order = np.argsort(loc, kind="stable")
    loc, w1, w2 = loc[order], w1[order], w2[order]
    if not len(loc):
        return loc, w1, w2
    starts = np.concatenate([[0], np.flatnonzero(np.diff(loc) > tol) + 1])
    return loc[starts], np.add.reduceat(w1, starts), np.add.reduceat(w2, starts)


def tv_spectral(m1: SpectralMeasure, m2: SpectralMeasure, tol: float = ATOM_TOL) -> float:
    _, a, b = _merged(m1, m2, tol)
    return 0.5 * float(np.sum(np.abs(a - b)))


def kolmogorov(m1: SpectralMeasure, m2: SpectralMeasure, tol: float = ATOM_TOL) -> float:
    """Sup distance between the two CDFs, atoms within ``tol`` identified."""
    _, a, b = _merged(m1, m2, tol)
    if not len(a):
        return 0.0
    return float(np.max(np.abs(np.cumsum(a) - np.cumsum(b))))


def complete_join_multiplicity(N: int, c: int, tol: float = 1e-7) -> dict:
    if not 1 <= c <= N - 2:
        raise ValueError("need 1 <= c <= N - 2")
    eigs = eigenvalues(normalized_laplacian(complete_joined(N, c)))
    big = N / (N - 1)
    mult = int(np.sum(np.abs(eigs - big) <= tol))
    zeros = int(np.sum(np.abs(eigs) <= ATOM_TOL))
    others = eigs[(np.abs(eigs - big) > tol) & (np.abs(eigs) > ATOM_TOL)]
    interior = bool(np.all((others > 0.0) & (others < 2.0)))
    in_range = bool(eigs.min() >= -1e-9 and eigs.max() <= 2.0 + 1e-9)
    return {
        "N": N, "c": c, "eigenvalues": eigs, "multiplicity": mult,
        "bound": 2 * (N - 1 - c), "zero_count": zeros, "others_interior": interior,
        "in_range": in_range,
        "holds": mult >= 2 * (N - 1 - c) and zeros == 1 and interior and in_range,
    }
