"""Unit interval graph recognition and induced-star search.

A graph is unit interval iff its vertices admit an ordering in which every
closed neighbourhood is a contiguous block.  Such an ordering is found with
three lexicographic breadth-first sweeps, each breaking ties by the previous
sweep.  Rejections are explained by a forbidden induced subgraph: a claw, a
net, a 3-sun or a chordless cycle of length at least four.
"""
from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import TooLarge

CLAW = ((0, 1), (0, 2), (0, 3))
NET = ((0, 1), (1, 2), (0, 2), (0, 3), (1, 4), (2, 5))
SUN3 = ((0, 1), (1, 2), (0, 2), (0, 3), (1, 3), (1, 4), (2, 4), (0, 5), (2, 5))
PATTERNS = {"claw": CLAW, "net": NET, "3-sun": SUN3}


def adjacency_sets(graph) -> list[set[int]]:
    """Accepts a GeometricGraph, a networkx graph, or a list of neighbour lists."""
    if hasattr(graph, "adjacency_sets"):
        return graph.adjacency_sets()
    if hasattr(graph, "nodes") and hasattr(graph, "edges"):
        idx = {v: i for i, v in enumerate(sorted(graph.nodes()))}
        adj = [set() for _ in idx]
        for u, v in graph.edges():
            if u != v:
                adj[idx[u]].add(idx[v])
                adj[idx[v]].add(idx[u])
        return adj
    return [set(nb) for nb in graph]


@dataclass(frozen=True)
class Witness:
    type: str  # "hole", "claw", "net" or "3-sun"
    vertices: tuple[int, ...]

    def to_json(self) -> dict:
        return {"type": self.type, "vertices": list(self.vertices)}

    def dumps(self) -> str:
        return json.dumps(self.to_json())


@dataclass(frozen=True)
class RecognitionResult:
    is_unit_interval: bool
    witness: Witness | None = None
    ordering: tuple[int, ...] | None = None

    def to_json(self) -> dict:
        return {"is_unit_interval": self.is_unit_interval,
                "witness": self.witness.to_json() if self.witness else None}


# --- orderings ---------------------------------------------------------------------

def lbfs(adj: list[set[int]], vertices, prev: list[int] | None = None) -> list[int]:
    """Lexicographic BFS over ``vertices``.

    Ties go to the vertex appearing last in ``prev`` (the "+" rule), or to the
    smallest vertex when no previous ordering is given.
    """
    verts = list(vertices)
    if prev is not None:
        rank = {v: i for i, v in enumerate(prev)}
    else:
        rank = {v: -v for v in verts}
    label = {v: [] for v in verts}
    left = set(verts)
    order = []
    n = len(verts)
    for i in range(n):
        v = max(left, key=lambda u: (label[u], rank[u]))
        left.remove(v)
        order.append(v)
        for u in adj[v]:
            if u in left:
                label[u].append(n - i)
    return order


def is_umbrella_free(adj: list[set[int]], order: list[int]) -> bool:
    """Every closed neighbourhood occupies a contiguous run of ``order``."""
    pos = {v: i for i, v in enumerate(order)}
    for v in order:
        ps = [pos[u] for u in adj[v] if u in pos] + [pos[v]]
        if max(ps) - min(ps) + 1 != len(ps):
            return False
    return True


def components_of(adj: list[set[int]], vertices=None) -> list[list[int]]:
    verts = range(len(adj)) if vertices is None else vertices
    allowed = set(verts)
    seen, out = set(), []
    for s in verts:
        if s in seen:
            continue
        seen.add(s)
        comp, queue = [], deque([s])
        while queue:
            v = queue.popleft()
            comp.append(v)
            for u in adj[v]:
                if u in allowed and u not in seen:
                    seen.add(u)
                    queue.append(u)
        out.append(sorted(comp))
    return out


def unit_interval_ordering(adj: list[set[int]]) -> list[int] | None:
    order = []
    for comp in components_of(adj):
        s1 = lbfs(adj, comp)
        s2 = lbfs(adj, comp, s1)
        s3 = lbfs(adj, comp, s2)
        if not is_umbrella_free(adj, s3):
            return None
        order.extend(s3)
    return order


# --- witnesses ---------------------------------------------------------------------

def find_induced_star(graph, s: int):
    """A centre with ``s`` pairwise non-adjacent neighbours, or None.

    Returns ``(centre, leaves)``.
    """
    if s < 2:
        raise ValueError("s must be at least 2")
    adj = adjacency_sets(graph)
    for v in range(len(adj)):
        nb = sorted(adj[v])
        if len(nb) < s:
            continue
        found = _independent_set(adj, nb, s)
        if found is not None:
            return v, tuple(found)
    return None


def _independent_set(adj, cand: list[int], s: int):
    def extend(chosen, rest):
        if len(chosen) == s:
            return chosen
        if len(chosen) + len(rest) < s:
            return None
        for i, u in enumerate(rest):
            if len(chosen) + len(rest) - i < s:
                break
            nxt = [w for w in rest[i + 1:] if w not in adj[u]]
            got = extend(chosen + [u], nxt)
            if got is not None:
                return got
        return None

    return extend([], cand)


def find_hole(adj: list[set[int]]):
    """A chordless cycle of length >= 4 as a vertex sequence, or None."""
    for v in range(len(adj)):
        nb = sorted(adj[v])
        for a, b in itertools.combinations(nb, 2):
            if b in adj[a]:
                continue
            blocked = (adj[v] | {v}) - {a, b}
            path = _shortest_path(adj, a, b, blocked)
            if path is not None:
                return [v] + path
    return None


def _shortest_path(adj, a, b, blocked):
    parent = {a: None}
    queue = deque([a])
    while queue:
        x = queue.popleft()
        if x == b:
            path = []
            while x is not None:
                path.append(x)
                x = parent[x]
            return path[::-1]
        for y in adj[x]:
            if y not in parent and y not in blocked:
                parent[y] = x
                queue.append(y)
    return None


def find_induced_pattern(adj: list[set[int]], pattern) -> list[int] | None:
    """Images of pattern vertices 0..k-1 under an induced embedding, or None."""
    k = 1 + max(max(e) for e in pattern)
    padj = [set() for _ in range(k)]
    for u, v in pattern:
        padj[u].add(v)
        padj[v].add(u)
    # each later pattern vertex has an earlier neighbour in 0..k-1 order
    image: list[int] = []

    def ok(i, x):
        if x in image:
            return False
        for j, y in enumerate(image):
            if (j in padj[i]) != (y in adj[x]):
                return False
        return len(adj[x]) >= len(padj[i])

    def extend(i):
        if i == k:
            return True
        if i == 0:
            cands = range(len(adj))
        else:
            j = min(padj[i] & set(range(i)))
            cands = sorted(adj[image[j]])
        for x in cands:
            if ok(i, x):
                image.append(x)
                if extend(i + 1):
                    return True
                image.pop()
        return False

    return list(image) if extend(0) else None


def certify(adj: list[set[int]], witness: Witness) -> bool:
    """Independent re-check that the witness is an induced copy of its type."""
    vs = list(witness.vertices)
    if len(set(vs)) != len(vs):
        return False
    if witness.type == "hole":
        k = len(vs)
        if k < 4:
            return False
        for i, j in itertools.combinations(range(k), 2):
            cyclic = (j - i) in (1, k - 1)
            if (vs[j] in adj[vs[i]]) != cyclic:
                return False
        return True
    pattern = PATTERNS.get(witness.type)
    if pattern is None:
        return False
    want = sorted(sorted(e) for e in pattern)
    n = len(vs)
    for perm in itertools.permutations(range(n)):
        got = sorted(sorted((perm[i], perm[j])) for i, j in itertools.combinations(range(n), 2)
                     if vs[j] in adj[vs[i]])
        if got == want:
            return True
    return False


def find_witness(adj: list[set[int]]) -> Witness | None:
    star = find_induced_star(adj, 3)
    if star is not None:
        return Witness("claw", (star[0],) + star[1])
    hole = find_hole(adj)
    if hole is not None:
        return Witness("hole", tuple(hole))
    for name in ("net", "3-sun"):
        img = find_induced_pattern(adj, PATTERNS[name])
        if img is not None:
            return Witness(name, tuple(img))
    return None


def is_unit_interval(graph) -> RecognitionResult:
    adj = adjacency_sets(graph)
    order = unit_interval_ordering(adj)
    if order is not None:
        return RecognitionResult(True, None, tuple(order))
    w = find_witness(adj)
    if w is None or not certify(adj, w):
        raise AssertionError("rejected graph without a certified forbidden subgraph")
    return RecognitionResult(False, w)


def unit_interval_bruteforce(graph, max_n: int = 9) -> bool:
    """Search over vertex orderings for one with contiguous closed neighbourhoods.

    Components are ordered independently.  Prefixes grow one vertex at a time:
    appending w is legal iff everything from w's first placed neighbour
    onwards is a clique of neighbours of w.
    """
    adj = adjacency_sets(graph)
    n = len(adj)
    if n > max_n:
        raise TooLarge(f"{n} vertices exceed the brute-force limit {max_n}")

    def orderable(comp):
        order: list[int] = []
        placed: set[int] = set()

        def extend():
            if len(order) == len(comp):
                return is_umbrella_free(adj, order)
            for w in comp:
                if w in placed:
                    continue
                first = next((i for i, u in enumerate(order) if u in adj[w]), len(order))
                tail = order[first:]
                if order and not tail:
                    continue  # a connected prefix can always be extended by a neighbour
                if any(x not in adj[w] for x in tail):
                    continue
                if any(y not in adj[x] for x, y in itertools.combinations(tail, 2)):
                    continue
                order.append(w)
                placed.add(w)
                if extend():
                    return True
                order.pop()
                placed.remove(w)
            return False

        return extend()

    return all(orderable(c) for c in components_of(adj))


def wraps_circle(points, r: float) -> bool:
    """Whether points on the unit circle leave no gap longer than 2r."""
    x = np.sort(np.mod(np.asarray(points, dtype=float).ravel(), 1.0))
    if len(x) < 2:
        return False
    gaps = np.diff(np.concatenate([x, [x[0] + 1.0]]))
    return bool(gaps.max() <= 2.0 * r)
