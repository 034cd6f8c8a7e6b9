"""Canonical labelling of small vertex-coloured graphs.

Individualisation-refinement search: colour refinement to an equitable
ordered partition, branching on the first non-singleton cell, keeping the
lexicographically smallest leaf code.  Automorphisms discovered at leaves
prune sibling branches (orbit pruning) and whole subtrees equivalent to the
first path.
"""
from __future__ import annotations


def refine(colors: list[int], adj: list[list[int]]) -> list[int]:
    """Coarsest equitable refinement; colours stay ordered by the input colours."""
    col = list(colors)
    ncol = len(set(col))
    while True:
        sig = [(col[v], tuple(sorted(col[u] for u in adj[v]))) for v in range(len(col))]
        rank = {s: i for i, s in enumerate(sorted(set(sig)))}
        new = [rank[s] for s in sig]
        if len(rank) == ncol:
            return new
        col, ncol = new, len(rank)


def _individualize(col: list[int], v: int) -> list[int]:
    c = col[v]
    return [2 * x + (1 if x == c and u != v else 0) for u, x in enumerate(col)]


def _target_cell(col: list[int]) -> list[int] | None:
    cells: dict[int, list[int]] = {}
    for v, c in enumerate(col):
        cells.setdefault(c, []).append(v)
    for c in sorted(cells):
        if len(cells[c]) > 1:
            return cells[c]
    return None


def _orbit_rep(x: int, parent: dict) -> int:
    while parent.get(x, x) != x:
        x = parent[x]
    return x


class _Search:
    def __init__(self, adj, colors):
        self.adj = adj
        self.colors = colors
        self.edges = [(u, v) for u in range(len(adj)) for v in adj[u] if u < v]
        self.first = None  # (code, pos, prefix)
        self.best = None  # (code, pos)
        self.gens: list[list[int]] = []

    def code(self, pos):
        e = sorted((min(pos[u], pos[v]), max(pos[u], pos[v])) for u, v in self.edges)
        return tuple(e)

    def automorphism(self, pos_a, pos_b) -> list[int]:
        inv_b = [0] * len(pos_b)
        for v, p in enumerate(pos_b):
            inv_b[p] = v
        return [inv_b[pos_a[v]] for v in range(len(pos_a))]

    def leaf(self, col, prefix):
        code = self.code(col)
        if self.first is None:
            self.first = (code, col, list(prefix))
            self.best = (code, col)
            return None
        if code == self.first[0]:
            self.gens.append(self.automorphism(self.first[1], col))
            fp = self.first[2]
            d = 0
            while d < len(fp) and d < len(prefix) and fp[d] == prefix[d]:
                d += 1
            return d
        if code == self.best[0]:
            self.gens.append(self.automorphism(self.best[1], col))
        elif code < self.best[0]:
            self.best = (code, col)
        return None

    def run(self, col, prefix):
        cell = _target_cell(col)
        if cell is None:
            return self.leaf(col, prefix)
        depth = len(prefix)
        explored: list[int] = []
        for w in cell:
            if explored and self._equivalent(w, explored, prefix):
                continue
            explored.append(w)
            res = self.run(refine(_individualize(col, w), self.adj), prefix + [w])
            if res is not None and res < depth:
                return res
        return None

    def _equivalent(self, w, explored, prefix) -> bool:
        parent: dict[int, int] = {}
        for g in self.gens:
            if any(g[p] != p for p in prefix):
                continue
            for x, y in enumerate(g):
                if x != y:
                    a, b = _orbit_rep(x, parent), _orbit_rep(y, parent)
                    if a != b:
                        parent[max(a, b)] = min(a, b)
        rw = _orbit_rep(w, parent)
        return any(_orbit_rep(e, parent) == rw for e in explored)


def canonical_order(adj: list[list[int]], colors: list[int] | None = None) -> list[int]:
    """Vertices listed in canonical position order.

    Two coloured graphs are isomorphic iff relabelling each by its canonical
    order yields identical edge sets and colour sequences.
    """
    n = len(adj)
    if n == 0:
        return []
    colors = list(colors) if colors is not None else [0] * n
    s = _Search(adj, colors)
    s.run(refine(colors, adj), [])
    pos = s.best[1]
    order = [0] * n
    for v, p in enumerate(pos):
        order[p] = v
    return order
