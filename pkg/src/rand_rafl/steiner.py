"""Steiner tree subroutines: the metric-closure MST 2-approximation and a capped exact solver."""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .model import DistanceTable, ValidationError, WeightedGraph, edge_key

DEFAULT_EXACT_CAP = 12


class SteinerCapError(ValueError):
    pass


@dataclass(frozen=True)
class SteinerTree:
    edges: frozenset[tuple[int, int]]
    cost: Fraction
    required: frozenset[int]

    @property
    def nodes(self) -> frozenset[int]:
        if not self.edges:
            return self.required
        return frozenset(v for e in self.edges for v in e)

    def is_tree(self) -> bool:
        if not self.edges:
            return len(self.required) <= 1
        nodes = self.nodes
        if len(self.edges) != len(nodes) - 1:
            return False
        return _connected(nodes, self.edges)

    def parents(self, root: int) -> dict[int, int]:
        """Parent pointers of the tree hung from ``root`` (root maps to itself)."""
        adj: dict[int, list[int]] = {}
        for u, v in sorted(self.edges):
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
        par = {root: root}
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v in adj.get(u, ()):
                if v not in par:
                    par[v] = u
                    queue.append(v)
        return par

    def path_to_root(self, node: int, root: int, parents: dict[int, int] | None = None) -> tuple[int, ...]:
        par = self.parents(root) if parents is None else parents
        if node not in par:
            raise ValidationError(f"node {node} is not in the Steiner tree")
        out = [node]
        while out[-1] != root:
            out.append(par[out[-1]])
        return tuple(out)


class _DSU:
    def __init__(self):
        self.up = {}

    def find(self, x):
        self.up.setdefault(x, x)
        while self.up[x] != x:
            self.up[x] = self.up[self.up[x]]
            x = self.up[x]
        return x

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.up[max(ra, rb)] = min(ra, rb)
        return True


def _connected(nodes, edges) -> bool:
    dsu = _DSU()
    for v in nodes:
        dsu.find(v)
    for u, v in edges:
        dsu.union(u, v)
    return len({dsu.find(v) for v in nodes}) <= 1


def kruskal(weighted_edges: Iterable[tuple[Fraction, int, int]]) -> list[tuple[Fraction, int, int]]:
    """Minimum spanning forest; ties broken by (cost, u, v) lexicographically."""
    dsu = _DSU()
    out = []
    for c, u, v in sorted(weighted_edges):
        if dsu.union(u, v):
            out.append((c, u, v))
    return out


def _prune(edges: set[tuple[int, int]], required: frozenset[int]) -> set[tuple[int, int]]:
    """Repeatedly strip leaves that are not required."""
    edges = set(edges)
    while True:
        deg: dict[int, int] = {}
        for u, v in edges:
            deg[u] = deg.get(u, 0) + 1
            deg[v] = deg.get(v, 0) + 1
        drop = {e for e in edges if any(deg[x] == 1 and x not in required for x in e)}
        if not drop:
            return edges
        edges -= drop


def _tree(g: WeightedGraph, edges, required) -> SteinerTree:
    edges = frozenset(edges)
    return SteinerTree(edges, sum((g.cost(*e) for e in edges), Fraction(0)), required)


def approx_steiner(g: WeightedGraph, required: Iterable[int], table: DistanceTable | None = None) -> SteinerTree:
    """Metric-closure MST heuristic; cost at most twice the optimal Steiner tree.

    MST over the shortest-path distances between required nodes, each closure
    edge expanded into a shortest path, the union re-spanned to remove cycles
    and non-required leaves pruned.
    """
    req = frozenset(required)
    nodes = sorted(req)
    if len(nodes) <= 1:
        return SteinerTree(frozenset(), Fraction(0), req)
    if table is None or not set(nodes) <= set(table.nodes):
        table = DistanceTable(g, nodes)
    closure = [(table(u, v), u, v) for u, v in itertools.combinations(nodes, 2)]
    union: set[tuple[int, int]] = set()
    for _, u, v in kruskal(closure):
        p = table.path(u, v)
        union.update(edge_key(a, b) for a, b in zip(p, p[1:]))
    spanning = kruskal((g.cost(*e), *e) for e in union)
    return _tree(g, _prune({(u, v) for _, u, v in spanning}, req), req)


def exact_steiner(g: WeightedGraph, required: Iterable[int], cap: int = DEFAULT_EXACT_CAP) -> SteinerTree:
    """Minimum Steiner tree by enumerating the optional node subsets.

    The optimum is the MST of the subgraph induced by its own node set, so it
    suffices to take the best spanning tree over every required-plus-subset
    induced subgraph.  Refuses graphs with more than ``cap`` nodes.
    """
    if g.n > cap:
        raise SteinerCapError(f"exact Steiner refuses a graph with {g.n} nodes (cap {cap})")
    req = frozenset(required)
    if len(req) <= 1:
        return SteinerTree(frozenset(), Fraction(0), req)
    optional = [v for v in range(g.n) if v not in req]
    all_edges = [(c, u, v) if u < v else (c, v, u) for u, v, c in g.edges]
    best = None
    for k in range(len(optional) + 1):
        for extra in itertools.combinations(optional, k):
            keep = req.union(extra)
            forest = kruskal(e for e in all_edges if e[1] in keep and e[2] in keep)
            if len(forest) != len(keep) - 1:
                continue
            cost = sum((c for c, _, _ in forest), Fraction(0))
            if best is None or cost < best[0]:
                best = (cost, {(u, v) for _, u, v in forest})
    if best is None:
        raise ValidationError(f"required nodes {sorted(req)} are not connected")
    return _tree(g, _prune(best[1], req), req)
