"""Small instance builders and independent brute-force checks shared by the tests."""
import itertools
from fractions import Fraction

import networkx as nx

from rand_rafl.model import Facility, PacketUniverse, RaflInstance, RandInstance, Terminal, WeightedGraph


def universe(**weights):
    return PacketUniverse(tuple((p, w) for p, w in weights.items()))


def graph(n, edges, source=None):
    return WeightedGraph(n, tuple((u, v, Fraction(c)) for u, v, c in edges), source)


def rand_instance(n, edges, weights, terminals, source=0):
    """terminals: list of (id, node, demand iterable)."""
    return RandInstance(
        graph(n, edges, source),
        universe(**weights),
        tuple(Terminal(t, loc, frozenset(d)) for t, loc, d in terminals),
    )


def rafl_instance(n, edges, weights, terminals, facilities):
    """facilities: list of (id, node, lambda)."""
    return RaflInstance(
        graph(n, edges),
        universe(**weights),
        tuple(Terminal(t, loc, frozenset(d)) for t, loc, d in terminals),
        tuple(Facility(f, loc, Fraction(lam)) for f, loc, lam in facilities),
    )


def to_nx(g):
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    for u, v, c in g.edges:
        h.add_edge(u, v, weight=c)
    return h


def brute_distance(g, u, v):
    """Shortest distance by enumerating every simple path."""
    if u == v:
        return Fraction(0)
    h = to_nx(g)
    best = None
    for p in nx.all_simple_paths(h, u, v):
        c = sum((h[a][b]["weight"] for a, b in zip(p, p[1:])), Fraction(0))
        best = c if best is None or c < best else best
    return best


def brute_steiner_cost(g, required):
    """Cheapest edge subset that connects all required nodes (no tree assumption)."""
    required = set(required)
    if len(required) <= 1:
        return Fraction(0)
    edges = list(g.edges)
    best = None
    for k in range(len(edges) + 1):
        for subset in itertools.combinations(edges, k):
            cost = sum((c for _, _, c in subset), Fraction(0))
            if best is not None and cost >= best:
                continue
            h = nx.Graph()
            h.add_nodes_from(required)
            h.add_edges_from((u, v) for u, v, _ in subset)
            comp = nx.node_connected_component(h, next(iter(required)))
            if required <= comp:
                best = cost
    return best
