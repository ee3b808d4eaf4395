"""Core instance types and exact cost evaluation for RAND and RAFL.

All costs, weights and opening multipliers are held as ``fractions.Fraction``
so that every bound checked downstream is an exact inequality.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence


class ValidationError(ValueError):
    """An instance or solution violates a structural requirement."""


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        # route through repr so 0.1 becomes 1/10, not the binary expansion
        return Fraction(repr(value))
    return Fraction(value)


@dataclass(frozen=True)
class PacketUniverse:
    """The packet set with integral weights."""

    packets: tuple[tuple[str, int], ...]

    def __post_init__(self):
        ids = [p for p, _ in self.packets]
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate packet ids")
        for p, w in self.packets:
            if not isinstance(w, int) or isinstance(w, bool) or w < 1:
                raise ValidationError(f"packet {p!r} must have a positive integer weight, got {w!r}")
        object.__setattr__(self, "_weights", dict(self.packets))

    @classmethod
    def from_weights(cls, weights: Mapping[str, int]) -> "PacketUniverse":
        return cls(tuple((p, int(w)) for p, w in weights.items()))

    @property
    def ids(self) -> frozenset[str]:
        return frozenset(self._weights)

    @property
    def size(self) -> int:
        return len(self.packets)

    def weight(self, packet: str) -> int:
        return self._weights[packet]

    def w(self, packet_set: Iterable[str]) -> int:
        """Total weight of a set of packets."""
        ws = self._weights
        return sum(ws[p] for p in packet_set)

    def __contains__(self, packet) -> bool:
        return packet in self._weights

    def order(self) -> dict[str, int]:
        return {p: i for i, (p, _) in enumerate(self.packets)}


def edge_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected graph on nodes ``0..n-1`` with nonnegative rational edge costs.

    Parallel edges are rejected, so a path is determined by its node sequence.
    """

    n: int
    edges: tuple[tuple[int, int, Fraction], ...]
    source: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("graph needs at least one node")
        costs: dict[tuple[int, int], Fraction] = {}
        adj: list[list[tuple[int, Fraction]]] = [[] for _ in range(self.n)]
        norm = []
        for u, v, c in self.edges:
            c = as_fraction(c)
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValidationError(f"edge ({u}, {v}) references a node outside 0..{self.n - 1}")
            if u == v:
                raise ValidationError(f"self-loop at node {u}")
            if c < 0:
                raise ValidationError(f"edge ({u}, {v}) has negative cost {c}")
            k = edge_key(u, v)
            if k in costs:
                raise ValidationError(f"parallel edge ({u}, {v})")
            costs[k] = c
            adj[u].append((v, c))
            adj[v].append((u, c))
            norm.append((u, v, c))
        if self.source is not None and not 0 <= self.source < self.n:
            raise ValidationError(f"source {self.source} outside 0..{self.n - 1}")
        for lst in adj:
            lst.sort(key=lambda item: item[0])
        object.__setattr__(self, "edges", tuple(norm))
        object.__setattr__(self, "_cost", costs)
        object.__setattr__(self, "_adj", adj)
        # integer-scaled copy used by the shortest path kernels
        scale = math.lcm(*(c.denominator for c in costs.values())) if costs else 1
        iadj = [[(v, int(c * scale)) for v, c in lst] for lst in adj]
        object.__setattr__(self, "scale", scale)
        object.__setattr__(self, "_iadj", iadj)

    def cost(self, u: int, v: int) -> Fraction:
        return self._cost[edge_key(u, v)]

    def has_edge(self, u: int, v: int) -> bool:
        return edge_key(u, v) in self._cost

    def neighbors(self, u: int) -> list[tuple[int, Fraction]]:
        return self._adj[u]

    def edge_costs(self) -> dict[tuple[int, int], Fraction]:
        return dict(self._cost)

    def scaled(self, factor: Fraction) -> "WeightedGraph":
        return WeightedGraph(self.n, tuple((u, v, c * factor) for u, v, c in self.edges), self.source)

    def path_cost(self, nodes: Sequence[int]) -> Fraction:
        return sum((self.cost(a, b) for a, b in zip(nodes, nodes[1:])), Fraction(0))

    def dijkstra(self, origin: int) -> tuple[list[Fraction | None], list[int]]:
        """Single-source shortest paths.

        Returns ``(dist, pred)``; ``dist[v]`` is None for unreachable nodes and
        ``pred[v]`` is -1 for the origin and unreachable nodes.  Ties keep the
        first predecessor found, which makes the tree deterministic.
        """
        idist, pred = self.dijkstra_scaled(origin)
        s = self.scale
        return [None if d is None else Fraction(d, s) for d in idist], pred

    def dijkstra_scaled(self, origin: int) -> tuple[list[int | None], list[int]]:
        """Dijkstra on integer costs ``cost * self.scale``; distances come back scaled."""
        n = self.n
        dist: list[int | None] = [None] * n
        pred = [-1] * n
        done = [False] * n
        dist[origin] = 0
        heap = [(0, origin)]
        iadj = self._iadj
        while heap:
            d, u = heapq.heappop(heap)
            if done[u]:
                continue
            done[u] = True
            for v, c in iadj[u]:
                nd = d + c
                dv = dist[v]
                if dv is None or nd < dv:
                    dist[v] = nd
                    pred[v] = u
                    heapq.heappush(heap, (nd, v))
        return dist, pred


def trace_path(pred: Sequence[int], target: int) -> list[int]:
    """Node sequence from ``target`` back to the origin of a predecessor tree."""
    out = [target]
    while pred[out[-1]] != -1:
        out.append(pred[out[-1]])
    return out


class DistanceTable:
    """Shortest path distances from a fixed set of origin nodes."""

    def __init__(self, graph: WeightedGraph, origins: Iterable[int]):
        self.graph = graph
        self._dist: dict[int, list[Fraction | None]] = {}
        self._pred: dict[int, list[int]] = {}
        for o in sorted(set(origins)):
            self._dist[o], self._pred[o] = graph.dijkstra(o)

    @property
    def nodes(self) -> list[int]:
        return sorted(self._dist)

    def __call__(self, u: int, v: int) -> Fraction:
        if u in self._dist:
            d = self._dist[u][v]
        elif v in self._dist:
            d = self._dist[v][u]
        else:
            raise KeyError(f"neither {u} nor {v} is an origin of this table")
        if d is None:
            raise ValidationError(f"nodes {u} and {v} are disconnected")
        return d

    def path(self, u: int, v: int) -> list[int]:
        """A shortest path from u to v as a node sequence."""
        if v in self._pred:
            if self._dist[v][u] is None:
                raise ValidationError(f"nodes {u} and {v} are disconnected")
            return trace_path(self._pred[v], u)
        return list(reversed(self.path(v, u)))


def shortest_path_metric(graph: WeightedGraph, nodes: Iterable[int] | None = None) -> dict[tuple[int, int], Fraction]:
    """All-pairs shortest path distances among ``nodes`` (default: all nodes).

    Raises ValidationError naming the first disconnected pair.
    """
    nodes = sorted(set(range(graph.n) if nodes is None else nodes))
    table = DistanceTable(graph, nodes)
    out = {}
    for u in nodes:
        for v in nodes:
            out[u, v] = table(u, v)
    return out


@dataclass(frozen=True)
class Terminal:
    id: str
    location: int
    demand: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "demand", frozenset(self.demand))
        if not self.demand:
            raise ValidationError(f"terminal {self.id!r} has an empty demand")


@dataclass(frozen=True)
class Facility:
    id: str
    location: int
    opening: Fraction

    def __post_init__(self):
        object.__setattr__(self, "opening", as_fraction(self.opening))
        if self.opening <= 0:
            raise ValidationError(f"facility {self.id!r} needs a positive opening multiplier")


def _check_terminals(terminals: Sequence[Terminal], universe: PacketUniverse, graph: WeightedGraph):
    seen = set()
    for t in terminals:
        if t.id in seen:
            raise ValidationError(f"duplicate terminal id {t.id!r}")
        seen.add(t.id)
        if not 0 <= t.location < graph.n:
            raise ValidationError(f"terminal {t.id!r} located at unknown node {t.location}")
        for p in sorted(t.demand):
            if p not in universe:
                raise ValidationError(f"terminal {t.id!r} demands unknown packet {p!r}")


def _check_laminar(terminals: Sequence[Terminal]):
    from .laminar import validate_laminar

    report = validate_laminar([t.demand for t in terminals])
    if not report.ok:
        raise ValidationError(f"demand family is not laminar: {report}")


@dataclass(frozen=True)
class RandInstance:
    graph: WeightedGraph
    universe: PacketUniverse
    terminals: tuple[Terminal, ...]

    def __post_init__(self):
        object.__setattr__(self, "terminals", tuple(self.terminals))
        if self.graph.source is None:
            raise ValidationError("RAND instance needs a source node")
        _check_terminals(self.terminals, self.universe, self.graph)
        _check_laminar(self.terminals)
        dist, _ = self.graph.dijkstra(self.graph.source)
        for t in self.terminals:
            if dist[t.location] is None:
                raise ValidationError(f"terminal {t.id!r} is disconnected from the source")

    @property
    def source(self) -> int:
        return self.graph.source

    def terminal(self, tid: str) -> Terminal:
        for t in self.terminals:
            if t.id == tid:
                return t
        raise KeyError(tid)

    def with_demands(self, demands: Mapping[str, frozenset[str]]) -> "RandInstance":
        terms = tuple(Terminal(t.id, t.location, demands.get(t.id, t.demand)) for t in self.terminals)
        return RandInstance(self.graph, self.universe, terms)


@dataclass(frozen=True)
class RaflInstance:
    graph: WeightedGraph
    universe: PacketUniverse
    terminals: tuple[Terminal, ...]
    facilities: tuple[Facility, ...]

    def __post_init__(self):
        object.__setattr__(self, "terminals", tuple(self.terminals))
        object.__setattr__(self, "facilities", tuple(self.facilities))
        if not self.facilities:
            raise ValidationError("RAFL instance needs at least one facility")
        _check_terminals(self.terminals, self.universe, self.graph)
        fids = set()
        for f in self.facilities:
            if f.id in fids:
                raise ValidationError(f"duplicate facility id {f.id!r}")
            fids.add(f.id)
            if not 0 <= f.location < self.graph.n:
                raise ValidationError(f"facility {f.id!r} located at unknown node {f.location}")
        _check_laminar(self.terminals)
        table = DistanceTable(self.graph, [f.location for f in self.facilities])
        for t in self.terminals:
            for f in self.facilities:
                try:
                    table(f.location, t.location)
                except ValidationError:
                    raise ValidationError(f"terminal {t.id!r} cannot reach facility {f.id!r}") from None
        object.__setattr__(self, "_table", table)

    def facility(self, fid: str) -> Facility:
        for f in self.facilities:
            if f.id == fid:
                return f
        raise ValidationError(f"unknown facility {fid!r}")

    def distance(self, t: Terminal, f: Facility) -> Fraction:
        return self._table(f.location, t.location)

    def normalized(self) -> tuple["RaflInstance", Fraction]:
        """Rescale so the cheapest opening multiplier is 1.

        Edge costs are divided by the same factor, so every solution's cost is
        divided by ``scale``; multiply by ``scale`` to get original units.
        """
        scale = min(f.opening for f in self.facilities)
        if scale == 1:
            return self, Fraction(1)
        facs = tuple(Facility(f.id, f.location, f.opening / scale) for f in self.facilities)
        return RaflInstance(self.graph.scaled(1 / scale), self.universe, self.terminals, facs), scale


@dataclass(frozen=True)
class RandSolution:
    """One path per terminal, each a node sequence from the terminal's location to the source."""

    paths: Mapping[str, tuple[int, ...]]

    def __post_init__(self):
        object.__setattr__(self, "paths", {k: tuple(v) for k, v in self.paths.items()})

    def edges(self, tid: str) -> list[tuple[int, int]]:
        p = self.paths[tid]
        return [edge_key(a, b) for a, b in zip(p, p[1:])]

    def validate(self, inst: RandInstance):
        for t in inst.terminals:
            if t.id not in self.paths:
                raise ValidationError(f"terminal {t.id!r} has no path")
            p = self.paths[t.id]
            if not p or p[0] != t.location or p[-1] != inst.source:
                raise ValidationError(f"path of terminal {t.id!r} must run from node {t.location} to the source {inst.source}")
            if len(set(p)) != len(p):
                raise ValidationError(f"path of terminal {t.id!r} is not simple")
            for a, b in zip(p, p[1:]):
                if not inst.graph.has_edge(a, b):
                    raise ValidationError(f"path of terminal {t.id!r} uses unknown edge ({a}, {b})")
        extra = set(self.paths) - {t.id for t in inst.terminals}
        if extra:
            raise ValidationError(f"paths given for unknown terminals {sorted(extra)}")


def edge_packets(sol: RandSolution, inst: RandInstance) -> dict[tuple[int, int], frozenset[str]]:
    """Packet set carried by each used edge."""
    carried: dict[tuple[int, int], set[str]] = {}
    for t in inst.terminals:
        for e in sol.edges(t.id):
            carried.setdefault(e, set()).update(t.demand)
    return {e: frozenset(s) for e, s in carried.items()}


def eval_rand_cost(sol: RandSolution, inst: RandInstance) -> Fraction:
    """Sum over edges of edge cost times the weight of the distinct packets carried."""
    sol.validate(inst)
    g, u = inst.graph, inst.universe
    return sum((g.cost(*e) * u.w(s) for e, s in edge_packets(sol, inst).items()), Fraction(0))


@dataclass(frozen=True)
class Assignment:
    mapping: Mapping[str, str]

    def __post_init__(self):
        object.__setattr__(self, "mapping", dict(self.mapping))

    def __getitem__(self, tid: str) -> str:
        return self.mapping[tid]

    def served_packets(self, inst: RaflInstance) -> dict[str, frozenset[str]]:
        out: dict[str, set[str]] = {}
        for t in inst.terminals:
            out.setdefault(self.mapping[t.id], set()).update(t.demand)
        return {f: frozenset(s) for f, s in out.items()}


def eval_rafl_cost(a: Assignment, inst: RaflInstance) -> tuple[Fraction, Fraction]:
    """Return ``(facility_cost, routing_cost)`` of an assignment."""
    for t in inst.terminals:
        if t.id not in a.mapping:
            raise ValidationError(f"terminal {t.id!r} is unassigned")
    facs = {f.id: f for f in inst.facilities}
    for tid, fid in a.mapping.items():
        if fid not in facs:
            raise ValidationError(f"terminal {tid!r} assigned to unknown facility {fid!r}")
    u = inst.universe
    facility_cost = sum(
        (facs[fid].opening * u.w(pk) for fid, pk in a.served_packets(inst).items()), Fraction(0)
    )
    routing_cost = sum(
        (u.w(t.demand) * inst.distance(t, facs[a.mapping[t.id]]) for t in inst.terminals), Fraction(0)
    )
    return facility_cost, routing_cost


def rafl_total(a: Assignment, inst: RaflInstance) -> Fraction:
    fc, rc = eval_rafl_cost(a, inst)
    return fc + rc
