"""Seeded random instances with laminar demands built by recursive packet splitting."""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .model import Facility, PacketUniverse, RaflInstance, RandInstance, Terminal, WeightedGraph


@dataclass(frozen=True)
class GeneratorConfig:
    problem: str = "rand"
    seed: int = 0
    nodes: int = 8
    density: float = 0.2
    terminals: int = 4
    packets: int = 4
    branching: int = 2
    weight_range: tuple[int, int] = (1, 4)
    cost_range: tuple[int, int] = (1, 10)
    facilities: int = 3
    lambda_range: tuple[int, int] = (1, 4)
    demand_sets: int | None = None  # distinct demand sets to draw from the family

    def __post_init__(self):
        if self.problem not in ("rand", "rafl"):
            raise ValueError(f"unknown problem {self.problem!r}")
        for name in ("nodes", "terminals", "packets", "branching", "facilities"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not 0 <= self.density <= 1:
            raise ValueError("density must lie in [0, 1]")
        for name in ("weight_range", "cost_range", "lambda_range"):
            lo, hi = getattr(self, name)
            if lo > hi or lo < (0 if name == "cost_range" else 1):
                raise ValueError(f"bad {name} {lo}..{hi}")
        if self.demand_sets is not None and self.demand_sets < 1:
            raise ValueError("demand_sets must be positive")


def laminar_family(rng: random.Random, packets: list[str], branching: int) -> list[frozenset[str]]:
    """All sets produced by recursively splitting ``packets``; the first entry is the whole list.

    Each node keeps some packets to itself and splits the rest into at most
    ``branching`` nonempty chunks, every child strictly smaller than its parent.
    """
    out = []
    stack = [list(packets)]
    while stack:
        pk = stack.pop()
        out.append(frozenset(pk))
        if len(pk) <= 1:
            continue
        pk = pk[:]
        rng.shuffle(pk)
        keep = rng.randint(0, (len(pk) - 1) // 3)
        rest = pk[keep:]
        k = rng.randint(1, min(branching, len(rest)))
        if k == 1 and keep == 0:
            keep, rest = 1, pk[1:]
        cuts = sorted(rng.sample(range(1, len(rest)), k - 1)) if k > 1 else []
        bounds = [0] + cuts + [len(rest)]
        for a, b in zip(bounds, bounds[1:]):
            stack.append(rest[a:b])
    return out


def random_graph(rng: random.Random, n: int, density: float, cost_range, source=None) -> WeightedGraph:
    """Random spanning tree plus ``density`` of the remaining node pairs as extra edges."""
    lo, hi = cost_range
    edges = {}
    for v in range(1, n):
        u = rng.randrange(v)
        edges[u, v] = rng.randint(lo, hi)
    spare = n * (n - 1) // 2 - (n - 1)
    target = round(density * spare)
    if target > spare // 2:
        pairs = [(u, v) for u in range(n) for v in range(u + 1, n) if (u, v) not in edges]
        for u, v in rng.sample(pairs, target):
            edges[u, v] = rng.randint(lo, hi)
    else:
        added = 0
        while added < target:
            u, v = sorted(rng.sample(range(n), 2))
            if (u, v) not in edges:
                edges[u, v] = rng.randint(lo, hi)
                added += 1
    return WeightedGraph(n, tuple((u, v, Fraction(c)) for (u, v), c in sorted(edges.items())), source)


def _demands(rng: random.Random, cfg: GeneratorConfig, ids: list[str]) -> list[frozenset[str]]:
    family = laminar_family(rng, ids, cfg.branching)
    family = sorted(set(family), key=lambda s: (-len(s), sorted(s)))
    if cfg.demand_sets is None:
        return [rng.choice(family) for _ in range(cfg.terminals)]
    chosen = rng.sample(family, min(cfg.demand_sets, len(family), cfg.terminals))
    out = list(chosen) + [rng.choice(chosen) for _ in range(cfg.terminals - len(chosen))]
    rng.shuffle(out)
    return out


def generate(cfg: GeneratorConfig) -> RandInstance | RaflInstance:
    """Deterministic in ``cfg`` (including the seed)."""
    rng = random.Random(cfg.seed)
    ids = [f"p{i}" for i in range(cfg.packets)]
    universe = PacketUniverse(tuple((p, rng.randint(*cfg.weight_range)) for p in ids))
    demands = _demands(rng, cfg, ids)
    n = cfg.nodes
    if cfg.problem == "rand":
        graph = random_graph(rng, n, cfg.density, cfg.cost_range, source=0)
        locs = [rng.randrange(1, n) if n > 1 else 0 for _ in demands]
        terms = tuple(Terminal(f"t{i}", loc, d) for i, (loc, d) in enumerate(zip(locs, demands)))
        return RandInstance(graph, universe, terms)
    graph = random_graph(rng, n, cfg.density, cfg.cost_range)
    terms = tuple(Terminal(f"t{i}", rng.randrange(n), d) for i, d in enumerate(demands))
    lo, hi = cfg.lambda_range
    facs = tuple(
        Facility(f"f{i}", rng.randrange(n), Fraction(rng.randint(4 * lo, 4 * hi), 4))
        for i in range(cfg.facilities)
    )
    return RaflInstance(graph, universe, terms, facs)
