"""Logarithmic approximation for RAND: per-node Steiner trees and the Prim-style variant."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .laminar import DemandTree, build_tree, decompose_chains, preprocess
from .model import (
    RandInstance,
    RandSolution,
    ValidationError,
    eval_rand_cost,
    trace_path,
)
from .steiner import SteinerTree, approx_steiner, exact_steiner

VARIANTS = ("steiner", "prim")
STEINER_METHODS = {"mst": 2, "exact": 1}


class NotPreprocessedError(ValidationError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    variant: str = "steiner"
    steiner: str = "mst"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; pick one of {VARIANTS}")
        if self.steiner not in STEINER_METHODS:
            raise ValueError(f"unknown Steiner method {self.steiner!r}; pick one of {sorted(STEINER_METHODS)}")

    @property
    def alpha(self) -> int:
        """Approximation factor of the configured Steiner subroutine."""
        return STEINER_METHODS[self.steiner]


def log_factor(p: int) -> int:
    """floor(log2 p) + 1, the bound on the number of chain collections."""
    return p.bit_length()


@dataclass
class TerminalRelations:
    """Strict-superset ancestors and equal-demand peers of each terminal (peers include the terminal)."""

    anc: dict[str, frozenset[str]]
    peer: dict[str, frozenset[str]]

    @classmethod
    def of(cls, inst: RandInstance) -> "TerminalRelations":
        groups: dict[frozenset, list[str]] = {}
        for t in inst.terminals:
            groups.setdefault(t.demand, []).append(t.id)
        anc, peer = {}, {}
        for d, ids in groups.items():
            above = frozenset(u for other, us in groups.items() if d < other for u in us)
            for tid in ids:
                anc[tid] = above
                peer[tid] = frozenset(ids)
        return cls(anc, peer)


def _check_preprocessed(tree: DemandTree):
    bad = tree.halving_violations()
    if bad:
        p, c = bad[0]
        raise NotPreprocessedError(
            f"demand tree node {sorted(tree.sets[c])} weighs more than half its parent; run preprocess first"
        )


def _steiner_fn(method: str) -> Callable[..., SteinerTree]:
    return approx_steiner if method == "mst" else exact_steiner


def steiner_forest(inst: RandInstance, steiner: str = "mst") -> tuple[DemandTree, dict[int, SteinerTree]]:
    """One Steiner tree over ``T_X + source`` for every nonempty demand tree node X."""
    tree = build_tree(inst)
    _check_preprocessed(tree)
    build = _steiner_fn(steiner)
    loc = {t.id: t.location for t in inst.terminals}
    s = inst.source
    forest = {}
    for x in tree.preorder():
        if not tree.terminals[x]:
            continue
        required = {loc[t] for t in tree.terminals[x]} | {s}
        forest[x] = build(inst.graph, required)
    return tree, forest


def solve_rand(inst: RandInstance, steiner: str = "mst") -> RandSolution:
    """Route every terminal along its tree path in the Steiner tree of its demand node.

    ``inst`` must already satisfy the halving property (see ``preprocess``).
    """
    tree, forest = steiner_forest(inst, steiner)
    return _route(inst, tree, forest)


def _route(inst: RandInstance, tree: DemandTree, forest: dict[int, SteinerTree]) -> RandSolution:
    loc = {t.id: t.location for t in inst.terminals}
    paths = {}
    for x, st in forest.items():
        par = st.parents(inst.source)
        for tid in tree.terminals[x]:
            paths[tid] = st.path_to_root(loc[tid], inst.source, par)
    return RandSolution({t.id: paths[t.id] for t in inst.terminals})


def loop_erase(nodes) -> tuple[int, ...]:
    """Drop cycles from a walk, keeping its endpoints."""
    out: list[int] = []
    pos: dict[int, int] = {}
    for v in nodes:
        if v in pos:
            k = pos[v]
            for x in out[k + 1:]:
                del pos[x]
            del out[k + 1:]
        else:
            pos[v] = len(out)
            out.append(v)
    return tuple(out)


def solve_rand_prim(inst: RandInstance, trace: list | None = None) -> RandSolution:
    """Prim-style growth of the connected terminal set.

    A terminal becomes eligible once all of its ancestors are connected.  Each
    step connects the eligible terminal closest to a connected ancestor, peer
    or the source, along a shortest path to that member; its route continues
    along the member's route.  When ``trace`` is a list, ``(terminal,
    attached_to)`` pairs are appended in connection order (None means the
    source).
    """
    _check_preprocessed(build_tree(inst))
    g, s = inst.graph, inst.source
    terms = inst.terminals
    rank = {t.id: i for i, t in enumerate(terms)}
    loc = {t.id: t.location for t in terms}
    rel = TerminalRelations.of(inst)

    # dependents[u]: terminals that may attach to u
    dependents: dict[str, list[str]] = {t.id: [] for t in terms}
    waiting = {}
    for t in terms:
        waiting[t.id] = len(rel.anc[t.id])
        for u in rel.anc[t.id] | rel.peer[t.id]:
            if u != t.id:
                dependents[u].append(t.id)

    sp_cache: dict[int, tuple[list, list]] = {}

    def sp(node):
        if node not in sp_cache:
            sp_cache[node] = g.dijkstra_scaled(node)
        return sp_cache[node]

    src_dist, _ = sp(s)
    # best[t] = (scaled distance, attach rank, attach id); the source ranks first
    best = {t.id: (src_dist[t.location], -1, None) for t in terms}
    connected: set[str] = set()
    eligible = {t.id for t in terms if waiting[t.id] == 0}
    paths: dict[str, tuple[int, ...]] = {}
    while eligible:
        tid = min(eligible, key=lambda x: (best[x][0], rank[x]))
        eligible.discard(tid)
        _, _, target = best[tid]
        if target is None:
            path = tuple(trace_path(sp(s)[1], loc[tid]))
        else:
            seg = trace_path(sp(loc[target])[1], loc[tid])
            path = loop_erase(seg + list(paths[target][1:]))
        paths[tid] = path
        connected.add(tid)
        if trace is not None:
            trace.append((tid, target))
        dist, _ = sp(loc[tid])
        for d in dependents[tid]:
            if d in connected:
                continue
            cand = (dist[loc[d]], rank[tid], tid)
            if cand[:2] < best[d][:2]:
                best[d] = cand
            if tid in rel.anc[d]:
                waiting[d] -= 1
                if waiting[d] == 0:
                    eligible.add(d)
    if len(paths) != len(terms):
        raise RuntimeError("Prim variant stalled before connecting every terminal")
    return RandSolution({t.id: paths[t.id] for t in terms})


@dataclass
class RandStats:
    P: int
    P_preprocessed: int
    depth: int
    collections: int
    bound: int
    cost_preprocessed: Fraction
    collection_costs: list[Fraction] = field(default_factory=list)


def approximation_bound(p: int, config: SolverConfig) -> int:
    """Guaranteed ratio (checked, or in the Prim case claimed) on the raw instance."""
    if config.variant == "prim":
        return 8 * log_factor(p)
    return 4 * config.alpha * log_factor(p)


def solve_rand_end_to_end(raw: RandInstance, config: SolverConfig = SolverConfig()):
    """Preprocess, solve, and cost the routing on the original demands.

    Returns ``(solution, cost, stats)``.
    """
    pre = preprocess(raw)
    tree = build_tree(pre)
    collection_costs = []
    if config.variant == "prim":
        sol = solve_rand_prim(pre)
    else:
        tree, forest = steiner_forest(pre, config.steiner)
        sol = _route(pre, tree, forest)
        for coll in decompose_chains(tree):
            collection_costs.append(sum(
                (tree.weights[x] * forest[x].cost for x in coll.nodes() if x in forest), Fraction(0)
            ))
    p = build_tree(raw).size
    stats = RandStats(
        P=p,
        P_preprocessed=tree.size,
        depth=tree.depth(),
        collections=len(decompose_chains(tree)),
        bound=approximation_bound(p, config),
        cost_preprocessed=eval_rand_cost(sol, pre),
        collection_costs=collection_costs,
    )
    return sol, eval_rand_cost(sol, raw), stats
