"""Laminar demand families: validation, the demand tree, preprocessing and chain decomposition."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Iterable, Sequence

from .model import PacketUniverse, RandInstance, Terminal, ValidationError


@dataclass(frozen=True)
class LaminarReport:
    ok: bool
    pair: tuple[frozenset, frozenset] | None = None

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "laminar"
        a, b = self.pair
        return f"{sorted(a)} and {sorted(b)} cross"


def validate_laminar(demands: Iterable[Iterable]) -> LaminarReport:
    """Check that every pair of sets is disjoint or nested."""
    sets = sorted({frozenset(d) for d in demands}, key=lambda s: (len(s), sorted(map(str, s))))
    for i, a in enumerate(sets):
        for b in sets[i + 1:]:
            # len(a) <= len(b), so nesting can only go one way
            if a & b and not a <= b:
                return LaminarReport(False, (a, b))
    return LaminarReport(True)


@dataclass
class DemandTree:
    """Containment tree over the distinct demand sets, rooted at the whole universe.

    Node ids are list indices; node 0 is the root.  ``terminals[i]`` lists the
    terminal ids whose demand equals ``sets[i]``.
    """

    universe: PacketUniverse
    sets: list[frozenset[str]]
    parent: list[int]
    terminals: list[tuple[str, ...]]
    packet_classes: tuple[tuple[str, ...], ...] = ()

    def __post_init__(self):
        self.children: list[list[int]] = [[] for _ in self.sets]
        for i, p in enumerate(self.parent):
            if p >= 0:
                self.children[p].append(i)
        for c in self.children:
            c.sort()
        self.weights = [self.universe.w(s) for s in self.sets]

    @property
    def size(self) -> int:
        """Number of nodes, the quantity P in the logarithmic bound."""
        return len(self.sets)

    def preorder(self) -> list[int]:
        out, stack = [], [0]
        while stack:
            v = stack.pop()
            out.append(v)
            stack.extend(reversed(self.children[v]))
        return out

    def depth(self) -> int:
        d = [0] * self.size
        for v in self.preorder():
            if self.parent[v] >= 0:
                d[v] = d[self.parent[v]] + 1
        return max(d)

    def subtree_sizes(self) -> list[int]:
        sizes = [1] * self.size
        for v in reversed(self.preorder()):
            if self.parent[v] >= 0:
                sizes[self.parent[v]] += sizes[v]
        return sizes

    def node_of(self) -> dict[str, int]:
        return {t: i for i, ts in enumerate(self.terminals) for t in ts}

    def halving_violations(self) -> list[tuple[int, int]]:
        """(parent, child) pairs where the parent weighs less than twice the child."""
        return [
            (p, i) for i, p in enumerate(self.parent)
            if p >= 0 and self.weights[p] < 2 * self.weights[i]
        ]


def packet_classes(universe: PacketUniverse, terminals: Sequence[Terminal]) -> tuple[tuple[str, ...], ...]:
    """Group packets demanded by exactly the same terminals, in universe order."""
    who: dict[str, list[str]] = {p: [] for p, _ in universe.packets}
    for t in terminals:
        for p in t.demand:
            who[p].append(t.id)
    groups: dict[frozenset, list[str]] = {}
    for p, _ in universe.packets:
        groups.setdefault(frozenset(who[p]), []).append(p)
    return tuple(tuple(g) for g in groups.values())


def canonicalize(inst):
    """Merge packets that are demanded by identical terminal sets into one heavier packet.

    Works for both instance kinds; the merged packet id joins the member ids with ``+``.
    """
    classes = packet_classes(inst.universe, inst.terminals)
    rename = {}
    packets = []
    for group in classes:
        pid = "+".join(group)
        packets.append((pid, inst.universe.w(group)))
        for p in group:
            rename[p] = pid
    terms = tuple(Terminal(t.id, t.location, frozenset(rename[p] for p in t.demand)) for t in inst.terminals)
    return dataclasses.replace(inst, universe=PacketUniverse(tuple(packets)), terminals=terms)


def build_tree(inst) -> DemandTree:
    """Build the demand tree of a (RAND or RAFL) instance."""
    report = validate_laminar(t.demand for t in inst.terminals)
    if not report.ok:
        raise ValidationError(f"demand family is not laminar: {report}")
    universe = inst.universe
    root = universe.ids
    order = universe.order()
    distinct = {t.demand for t in inst.terminals} - {root}
    others = sorted(distinct, key=lambda s: (-len(s), sorted(order[p] for p in s)))
    sets = [root] + others
    parent = [-1]
    for i, x in enumerate(sets[1:], start=1):
        # supersets of x form a chain; the parent is the smallest of them
        best = 0
        for j in range(1, len(sets)):
            if j != i and x < sets[j] and len(sets[j]) < len(sets[best]):
                best = j
        parent.append(best)
    index = {s: i for i, s in enumerate(sets)}
    terms: list[list[str]] = [[] for _ in sets]
    for t in inst.terminals:
        terms[index[t.demand]].append(t.id)
    return DemandTree(universe, sets, parent, [tuple(ts) for ts in terms],
                      packet_classes(universe, inst.terminals))


def preprocess_tree(tree: DemandTree) -> tuple[DemandTree, dict[str, frozenset[str]]]:
    """Weight-rule merging over a preorder DFS.

    A node weighing more than half its current parent is merged into the parent:
    its terminals move up and its children are reattached.  Returns the new
    tree and the new demand of every terminal that moved.
    """
    parent = list(tree.parent)
    children = [list(c) for c in tree.children]
    terms = [list(ts) for ts in tree.terminals]
    alive = [True] * tree.size
    new_demand: dict[str, frozenset[str]] = {}
    stack = [0]
    while stack:
        x = stack.pop()
        y = parent[x]
        if y >= 0 and 2 * tree.weights[x] > tree.weights[y]:
            for t in terms[x]:
                new_demand[t] = tree.sets[y]
            terms[y].extend(terms[x])
            terms[x] = []
            alive[x] = False
            children[y].remove(x)
            for c in children[x]:
                parent[c] = y
            children[y].extend(children[x])
            children[y].sort()
        stack.extend(reversed(children[x]))
        if not alive[x]:
            children[x] = []
    keep = [i for i in range(tree.size) if alive[i]]
    renum = {old: new for new, old in enumerate(keep)}
    new_tree = DemandTree(
        tree.universe,
        [tree.sets[i] for i in keep],
        [-1 if parent[i] < 0 else renum[parent[i]] for i in keep],
        [tuple(terms[i]) for i in keep],
        tree.packet_classes,
    )
    return new_tree, new_demand


def preprocess(inst: RandInstance) -> RandInstance:
    """Enlarge demands so that every parent in the demand tree weighs at least twice each child.

    Any routing feasible for the result is feasible for ``inst`` (the graph and
    terminals are untouched); each terminal's demand at most doubles in weight.
    """
    _, new_demand = preprocess_tree(build_tree(inst))
    if not new_demand:
        return inst
    return inst.with_demands(new_demand)


@dataclass(frozen=True)
class ChainCollection:
    """Chains of tree node ids; each chain runs from a node down through heavy children."""

    chains: tuple[tuple[int, ...], ...]

    def nodes(self) -> list[int]:
        return [v for c in self.chains for v in c]


def decompose_chains(tree: DemandTree) -> list[ChainCollection]:
    """Heavy-path decomposition of the demand tree.

    Collection ``j`` holds the chains found at recursion depth ``j``; subtree
    size is the node count and ties go to the smallest node id.
    """
    sizes = tree.subtree_sizes()
    levels: list[list[tuple[int, ...]]] = []
    pending = [(0, 0)]
    while pending:
        start, depth = pending.pop(0)
        chain = [start]
        while tree.children[chain[-1]]:
            kids = tree.children[chain[-1]]
            chain.append(max(kids, key=lambda c: (sizes[c], -c)))
        if len(levels) <= depth:
            levels.append([])
        levels[depth].append(tuple(chain))
        on_chain = set(chain)
        for v in chain:
            for c in tree.children[v]:
                if c not in on_chain:
                    pending.append((c, depth + 1))
    return [ChainCollection(tuple(cs)) for cs in levels]


def chain_violations(tree: DemandTree, collections: Sequence[ChainCollection]) -> list[str]:
    """Everything wrong with a decomposition, as human-readable strings (empty when valid)."""
    problems = []
    seen: dict[int, int] = {}
    for ci, coll in enumerate(collections):
        unions = []
        for chain in coll.chains:
            for a, b in zip(chain, chain[1:]):
                if tree.parent[b] != a:
                    problems.append(f"chain {chain}: {b} is not a child of {a}")
                if tree.weights[a] < 2 * tree.weights[b]:
                    problems.append(f"chain {chain}: weight does not halve from {a} to {b}")
            for v in chain:
                if v in seen:
                    problems.append(f"node {v} appears twice")
                seen[v] = ci
            unions.append(frozenset().union(*(tree.sets[v] for v in chain)))
        for i in range(len(unions)):
            for j in range(i + 1, len(unions)):
                if unions[i] & unions[j]:
                    problems.append(f"collection {ci}: chains {i} and {j} share packets")
    missing = set(range(tree.size)) - set(seen)
    if missing:
        problems.append(f"nodes {sorted(missing)} not covered")
    return problems
