"""Exhaustive solvers for tiny instances; ground truth for every ratio check."""
from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from fractions import Fraction
from math import prod

from .model import (
    Assignment,
    RaflInstance,
    RandInstance,
    RandSolution,
    edge_key,
    eval_rafl_cost,
    eval_rand_cost,
)

CAP_ENV = "RAND_RAFL_ORACLE_CAP"
DEFAULT_CAP = 10**7


class OracleCapError(ValueError):
    pass


def default_cap() -> int:
    return int(os.environ.get(CAP_ENV, DEFAULT_CAP))


@dataclass
class OracleResult:
    cost: Fraction
    solution: RandSolution | Assignment
    explored: int


def oracle_rafl(inst: RaflInstance, cap: int | None = None) -> OracleResult:
    """Try every terminal-to-facility assignment."""
    cap = default_cap() if cap is None else cap
    space = len(inst.facilities) ** len(inst.terminals)
    if space > cap:
        raise OracleCapError(f"{space} assignments exceed the oracle cap {cap}")
    tids = [t.id for t in inst.terminals]
    fids = [f.id for f in inst.facilities]
    best = None
    for choice in itertools.product(fids, repeat=len(tids)):
        a = Assignment(dict(zip(tids, choice)))
        fc, rc = eval_rafl_cost(a, inst)
        if best is None or fc + rc < best[0]:
            best = (fc + rc, a)
    return OracleResult(best[0], best[1], space)


def simple_paths(inst: RandInstance, start: int, cap: int) -> list[tuple[int, ...]]:
    """All simple paths from ``start`` to the source, shortest first."""
    g, s = inst.graph, inst.source
    out = []
    path = [start]
    on_path = {start}

    def walk(u):
        if u == s:
            out.append(tuple(path))
            if len(out) > cap:
                raise OracleCapError(f"more than {cap} simple paths from node {start}")
            return
        for v, _ in g.neighbors(u):
            if v not in on_path:
                path.append(v)
                on_path.add(v)
                walk(v)
                on_path.discard(v)
                path.pop()

    walk(start)
    out.sort(key=lambda p: (g.path_cost(p), p))
    return out


def oracle_rand(inst: RandInstance, cap: int | None = None) -> OracleResult:
    """Minimum over all combinations of one simple path per terminal.

    Depth-first over terminals with incremental per-edge packet counts; a
    partial assignment is abandoned once its cost reaches the best complete
    one, which is sound because cost never drops when a terminal is added.
    """
    cap = default_cap() if cap is None else cap
    g, u = inst.graph, inst.universe
    terms = inst.terminals
    options = [simple_paths(inst, t.location, cap) for t in terms]
    space = prod(len(o) for o in options)
    if space > cap:
        raise OracleCapError(f"{space} path combinations exceed the oracle cap {cap}")
    opt_edges = [[[edge_key(a, b) for a, b in zip(p, p[1:])] for p in opts] for opts in options]
    count: dict[tuple[int, int], dict[str, int]] = {}
    chosen: list[int] = [0] * len(terms)
    best: list = [None, None]

    def add(edges, demand, sign) -> Fraction:
        delta = Fraction(0)
        for e in edges:
            cnt = count.setdefault(e, {})
            changed = 0
            for p in demand:
                before = cnt.get(p, 0)
                cnt[p] = before + sign
                if (sign > 0 and before == 0) or (sign < 0 and before == 1):
                    changed += u.weight(p)
            if changed:
                delta += sign * g.cost(*e) * changed
        return delta

    def search(i, cost):
        if best[0] is not None and cost >= best[0]:
            return
        if i == len(terms):
            best[0], best[1] = cost, list(chosen)
            return
        for k, edges in enumerate(opt_edges[i]):
            delta = add(edges, terms[i].demand, 1)
            chosen[i] = k
            search(i + 1, cost + delta)
            add(edges, terms[i].demand, -1)

    search(0, Fraction(0))
    sol = RandSolution({t.id: options[i][best[1][i]] for i, t in enumerate(terms)})
    cost = eval_rand_cost(sol, inst)
    assert cost == best[0]
    return OracleResult(cost, sol, space)
