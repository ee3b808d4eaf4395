"""LP rounding for RAFL: filtering, paying/free classification and facility opening.

Every quantity is exact, so the per-phase guarantees can be checked as exact
inequalities and are recorded in the returned certificate.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .lp import FractionalSolution, per_terminal_averages, solve_rafl_lp
from .model import Assignment, RaflInstance, eval_rafl_cost


@dataclass
class FilteredSolution:
    x: dict[tuple[str, str], Fraction]
    y: dict[tuple[str, str], Fraction]
    support: dict[str, tuple[str, ...]]  # facilities with positive x, in instance order
    routing_avg: dict[str, Fraction]  # under the filtered x
    facility_avg: dict[str, Fraction]
    routing_star: dict[str, Fraction]  # under the LP optimum
    facility_star: dict[str, Fraction]
    alpha: Fraction

    def facility_cost(self, inst: RaflInstance) -> Fraction:
        lam = {f.id: f.opening for f in inst.facilities}
        return sum((lam[f] * inst.universe.weight(p) * v for (f, p), v in self.y.items()), Fraction(0))


def filter_solution(star: FractionalSolution, inst: RaflInstance, alpha=3) -> FilteredSolution:
    """Drop assignments farther than alpha times the terminal's LP routing average, then renormalize."""
    alpha = Fraction(alpha)
    if alpha <= 1:
        raise ValueError("alpha must exceed 1")
    avgs = per_terminal_averages(star, inst)
    x: dict[tuple[str, str], Fraction] = {}
    support, cr, cf = {}, {}, {}
    for t in inst.terminals:
        cr_star = avgs[t.id][0]
        kept = {
            f.id: star.x[t.id, f.id]
            for f in inst.facilities
            if star.x[t.id, f.id] > 0 and inst.distance(t, f) <= alpha * cr_star
        }
        mass = sum(kept.values(), Fraction(0))
        if mass <= 0:
            raise RuntimeError(f"filtering emptied the support of terminal {t.id!r}")
        for f in inst.facilities:
            x[t.id, f.id] = kept.get(f.id, Fraction(0)) / mass
        support[t.id] = tuple(f.id for f in inst.facilities if x[t.id, f.id] > 0)
        cr[t.id] = sum((x[t.id, f.id] * inst.distance(t, f) for f in inst.facilities), Fraction(0))
        cf[t.id] = sum((x[t.id, f.id] * f.opening for f in inst.facilities), Fraction(0))
    y = {}
    for f in inst.facilities:
        for p, _ in inst.universe.packets:
            y[f.id, p] = max((x[t.id, f.id] for t in inst.terminals if p in t.demand), default=Fraction(0))
    return FilteredSolution(
        x, y, support, cr, cf,
        {t: a[0] for t, a in avgs.items()}, {t: a[1] for t, a in avgs.items()}, alpha,
    )


def covers(covering: Iterable, demand: frozenset, universe) -> bool:
    """True when the covering demands leave strictly less than half of ``demand`` (by weight) uncovered.

    ``covering`` is an iterable of packet sets.
    """
    union = frozenset().union(*covering)
    return 2 * universe.w(demand - union) < universe.w(demand)


@dataclass
class Opening:
    """One facility copy opened by a free terminal."""

    facility: str
    opener: str
    level: int
    fpay: tuple[str, ...]
    members: tuple[str, ...]  # free terminals assigned with this opening, opener first
    packets: frozenset[str]  # opener demand plus the demands of its cover


@dataclass
class ClassificationState:
    order: list[str]  # processing order of phase 2
    paying: list[str]
    free: list[str]
    temp: dict[str, str]  # free terminal -> facility whose paying set covered it
    cov: dict[str, tuple[str, ...]]
    pay: dict[str, list[str]]
    levels: dict[str, int] = field(default_factory=dict)
    openings: list[Opening] = field(default_factory=list)


def _rank(inst: RaflInstance):
    return {t.id: i for i, t in enumerate(inst.terminals)}, {f.id: i for i, f in enumerate(inst.facilities)}


def classify(fs: FilteredSolution, inst: RaflInstance) -> ClassificationState:
    """Process terminals by increasing LP routing average; a terminal is free when
    some facility in its support already has a covering set of payers."""
    trank, frank = _rank(inst)
    demand = {t.id: t.demand for t in inst.terminals}
    lam = {f.id: f.opening for f in inst.facilities}
    order = sorted(demand, key=lambda t: (fs.routing_star[t], trank[t]))
    pay: dict[str, list[str]] = {f.id: [] for f in inst.facilities}
    paying, free, temp, cov = [], [], {}, {}
    for t in order:
        hits = [
            f for f in fs.support[t]
            if covers((demand[j] for j in pay[f]), demand[t], inst.universe)
        ]
        if hits:
            f = min(hits, key=lambda h: (lam[h], frank[h]))
            free.append(t)
            temp[t] = f
            cov[t] = tuple(j for j in pay[f] if demand[j] & demand[t])
        else:
            paying.append(t)
            for f in fs.support[t]:
                pay[f].append(t)
    return ClassificationState(order, paying, free, temp, cov, pay)


def level_of(value: Fraction) -> int:
    """ceil(log2 value), clamped at zero."""
    k = 0
    while Fraction(2) ** k < value:
        k += 1
    return k


def open_facilities(cs: ClassificationState, fs: FilteredSolution, inst: RaflInstance) -> Assignment:
    """Open facilities level by level for the free terminals, then send payers to their cheapest support facility.

    Fills ``cs.levels`` and ``cs.openings`` as a side record for the certificate.
    """
    trank, frank = _rank(inst)
    demand = {t.id: t.demand for t in inst.terminals}
    lam = {f.id: f.opening for f in inst.facilities}
    w = inst.universe.w
    levels = {t: level_of(fs.facility_avg[t]) for t in cs.paying}
    for t in cs.free:
        levels[t] = min(levels[j] for j in cs.cov[t])
    cs.levels = levels
    cs.openings = []
    assign: dict[str, str] = {}
    top = max((levels[t] for t in cs.paying), default=-1)
    for d in range(top + 1):
        tier = [t for t in cs.free if levels[t] == d]
        cov_sets = {t: set(cs.cov[t]) for t in tier}
        gamma = {t: [u for u in tier if cov_sets[t] & cov_sets[u]] for t in tier}
        remaining = set(tier)
        while remaining:
            t = min(remaining, key=lambda j: (-w(demand[j]), trank[j]))
            tbar = min(gamma[t], key=lambda j: (fs.routing_star[j], trank[j]))
            candidates = {f for j in cs.cov[tbar] for f in fs.support[j]}
            phi = min(candidates, key=lambda f: (lam[f], frank[f]))
            # only terminals not yet placed at this level move with t
            members = [t] + [u for u in gamma[t] if u in remaining and u != t]
            for u in members:
                assign[u] = phi
            remaining.difference_update(members)
            packets = demand[t].union(*(demand[j] for j in cs.cov[t]))
            cs.openings.append(Opening(phi, t, d, cs.cov[t], tuple(members), packets))
    for t in cs.paying:
        assign[t] = min(fs.support[t], key=lambda f: (lam[f], frank[f]))
    return Assignment({t.id: assign[t.id] for t in inst.terminals})


@dataclass
class RaflCertificate:
    """Costs in original units plus every exact bound checked on the normalized instance."""

    alpha: Fraction
    scale: Fraction
    lp_value: Fraction
    lp_facility: Fraction
    lp_routing: Fraction
    filtered_facility: Fraction
    paying_mass: Fraction  # sum over payers of w(D) * filtered facility average
    copy_facility_cost: Fraction
    facility_cost: Fraction
    routing_cost: Fraction
    routing_slack: dict[str, Fraction]  # 9 alpha Cr*(t) - c(t, A(t)), normalized units
    copy_accounting: list[dict]
    checks: dict[str, bool]

    @property
    def total(self) -> Fraction:
        return self.facility_cost + self.routing_cost

    @property
    def ratio_bound(self) -> Fraction:
        a = self.alpha
        return max(9 * a, 18 * a / (a - 1))

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def solve_rafl(inst: RaflInstance, alpha=3):
    """Relax, filter, classify and open; returns ``(assignment, certificate)``."""
    alpha = Fraction(alpha)
    norm, scale = inst.normalized()
    star = solve_rafl_lp(norm, exact=True)
    fs = filter_solution(star, norm, alpha)
    cs = classify(fs, norm)
    a = open_facilities(cs, fs, norm)
    return a, certify(a, star, fs, cs, norm, scale)


def certify(a: Assignment, star: FractionalSolution, fs: FilteredSolution, cs: ClassificationState,
            norm: RaflInstance, scale: Fraction) -> RaflCertificate:
    alpha = fs.alpha
    u = norm.universe
    facs = {f.id: f for f in norm.facilities}
    demand = {t.id: t.demand for t in norm.terminals}
    lp_fac = star.facility_cost(norm)
    lp_route = star.routing_cost(norm)
    filt_fac = fs.facility_cost(norm)
    slack = {
        t.id: 9 * alpha * fs.routing_star[t.id] - norm.distance(t, facs[a[t.id]])
        for t in norm.terminals
    }
    paying_mass = sum((u.w(demand[t]) * fs.facility_avg[t] for t in cs.paying), Fraction(0))
    accounting = []
    copy_cost = Fraction(0)
    structure_ok = True
    for op in cs.openings:
        cov_union = frozenset().union(*(demand[j] for j in op.fpay))
        member_union = frozenset().union(*(demand[m] for m in op.members))
        cost = facs[op.facility].opening * u.w(op.packets)
        copy_cost += cost
        structure_ok &= member_union <= op.packets and u.w(op.packets) <= 2 * u.w(cov_union)
        structure_ok &= facs[op.facility].opening <= 2 ** op.level
        accounting.append({
            "facility": op.facility, "opener": op.opener, "level": op.level,
            "fpay": list(op.fpay), "members": list(op.members), "cost": cost * scale,
        })
    for t in cs.paying:
        copy_cost += facs[a[t]].opening * u.w(demand[t])
    # each payer funds at most one copy per level, and none above its own level
    level_ok = True
    for t in cs.paying:
        funded = [op.level for op in cs.openings if t in op.fpay]
        level_ok &= len(funded) == len(set(funded)) and all(d <= cs.levels[t] for d in funded)
    fc, rc = eval_rafl_cost(a, norm)
    lp_value = lp_fac + lp_route
    checks = {
        "filter_distance": all(
            norm.distance(t, facs[f]) <= alpha * fs.routing_star[t.id]
            for t in norm.terminals for f in fs.support[t.id]
        ),
        "filter_facility": filt_fac <= alpha / (alpha - 1) * lp_fac,
        "cover_sets": all(covers((demand[j] for j in cs.cov[t]), demand[t], u) for t in cs.free),
        "routing": all(s >= 0 for s in slack.values()),
        "copy_structure": structure_ok,
        "payer_levels": level_ok,
        "paying_mass": paying_mass <= 2 * filt_fac,
        "copy_vs_payers": copy_cost <= 9 * paying_mass,
        "facility": copy_cost <= 18 * alpha / (alpha - 1) * lp_fac,
        "real_vs_copy": fc <= copy_cost,
        "total": fc + rc <= max(9 * alpha, 18 * alpha / (alpha - 1)) * lp_value,
    }
    return RaflCertificate(
        alpha=alpha, scale=scale,
        lp_value=lp_value * scale, lp_facility=lp_fac * scale, lp_routing=lp_route * scale,
        filtered_facility=filt_fac * scale, paying_mass=paying_mass * scale,
        copy_facility_cost=copy_cost * scale, facility_cost=fc * scale, routing_cost=rc * scale,
        routing_slack=slack, copy_accounting=accounting, checks=checks,
    )

