"""The RAFL linear relaxation and a small dense two-phase simplex solver.

The solver runs either in exact rational arithmetic (the default) or in
floating point with a 1e-9 tolerance.  Pivoting follows Bland's rule, so runs
are deterministic and cannot cycle.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Sequence

from .model import RaflInstance

FLOAT_TOL = 1e-9
RELATIONS = ("<=", ">=", "=")


@dataclass
class LinearProgram:
    """Minimize ``objective . v`` subject to sparse rows and ``v >= 0``."""

    keys: list[Hashable]
    objective: list[Fraction]
    rows: list[tuple[dict[int, Fraction], str, Fraction]]

    def __post_init__(self):
        if len(self.objective) != len(self.keys):
            raise ValueError("objective length does not match the variable count")
        for coeffs, rel, _ in self.rows:
            if rel not in RELATIONS:
                raise ValueError(f"unknown relation {rel!r}")
            if any(not 0 <= j < len(self.keys) for j in coeffs):
                raise ValueError("row references an unknown variable")

    @property
    def n_vars(self) -> int:
        return len(self.keys)

    def index(self) -> dict[Hashable, int]:
        return {k: i for i, k in enumerate(self.keys)}

    def names(self) -> list[str]:
        out = []
        for k in self.keys:
            parts = k if isinstance(k, tuple) else (k,)
            out.append("_".join(str(p) for p in parts).replace("+", "_").replace(" ", "_"))
        return out

    def value(self, values: Sequence) -> Fraction:
        return sum((c * v for c, v in zip(self.objective, values)), Fraction(0))

    def residuals(self, values: Sequence) -> list:
        """Signed constraint violations (positive means violated)."""
        out = []
        for coeffs, rel, rhs in self.rows:
            lhs = sum(c * values[j] for j, c in coeffs.items())
            if rel == "<=":
                out.append(lhs - rhs)
            elif rel == ">=":
                out.append(rhs - lhs)
            else:
                out.append(abs(lhs - rhs))
        return out

    def to_lp_format(self) -> str:
        """CPLEX LP text for cross-checking with external solvers (coefficients as decimals)."""
        names = self.names()

        def term(c, j):
            c = float(c)
            return f"{'-' if c < 0 else '+'} {abs(c):.12g} {names[j]}"

        obj = " ".join(term(c, j) for j, c in enumerate(self.objective) if c) or "0 " + names[0]
        lines = ["Minimize", f" obj: {obj}", "Subject To"]
        for i, (coeffs, rel, rhs) in enumerate(self.rows):
            body = " ".join(term(c, j) for j, c in sorted(coeffs.items()) if c)
            lines.append(f" c{i}: {body} {rel} {float(rhs):.12g}")
        lines.append("End")
        return "\n".join(lines) + "\n"


@dataclass
class LPResult:
    status: str
    values: list | None = None
    objective: Fraction | float | None = None
    pivots: int = 0


class LPError(RuntimeError):
    pass


class _Tableau:
    def __init__(self, lp: LinearProgram, exact: bool):
        conv = Fraction if exact else float
        self.zero = conv(0)
        self.one = conv(1)
        self.tol = 0 if exact else FLOAT_TOL
        n = lp.n_vars
        rows = []
        for coeffs, rel, rhs in lp.rows:
            coeffs = {j: conv(c) for j, c in coeffs.items()}
            rhs = conv(rhs)
            # prefer a slack over an artificial when rhs is zero
            if rhs < 0 or (rhs == 0 and rel == ">="):
                coeffs = {j: -c for j, c in coeffs.items()}
                rhs = -rhs
                rel = {"<=": ">=", ">=": "<=", "=": "="}[rel]
            rows.append((coeffs, rel, rhs))
        n_slack = sum(1 for _, rel, _ in rows if rel != "=")
        n_art = sum(1 for _, rel, _ in rows if rel != "<=")
        self.n = n
        self.art_start = n + n_slack
        width = n + n_slack + n_art
        self.width = width
        self.rows: list[list] = []
        self.basis: list[int] = []
        s = n
        a = self.art_start
        for coeffs, rel, rhs in rows:
            row = [self.zero] * (width + 1)
            for j, c in coeffs.items():
                row[j] = c
            row[-1] = rhs
            if rel == "<=":
                row[s] = self.one
                self.basis.append(s)
                s += 1
            else:
                if rel == ">=":
                    row[s] = -self.one
                    s += 1
                row[a] = self.one
                self.basis.append(a)
                a += 1
            self.rows.append(row)
        self.pivots = 0

    def set_objective(self, cost: list):
        """Reduced-cost row for ``cost`` given the current basis; last entry is -z."""
        obj = list(cost) + [self.zero]
        for r, b in enumerate(self.basis):
            cb = obj[b]
            if cb:
                row = self.rows[r]
                for j in range(self.width + 1):
                    if row[j]:
                        obj[j] -= cb * row[j]
        self.obj = obj

    def pivot(self, r: int, c: int):
        row = self.rows[r]
        piv = row[c]
        if piv != self.one:
            for j in range(self.width + 1):
                if row[j]:
                    row[j] = row[j] / piv
        nz = [j for j in range(self.width + 1) if row[j]]
        for other in self.rows + [self.obj]:
            if other is row:
                continue
            f = other[c]
            if f:
                for j in nz:
                    other[j] -= f * row[j]
                other[c] = self.zero
        self.basis[r] = c
        self.pivots += 1

    def run(self, allowed: int) -> str:
        """Bland's rule over columns ``< allowed``; returns 'optimal' or 'unbounded'."""
        tol = self.tol
        while True:
            enter = next((j for j in range(allowed) if self.obj[j] < -tol), None)
            if enter is None:
                return "optimal"
            best = None
            for r, row in enumerate(self.rows):
                a = row[enter]
                if a > tol:
                    ratio = row[-1] / a
                    key = (ratio, self.basis[r])
                    if best is None or key[0] < best[0][0] - tol or (
                        abs(key[0] - best[0][0]) <= tol and key[1] < best[0][1]
                    ):
                        best = (key, r)
            if best is None:
                return "unbounded"
            self.pivot(best[1], enter)

    def values(self) -> list:
        out = [self.zero] * self.width
        for r, b in enumerate(self.basis):
            out[b] = self.rows[r][-1]
        return out


def solve_lp(lp: LinearProgram, exact: bool = True) -> LPResult:
    """Two-phase primal simplex.

    Returns an LPResult whose status is ``optimal``, ``infeasible`` or
    ``unbounded``; values and objective are only set when optimal.
    """
    tab = _Tableau(lp, exact)
    zero, one = tab.zero, tab.one
    if tab.art_start < tab.width:
        phase1 = [zero] * tab.art_start + [one] * (tab.width - tab.art_start)
        tab.set_objective(phase1)
        tab.run(tab.width)
        if -tab.obj[-1] > tab.tol:
            return LPResult("infeasible", pivots=tab.pivots)
        # drive zero-valued artificials out of the basis
        r = 0
        while r < len(tab.rows):
            if tab.basis[r] >= tab.art_start:
                row = tab.rows[r]
                col = next((j for j in range(tab.art_start) if abs(row[j]) > tab.tol), None)
                if col is None:
                    del tab.rows[r]
                    del tab.basis[r]
                    continue
                tab.pivot(r, col)
            r += 1
    conv = Fraction if exact else float
    cost = [conv(c) for c in lp.objective] + [zero] * (tab.width - lp.n_vars)
    tab.set_objective(cost)
    status = tab.run(tab.art_start)
    if status != "optimal":
        return LPResult(status, pivots=tab.pivots)
    vals = tab.values()[: lp.n_vars]
    if not exact:
        vals = [0.0 if abs(v) <= FLOAT_TOL else v for v in vals]
    obj = sum((c * v for c, v in zip(cost, vals)), zero)
    return LPResult("optimal", vals, obj, tab.pivots)


@dataclass
class FractionalSolution:
    x: dict[tuple[str, str], Fraction]
    y: dict[tuple[str, str], Fraction]
    objective: Fraction

    def facility_cost(self, inst: RaflInstance) -> Fraction:
        """Total fractional facility cost, sum of opening * weight * y."""
        lam = {f.id: f.opening for f in inst.facilities}
        return sum((lam[f] * inst.universe.weight(p) * v for (f, p), v in self.y.items()), Fraction(0))

    def routing_cost(self, inst: RaflInstance) -> Fraction:
        return sum(
            (inst.universe.w(t.demand) * self.x[t.id, f.id] * inst.distance(t, f)
             for t in inst.terminals for f in inst.facilities),
            Fraction(0),
        )


def build_rafl_lp(inst: RaflInstance) -> LinearProgram:
    """Relaxation with assignment variables x[t,f] and production variables y[f,p].

    One covering row per terminal and one linking row ``y[f,p] >= x[t,f]``
    per terminal, facility and demanded packet.  Packet weights enter both
    the production and the routing coefficients.
    """
    terms, facs = inst.terminals, inst.facilities
    keys: list[Hashable] = [("x", t.id, f.id) for t in terms for f in facs]
    keys += [("y", f.id, p) for f in facs for p, _ in inst.universe.packets]
    idx = {k: i for i, k in enumerate(keys)}
    obj = [Fraction(0)] * len(keys)
    for t in terms:
        wd = inst.universe.w(t.demand)
        for f in facs:
            obj[idx["x", t.id, f.id]] = wd * inst.distance(t, f)
    for f in facs:
        for p, w in inst.universe.packets:
            obj[idx["y", f.id, p]] = f.opening * w
    rows = []
    for t in terms:
        rows.append(({idx["x", t.id, f.id]: Fraction(1) for f in facs}, ">=", Fraction(1)))
    order = inst.universe.order()
    for t in terms:
        for f in facs:
            for p in sorted(t.demand, key=order.__getitem__):
                rows.append(({idx["y", f.id, p]: Fraction(1), idx["x", t.id, f.id]: Fraction(-1)}, ">=", Fraction(0)))
    return LinearProgram(keys, obj, rows)


def solve_rafl_lp(inst: RaflInstance, exact: bool = True) -> FractionalSolution:
    """Solve the relaxation and normalize each terminal's assignment mass to exactly one."""
    lp = build_rafl_lp(inst)
    res = solve_lp(lp, exact=exact)
    if res.status != "optimal":
        raise LPError(f"RAFL relaxation reported {res.status}; the instance is malformed")
    conv = Fraction if exact else float
    x, y = {}, {}
    for k, v in zip(lp.keys, res.values):
        kind, a, b = k
        (x if kind == "x" else y)[a, b] = conv(v)
    for t in inst.terminals:
        mass = sum(x[t.id, f.id] for f in inst.facilities)
        if mass > 1:
            # surplus mass only sits on zero-cost columns; scaling down cannot raise the objective
            for f in inst.facilities:
                x[t.id, f.id] = x[t.id, f.id] / mass
    sol = FractionalSolution(x, y, Fraction(0))
    if exact:
        sol.objective = sol.facility_cost(inst) + sol.routing_cost(inst)
    else:
        sol.objective = float(sol.facility_cost(inst)) + float(sol.routing_cost(inst))
    return sol


def per_terminal_averages(sol: FractionalSolution, inst: RaflInstance) -> dict[str, tuple[Fraction, Fraction]]:
    """Per terminal ``(average routing distance, average opening multiplier)`` under x."""
    out = {}
    for t in inst.terminals:
        cr = sum((sol.x[t.id, f.id] * inst.distance(t, f) for f in inst.facilities), Fraction(0))
        cf = sum((sol.x[t.id, f.id] * f.opening for f in inst.facilities), Fraction(0))
        out[t.id] = (cr, cf)
    return out
