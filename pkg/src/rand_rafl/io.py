"""Line-oriented text format for instances and solutions.

An instance document::

    problem rand          # or rafl
    nodes 3
    source 0              # rand only
    packet p1 3           # id, integral weight
    edge 0 1 1            # u, v, cost (integer, a/b or decimal)
    terminal t1 1 p1      # id, node, demanded packet ids
    facility f1 0 2       # rafl only: id, node, opening multiplier

Blank lines and ``#`` comments are ignored.  ``serialize`` writes the
canonical form: one line per item in the order above, rationals as ``a/b``.
Solutions use ``path <terminal> <node> ...`` or ``assign <terminal> <facility>``.
"""
from __future__ import annotations

from fractions import Fraction

from .model import (
    Assignment,
    Facility,
    PacketUniverse,
    RaflInstance,
    RandInstance,
    RandSolution,
    Terminal,
    ValidationError,
    WeightedGraph,
)


class ParseError(ValidationError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def fmt(value) -> str:
    value = Fraction(value)
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def _number(tok: str, lineno: int, what: str) -> Fraction:
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise ParseError(lineno, f"bad {what} {tok!r}") from None


def _int(tok: str, lineno: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(lineno, f"bad {what} {tok!r}") from None


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def parse_instance(text: str) -> RandInstance | RaflInstance:
    kind = None
    n = None
    source = None
    packets: list[tuple[str, int]] = []
    edges = []
    terms = []
    facs = []
    for lineno, tok in _lines(text):
        key, args = tok[0], tok[1:]
        if kind is None and key != "problem":
            raise ParseError(lineno, "document must start with 'problem rand' or 'problem rafl'")
        if key == "problem":
            if kind is not None or len(args) != 1 or args[0] not in ("rand", "rafl"):
                raise ParseError(lineno, "expected a single 'problem rand|rafl' line")
            kind = args[0]
        elif key == "nodes":
            if len(args) != 1:
                raise ParseError(lineno, "expected 'nodes <count>'")
            n = _int(args[0], lineno, "node count")
        elif key == "source":
            if len(args) != 1:
                raise ParseError(lineno, "expected 'source <node>'")
            source = _int(args[0], lineno, "source node")
        elif key == "packet":
            if len(args) != 2:
                raise ParseError(lineno, "expected 'packet <id> <weight>'")
            packets.append((args[0], _int(args[1], lineno, "packet weight")))
        elif key == "edge":
            if len(args) != 3:
                raise ParseError(lineno, "expected 'edge <u> <v> <cost>'")
            edges.append((lineno, _int(args[0], lineno, "node"), _int(args[1], lineno, "node"),
                          _number(args[2], lineno, "edge cost")))
        elif key == "terminal":
            if len(args) < 3:
                raise ParseError(lineno, "expected 'terminal <id> <node> <packet> ...'")
            terms.append((lineno, args[0], _int(args[1], lineno, "node"), args[2:]))
        elif key == "facility":
            if len(args) != 3:
                raise ParseError(lineno, "expected 'facility <id> <node> <lambda>'")
            facs.append((lineno, args[0], _int(args[1], lineno, "node"), _number(args[2], lineno, "lambda")))
        else:
            raise ParseError(lineno, f"unknown keyword {key!r}")
    if kind is None:
        raise ParseError(0, "empty document")
    if n is None:
        raise ParseError(0, "missing 'nodes' line")
    if kind == "rand" and source is None:
        raise ParseError(0, "rand instance needs a 'source' line")
    if kind == "rafl" and (source is not None or not facs):
        raise ParseError(0, "rafl instance takes facilities and no source")
    if kind == "rand" and facs:
        raise ParseError(facs[0][0], "facilities are only allowed in rafl instances")
    universe = PacketUniverse(tuple(packets))
    for lineno, tid, node, demand in terms:
        for p in demand:
            if p not in universe:
                raise ParseError(lineno, f"terminal {tid!r} references undefined packet {p!r}")
    for lineno, u, v, _ in edges:
        for x in (u, v):
            if not 0 <= x < n:
                raise ParseError(lineno, f"edge references undefined node {x}")
    graph = WeightedGraph(n, tuple((u, v, c) for _, u, v, c in edges), source)
    terminals = tuple(Terminal(tid, node, frozenset(d)) for _, tid, node, d in terms)
    if kind == "rand":
        return RandInstance(graph, universe, terminals)
    return RaflInstance(graph, universe, terminals, tuple(Facility(f, node, lam) for _, f, node, lam in facs))


def serialize_instance(inst: RandInstance | RaflInstance) -> str:
    rafl = isinstance(inst, RaflInstance)
    g = inst.graph
    lines = [f"problem {'rafl' if rafl else 'rand'}", f"nodes {g.n}"]
    if not rafl:
        lines.append(f"source {g.source}")
    lines += [f"packet {p} {w}" for p, w in inst.universe.packets]
    lines += [f"edge {u} {v} {fmt(c)}" for u, v, c in g.edges]
    order = inst.universe.order()
    for t in inst.terminals:
        demand = " ".join(sorted(t.demand, key=order.__getitem__))
        lines.append(f"terminal {t.id} {t.location} {demand}")
    if rafl:
        lines += [f"facility {f.id} {f.location} {fmt(f.opening)}" for f in inst.facilities]
    return "\n".join(lines) + "\n"


def serialize_solution(sol: RandSolution | Assignment, inst) -> str:
    if isinstance(sol, RandSolution):
        lines = ["problem rand"]
        lines += [f"path {t.id} " + " ".join(map(str, sol.paths[t.id])) for t in inst.terminals]
    else:
        lines = ["problem rafl"]
        lines += [f"assign {t.id} {sol[t.id]}" for t in inst.terminals]
    return "\n".join(lines) + "\n"


def parse_solution(text: str) -> RandSolution | Assignment:
    kind = None
    paths, assign = {}, {}
    for lineno, tok in _lines(text):
        key, args = tok[0], tok[1:]
        if key == "problem":
            if len(args) != 1 or args[0] not in ("rand", "rafl"):
                raise ParseError(lineno, "expected 'problem rand|rafl'")
            kind = args[0]
        elif key == "path" and kind == "rand":
            if len(args) < 2:
                raise ParseError(lineno, "expected 'path <terminal> <node> ...'")
            paths[args[0]] = tuple(_int(a, lineno, "node") for a in args[1:])
        elif key == "assign" and kind == "rafl":
            if len(args) != 2:
                raise ParseError(lineno, "expected 'assign <terminal> <facility>'")
            assign[args[0]] = args[1]
        else:
            raise ParseError(lineno, f"unexpected {key!r} line")
    if kind is None:
        raise ParseError(0, "missing 'problem' line")
    return RandSolution(paths) if kind == "rand" else Assignment(assign)


def read_instance(path) -> RandInstance | RaflInstance:
    with open(path) as fh:
        return parse_instance(fh.read())


def write_text(path, text: str):
    with open(path, "w") as fh:
        fh.write(text)
