"""Command line entry point.

Every command writes one JSON record per line to stdout and a short human
summary to stderr.  Exact rationals are printed as strings next to a float.
"""
from __future__ import annotations

import argparse
import itertools
import json
import sys
import time
from fractions import Fraction

from .generate import GeneratorConfig, generate
from .io import fmt, parse_solution, read_instance, serialize_instance, serialize_solution, write_text
from .laminar import build_tree
from .model import RaflInstance, RandSolution, ValidationError, eval_rafl_cost, eval_rand_cost
from .oracle import OracleCapError, oracle_rafl, oracle_rand
from .rafl_solver import solve_rafl
from .rand_solver import SolverConfig, solve_rand_end_to_end


class CliError(Exception):
    pass


def _num(value):
    if isinstance(value, Fraction):
        return {"exact": fmt(value), "approx": round(float(value), 9)}
    return value


def emit(record: dict):
    out = {k: _num(v) for k, v in record.items()}
    sys.stdout.write(json.dumps(out, sort_keys=True) + "\n")


def say(msg: str):
    sys.stderr.write(msg + "\n")


def _problem(inst) -> str:
    return "rafl" if isinstance(inst, RaflInstance) else "rand"


def _load(path, problem=None):
    inst = read_instance(path)
    if problem is not None and problem != _problem(inst):
        raise CliError(f"{path} holds a {_problem(inst)} instance, not {problem}")
    return inst


def _solve(inst, args):
    """Return (solution, cost, extra record fields)."""
    if isinstance(inst, RaflInstance):
        a, cert = solve_rafl(inst, Fraction(args.alpha))
        extra = {
            "facility_cost": cert.facility_cost,
            "routing_cost": cert.routing_cost,
            "lp_value": cert.lp_value,
            "copy_facility_cost": cert.copy_facility_cost,
            "bound": cert.ratio_bound,
            "checks": cert.checks,
            "certified": cert.ok,
        }
        if getattr(args, "certificate", False):
            extra["routing_slack"] = {t: fmt(s) for t, s in cert.routing_slack.items()}
            extra["copies"] = [{**c, "cost": fmt(c["cost"])} for c in cert.copy_accounting]
        return a, cert.total, extra
    config = SolverConfig(args.variant, args.steiner)
    sol, cost, stats = solve_rand_end_to_end(inst, config)
    extra = {
        "P": stats.P,
        "P_preprocessed": stats.P_preprocessed,
        "depth": stats.depth,
        "collections": stats.collections,
        "bound": stats.bound,
        "cost_preprocessed": stats.cost_preprocessed,
        "collection_costs": [fmt(c) for c in stats.collection_costs],
    }
    return sol, cost, extra


def _oracle(inst, cap):
    if isinstance(inst, RaflInstance):
        return oracle_rafl(inst, cap)
    return oracle_rand(inst, cap)


def _gen_config(args, **over) -> GeneratorConfig:
    fields = dict(
        problem=args.problem, seed=args.seed, nodes=args.nodes, density=args.density,
        terminals=args.terminals, packets=args.packets, branching=args.branching,
        weight_range=tuple(args.weights), cost_range=tuple(args.costs), facilities=args.facilities,
        lambda_range=tuple(args.lambdas), demand_sets=args.demand_sets,
    )
    fields.update(over)
    return GeneratorConfig(**fields)


def cmd_gen(args):
    inst = generate(_gen_config(args))
    text = serialize_instance(inst)
    if args.out:
        write_text(args.out, text)
        emit({"command": "gen", "problem": args.problem, "file": args.out, "P": build_tree(inst).size,
              "terminals": len(inst.terminals), "nodes": inst.graph.n})
    else:
        sys.stdout.write(text)
    say(f"generated {args.problem} instance: {inst.graph.n} nodes, {len(inst.terminals)} terminals")


def cmd_solve(args):
    inst = _load(args.instance, args.problem)
    sol, cost, extra = _solve(inst, args)
    if args.out:
        write_text(args.out, serialize_solution(sol, inst))
    emit({"command": "solve", "problem": _problem(inst), "cost": cost, **extra})
    say(f"{_problem(inst)} solution cost {fmt(cost)} (~{float(cost):.6g})")


def cmd_oracle(args):
    inst = _load(args.instance, args.problem)
    res = _oracle(inst, args.cap)
    if args.out:
        write_text(args.out, serialize_solution(res.solution, inst))
    emit({"command": "oracle", "problem": _problem(inst), "cost": res.cost, "space": res.explored})
    say(f"optimal cost {fmt(res.cost)} (~{float(res.cost):.6g}) over {res.explored} candidates")


def cmd_eval(args):
    inst = _load(args.instance)
    with open(args.solution) as fh:
        sol = parse_solution(fh.read())
    if isinstance(inst, RaflInstance):
        if isinstance(sol, RandSolution):
            raise CliError("rand solution given for a rafl instance")
        fc, rc = eval_rafl_cost(sol, inst)
        emit({"command": "eval", "problem": "rafl", "cost": fc + rc, "facility_cost": fc, "routing_cost": rc})
        cost = fc + rc
    else:
        if not isinstance(sol, RandSolution):
            raise CliError("rafl solution given for a rand instance")
        cost = eval_rand_cost(sol, inst)
        emit({"command": "eval", "problem": "rand", "cost": cost})
    say(f"cost {fmt(cost)} (~{float(cost):.6g})")


def _ratio_record(inst, args) -> dict:
    _, cost, extra = _solve(inst, args)
    opt = _oracle(inst, args.cap).cost
    ratio = cost / opt if opt else Fraction(1)
    return {"cost": cost, "optimum": opt, "ratio": ratio, "bound": extra["bound"],
            "within_bound": ratio <= extra["bound"]}


def cmd_ratio(args):
    inst = _load(args.instance, args.problem)
    rec = _ratio_record(inst, args)
    emit({"command": "ratio", "problem": _problem(inst), **rec})
    say(f"ratio {float(rec['ratio']):.4f} (bound {rec['bound']})")


def cmd_bench(args):
    ratios = []
    sweep = itertools.product(args.sweep_nodes, args.sweep_terminals, args.sweep_packets)
    index = 0
    for nodes, terminals, packets in sweep:
        for k in range(args.count):
            seed = args.seed + k
            cfg = _gen_config(args, seed=seed, nodes=nodes, terminals=terminals, packets=packets)
            inst = generate(cfg)
            start = time.perf_counter()
            try:
                rec = _ratio_record(inst, args)
            except OracleCapError:
                _, cost, extra = _solve(inst, args)
                rec = {"cost": cost, "optimum": None, "ratio": None, "bound": extra["bound"], "within_bound": None}
            elapsed = time.perf_counter() - start
            row = {"command": "bench", "index": index, "problem": args.problem, "seed": seed, "nodes": nodes,
                   "terminals": terminals, "packets": packets, **rec}
            if args.timing:
                row["seconds"] = round(elapsed, 4)
            emit(row)
            if rec["ratio"] is not None:
                ratios.append(rec["ratio"])
            index += 1
    if ratios:
        say(f"{index} instances; ratio mean {float(sum(ratios)) / len(ratios):.4f}, max {float(max(ratios)):.4f}")


def _add_gen_args(p):
    p.add_argument("--problem", choices=("rand", "rafl"), default="rand")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nodes", type=int, default=8)
    p.add_argument("--density", type=float, default=0.2)
    p.add_argument("--terminals", type=int, default=4)
    p.add_argument("--packets", type=int, default=4)
    p.add_argument("--branching", type=int, default=2)
    p.add_argument("--weights", type=int, nargs=2, default=(1, 4), metavar=("LO", "HI"))
    p.add_argument("--costs", type=int, nargs=2, default=(1, 10), metavar=("LO", "HI"))
    p.add_argument("--facilities", type=int, default=3)
    p.add_argument("--lambdas", type=int, nargs=2, default=(1, 4), metavar=("LO", "HI"))
    p.add_argument("--demand-sets", type=int, default=None)


def _add_solver_args(p):
    p.add_argument("--variant", choices=("steiner", "prim"), default="steiner")
    p.add_argument("--steiner", choices=("mst", "exact"), default="mst")
    p.add_argument("--alpha", default="3", help="filtering parameter for rafl (rational, > 1)")


def _int_list(text):
    return [int(x) for x in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rand-rafl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a random instance")
    _add_gen_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="run the approximation algorithm")
    p.add_argument("instance")
    p.add_argument("--problem", choices=("rand", "rafl"))
    _add_solver_args(p)
    p.add_argument("--certificate", action="store_true", help="include per-terminal and per-copy accounting")
    p.add_argument("--out", help="write the solution file here")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="exact optimum by enumeration")
    p.add_argument("instance")
    p.add_argument("--problem", choices=("rand", "rafl"))
    p.add_argument("--cap", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("eval", help="cost a solution file")
    p.add_argument("instance")
    p.add_argument("solution")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ratio", help="solve, run the oracle and report the ratio")
    p.add_argument("instance")
    p.add_argument("--problem", choices=("rand", "rafl"))
    _add_solver_args(p)
    p.add_argument("--cap", type=int, default=None)
    p.set_defaults(func=cmd_ratio)

    p = sub.add_parser("bench", help="sweep generator settings and tabulate ratios")
    _add_gen_args(p)
    _add_solver_args(p)
    p.add_argument("--count", type=int, default=10, help="seeds per sweep point")
    p.add_argument("--sweep-nodes", type=_int_list, default=[6, 8])
    p.add_argument("--sweep-terminals", type=_int_list, default=[3, 4])
    p.add_argument("--sweep-packets", type=_int_list, default=[4])
    p.add_argument("--cap", type=int, default=None)
    p.add_argument("--timing", action="store_true", help="add wall-clock seconds (breaks byte-identical output)")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (CliError, ValidationError, OracleCapError, OSError, ValueError) as exc:
        say(f"error: {exc}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
