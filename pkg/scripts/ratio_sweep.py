"""Empirical approximation ratios on small random instances.

Writes one CSV row per (instance, method) with the solver cost, the exact
optimum and the guaranteed bound.  Defaults reproduce the ratio tables used
when checking the bounds by hand:

    python scripts/ratio_sweep.py --count 200 --out ratios.csv
"""
import argparse
import csv
import random
import statistics
import sys
from dataclasses import asdict, dataclass

from rand_rafl.generate import GeneratorConfig, generate
from rand_rafl.oracle import OracleCapError, oracle_rafl, oracle_rand
from rand_rafl.rafl_solver import solve_rafl
from rand_rafl.rand_solver import SolverConfig, solve_rand_end_to_end


@dataclass
class SweepConfig:
    seed: int = 0
    count: int = 100
    max_nodes: int = 8
    max_terminals: int = 4
    max_packets: int = 5
    max_facilities: int = 4
    cap: int = 10**6


def rand_rows(cfg: SweepConfig, rng: random.Random):
    for i in range(cfg.count):
        gen = GeneratorConfig(seed=rng.randrange(10**9), nodes=rng.randint(2, cfg.max_nodes),
                              terminals=rng.randint(1, cfg.max_terminals), packets=rng.randint(1, cfg.max_packets),
                              density=rng.uniform(0, 0.4), branching=rng.randint(1, 3))
        inst = generate(gen)
        try:
            opt = oracle_rand(inst, cfg.cap).cost
        except OracleCapError:
            continue
        for variant in ("steiner", "prim"):
            _, cost, stats = solve_rand_end_to_end(inst, SolverConfig(variant))
            yield {"problem": "rand", "index": i, "method": variant, "seed": gen.seed, "P": stats.P,
                   "cost": float(cost), "optimum": float(opt), "ratio": float(cost / opt), "bound": stats.bound}


def rafl_rows(cfg: SweepConfig, rng: random.Random):
    for i in range(cfg.count):
        gen = GeneratorConfig(problem="rafl", seed=rng.randrange(10**9), nodes=rng.randint(1, cfg.max_nodes),
                              terminals=rng.randint(1, cfg.max_terminals + 1), packets=rng.randint(1, cfg.max_packets),
                              facilities=rng.randint(1, cfg.max_facilities), density=rng.uniform(0, 0.6))
        inst = generate(gen)
        opt = oracle_rafl(inst, cfg.cap).cost
        _, cert = solve_rafl(inst)
        yield {"problem": "rafl", "index": i, "method": "lp-rounding", "seed": gen.seed, "P": "",
               "cost": float(cert.total), "optimum": float(opt), "ratio": float(cert.total / opt),
               "bound": float(cert.ratio_bound), "lp_gap": float(opt / cert.lp_value)}


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for name, value in asdict(SweepConfig()).items():
        parser.add_argument("--" + name.replace("_", "-"), type=int, default=value)
    parser.add_argument("--out", default="-")
    args = parser.parse_args(argv)
    out = args.__dict__.pop("out")
    cfg = SweepConfig(**vars(args))
    rng = random.Random(cfg.seed)
    rows = list(rand_rows(cfg, rng)) + list(rafl_rows(cfg, rng))
    fields = ["problem", "index", "method", "seed", "P", "cost", "optimum", "ratio", "bound", "lp_gap"]
    fh = sys.stdout if out == "-" else open(out, "w", newline="")
    writer = csv.DictWriter(fh, fieldnames=fields, restval="")
    writer.writeheader()
    writer.writerows(rows)
    if fh is not sys.stdout:
        fh.close()
    for method in sorted({r["method"] for r in rows}):
        rs = [r["ratio"] for r in rows if r["method"] == method]
        print(f"{method:12s} n={len(rs):4d} mean {statistics.mean(rs):.4f} max {max(rs):.4f}", file=sys.stderr)


if __name__ == "__main__":
    main()
