import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from helpers import rand_instance
from rand_rafl.generate import GeneratorConfig, generate
from rand_rafl.laminar import build_tree, decompose_chains, preprocess
from rand_rafl.model import eval_rand_cost
from rand_rafl.rand_solver import (
    NotPreprocessedError,
    SolverConfig,
    TerminalRelations,
    approximation_bound,
    log_factor,
    loop_erase,
    solve_rand,
    solve_rand_end_to_end,
    solve_rand_prim,
    steiner_forest,
)
from rand_rafl.steiner import approx_steiner


def square():
    # s=0; 0-1-3 costs 2, 0-2-3 costs 3, 1-2 costs 1
    return [(0, 1, 1), (1, 3, 1), (0, 2, 1), (2, 3, 2), (1, 2, 1)]


@pytest.mark.parametrize("solver", [solve_rand, solve_rand_prim])
def test_single_terminal_takes_shortest_path(solver):
    inst = rand_instance(4, square(), {"p": 2}, [("t", 3, {"p"})])
    sol = solver(inst)
    assert sol.paths["t"] == (3, 1, 0)
    assert eval_rand_cost(sol, inst) == 4


@pytest.mark.parametrize("solver", [solve_rand, solve_rand_prim])
def test_common_demand_is_one_steiner_tree(solver):
    inst = rand_instance(4, square(), {"a": 1, "b": 2},
                         [("t1", 3, {"a", "b"}), ("t2", 2, {"a", "b"})])
    sol = solver(inst)
    union = {e for tid in sol.paths for e in sol.edges(tid)}
    assert eval_rand_cost(sol, inst) == 3 * sum(inst.graph.cost(*e) for e in union)
    st_ = approx_steiner(inst.graph, {0, 2, 3})
    if solver is solve_rand:
        assert union == set(st_.edges)


def test_prim_peer_attaches_to_peer():
    # s=0 - a=1 - b=2 with two peers at b: the second one is at distance 0 from the first
    inst = rand_instance(3, [(0, 1, 1), (1, 2, 1)], {"p": 1},
                         [("u", 2, {"p"}), ("v", 2, {"p"})])
    trace = []
    sol = solve_rand_prim(inst, trace)
    assert trace == [("u", None), ("v", "u")]
    assert sol.paths == {"u": (2, 1, 0), "v": (2, 1, 0)}


def test_prim_child_waits_for_ancestor_and_attaches_to_it():
    # ancestor x at node 3 demands {a,b,c}; child y at node 4 near x demands {a}
    edges = [(0, 1, 5), (1, 3, 5), (3, 4, 1), (0, 2, 6), (2, 4, 6)]
    inst = rand_instance(5, edges, {"a": 1, "b": 1, "c": 2},
                         [("y", 4, {"a"}), ("x", 3, {"a", "b", "c"})])
    trace = []
    sol = solve_rand_prim(inst, trace)
    assert trace == [("x", None), ("y", "x")]
    assert sol.paths["y"] == (4, 3, 1, 0)


def test_prim_path_is_loop_erased():
    # y hangs off node 1 on x's route; reaching x and following its route revisits 1
    edges = [(0, 1, 2), (1, 2, 1), (1, 3, 1)]
    inst = rand_instance(4, edges, {"a": 1, "b": 1, "c": 2},
                         [("x", 2, {"a", "b", "c"}), ("y", 3, {"a"})])
    trace = []
    sol = solve_rand_prim(inst, trace)
    assert trace[1] == ("y", "x")
    assert sol.paths["y"] == (3, 1, 0)
    sol.validate(inst)


def test_loop_erase():
    assert loop_erase([5, 1, 2, 1, 0]) == (5, 1, 0)
    assert loop_erase([3, 4, 5, 4, 3, 0]) == (3, 0)
    assert loop_erase([2]) == (2,)


def test_relations():
    inst = rand_instance(2, [(0, 1, 1)], {"a": 1, "b": 1, "c": 4},
                         [("x", 1, {"a", "b", "c"}), ("y", 1, {"a"}), ("z", 1, {"a"})])
    rel = TerminalRelations.of(inst)
    assert rel.anc == {"x": frozenset(), "y": {"x"}, "z": {"x"}}
    assert rel.peer["y"] == {"y", "z"} and rel.peer["x"] == {"x"}


@pytest.mark.parametrize("solver", [solve_rand, solve_rand_prim])
def test_unpreprocessed_instance_rejected(solver):
    inst = rand_instance(2, [(0, 1, 1)], {"a": 1, "b": 1, "c": 1}, [("t", 1, {"a", "b"})])
    with pytest.raises(NotPreprocessedError, match="preprocess"):
        solver(inst)


def test_config_rejects_unknown_names():
    with pytest.raises(ValueError):
        SolverConfig(variant="greedy")
    with pytest.raises(ValueError):
        SolverConfig(steiner="rz")


def test_bounds():
    assert [log_factor(p) for p in (1, 2, 3, 4, 7, 8)] == [1, 2, 2, 3, 3, 4]
    assert approximation_bound(3, SolverConfig()) == 16
    assert approximation_bound(4, SolverConfig(variant="prim")) == 24
    assert approximation_bound(4, SolverConfig(steiner="exact")) == 12


def test_end_to_end_without_merges_matches_plain_solve():
    inst = rand_instance(4, square(), {"a": 1, "b": 1},
                         [("t1", 3, {"a"}), ("t2", 2, {"a", "b"})])
    assert preprocess(inst) is inst
    sol, cost, stats = solve_rand_end_to_end(inst)
    assert sol == solve_rand(inst)
    assert cost == stats.cost_preprocessed == eval_rand_cost(sol, inst)
    assert stats.P == 2 and stats.collections == 1


def test_end_to_end_with_forced_merge():
    inst = rand_instance(4, square(), {"a": 2, "b": 1},
                         [("t1", 3, {"a"}), ("t2", 2, {"a", "b"})])
    assert preprocess(inst) is not inst
    for variant in ("steiner", "prim"):
        sol, cost, stats = solve_rand_end_to_end(inst, SolverConfig(variant))
        sol.validate(inst)
        assert cost <= stats.cost_preprocessed
        assert stats.P == 2 and stats.P_preprocessed == 1


def random_pre(seed):
    rng = random.Random(seed)
    raw = generate(GeneratorConfig(seed=seed, nodes=rng.randint(2, 8), terminals=rng.randint(1, 5),
                                   packets=rng.randint(1, 6), density=rng.random() * 0.5))
    return preprocess(raw)


@given(st.integers(0, 10**6))
def test_paths_run_from_terminal_to_source(seed):
    inst = random_pre(seed)
    for solver in (solve_rand, solve_rand_prim):
        sol = solver(inst)
        sol.validate(inst)


@given(st.integers(0, 10**6))
def test_prim_connects_every_terminal_once(seed):
    inst = random_pre(seed)
    trace = []
    solve_rand_prim(inst, trace)
    assert sorted(t for t, _ in trace) == sorted(t.id for t in inst.terminals)
    rel = TerminalRelations.of(inst)
    done = set()
    for tid, target in trace:
        assert rel.anc[tid] <= done
        assert target is None or target in done
        done.add(tid)


@given(st.integers(0, 10**6))
def test_collection_costs_add_up_to_the_forest(seed):
    inst = random_pre(seed)
    tree, forest = steiner_forest(inst)
    total = sum((tree.weights[x] * t.cost for x, t in forest.items()), Fraction(0))
    _, _, stats = solve_rand_end_to_end(inst)
    assert sum(stats.collection_costs, Fraction(0)) == total
    assert len(stats.collection_costs) == len(decompose_chains(build_tree(inst)))
    # the weighted forest pays at least what the routing pays
    assert eval_rand_cost(solve_rand(inst), inst) <= total

