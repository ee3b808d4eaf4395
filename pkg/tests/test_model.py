import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from helpers import brute_distance, graph, rafl_instance, rand_instance
from rand_rafl.generate import GeneratorConfig, generate, random_graph
from rand_rafl.model import (
    Assignment,
    PacketUniverse,
    RandSolution,
    Terminal,
    ValidationError,
    eval_rafl_cost,
    eval_rand_cost,
    shortest_path_metric,
)
from rand_rafl.oracle import oracle_rand


def path_instance():
    # s=0 - a=1 - b=2, plus a costly direct s-b edge
    return rand_instance(
        3, [(0, 1, 1), (1, 2, 1), (0, 2, 10)], {"p1": 1, "p2": 1},
        [("t1", 1, {"p1"}), ("t2", 2, {"p1", "p2"})],
    )


def test_single_edge_cost():
    inst = rand_instance(2, [(0, 1, 1)], {"p1": 3}, [("t", 1, {"p1"})])
    assert eval_rand_cost(RandSolution({"t": (1, 0)}), inst) == 3


def test_shared_path_counts_packets_once():
    inst = path_instance()
    sol = RandSolution({"t1": (1, 0), "t2": (2, 1, 0)})
    # (1,2) carries {p1,p2}; (0,1) carries {p1} | {p1,p2}
    assert eval_rand_cost(sol, inst) == 4
    assert oracle_rand(inst).cost == 4


def test_rerouted_terminal_is_suboptimal():
    inst = path_instance()
    sol = RandSolution({"t1": (1, 0), "t2": (2, 0)})
    assert eval_rand_cost(sol, inst) == 1 * 1 + 10 * 2
    assert oracle_rand(inst).cost < 21


@pytest.mark.parametrize("paths, match", [
    ({"t1": (1, 0), "t2": (2, 1)}, "t2"),
    ({"t1": (1, 0)}, "t2"),
    ({"t1": (1, 2, 0), "t2": (2, 1, 0)}, None),
])
def test_infeasible_paths_name_the_terminal(paths, match):
    inst = path_instance()
    if match is None:
        # (1,2,0) is a legal detour
        assert eval_rand_cost(RandSolution(paths), inst) > 0
        return
    with pytest.raises(ValidationError, match=match):
        eval_rand_cost(RandSolution(paths), inst)


def test_unknown_edge_rejected():
    inst = rand_instance(3, [(0, 1, 1), (1, 2, 1)], {"p": 1}, [("t", 2, {"p"})])
    with pytest.raises(ValidationError, match="'t'.*unknown edge"):
        eval_rand_cost(RandSolution({"t": (2, 0)}), inst)


def rafl_pair(lam_a, lam_b, d1, d2):
    # t1 at node 1, t2 at node 2; f at 0, g at 3
    return rafl_instance(
        4, [(0, 1, d1), (0, 2, d2), (3, 1, 1), (3, 2, 1)], {"p1": 1},
        [("t1", 1, {"p1"}), ("t2", 2, {"p1"})],
        [("f", 0, lam_a), ("g", 3, lam_b)],
    )


def test_rafl_cost_single():
    inst = rafl_instance(1, [], {"p1": 1}, [("t", 0, {"p1"})], [("f", 0, 1)])
    assert eval_rafl_cost(Assignment({"t": "f"}), inst) == (1, 0)


def test_rafl_cost_shared_facility_pays_packet_once():
    inst = rafl_pair(2, 2, 1, 3)
    assert eval_rafl_cost(Assignment({"t1": "f", "t2": "f"}), inst) == (2, 4)


def test_rafl_cost_split_loses_savings():
    inst = rafl_pair(2, 2, 1, 3)
    assert eval_rafl_cost(Assignment({"t1": "g", "t2": "f"}), inst) == (4, 1 + 3)
    inst = rafl_pair(2, 2, 5, 5)
    assert eval_rafl_cost(Assignment({"t1": "f", "t2": "g"}), inst) == (4, 5 + 1)


def test_rafl_unknown_facility():
    inst = rafl_pair(1, 1, 1, 1)
    with pytest.raises(ValidationError, match="unknown facility"):
        eval_rafl_cost(Assignment({"t1": "f", "t2": "nope"}), inst)


def test_metric_triangle_shortcut():
    g = graph(3, [(0, 1, 1), (1, 2, 1), (0, 2, 3)])
    d = shortest_path_metric(g)
    assert d[0, 2] == 2 and d[2, 0] == 2


def test_metric_single_node():
    assert shortest_path_metric(graph(1, [])) == {(0, 0): 0}


def test_metric_disconnected_pair_named():
    with pytest.raises(ValidationError, match="0 and 2"):
        shortest_path_metric(graph(3, [(0, 1, 1)]))


@pytest.mark.parametrize("seed", range(10))
def test_metric_matches_path_enumeration(seed):
    rng = random.Random(seed)
    g = random_graph(rng, 8, 0.3, (1, 9))
    d = shortest_path_metric(g)
    for u in range(8):
        assert d[u, u] == 0
        for v in range(8):
            assert d[u, v] == d[v, u] == brute_distance(g, u, v)
            for k in range(8):
                assert d[u, v] <= d[u, k] + d[k, v]


def test_rational_costs_stay_exact():
    g = graph(3, [(0, 1, Fraction(1, 3)), (1, 2, Fraction(1, 6))])
    assert shortest_path_metric(g)[0, 2] == Fraction(1, 2)


@pytest.mark.parametrize("bad", [
    lambda: PacketUniverse((("p", 0),)),
    lambda: PacketUniverse((("p", 1), ("p", 2))),
    lambda: graph(2, [(0, 1, -1)]),
    lambda: graph(2, [(0, 0, 1)]),
    lambda: graph(2, [(0, 1, 1), (1, 0, 2)]),
    lambda: Terminal("t", 0, frozenset()),
    lambda: rand_instance(2, [(0, 1, 1)], {"p": 1}, [("t", 1, {"q"})]),
    lambda: rand_instance(3, [(0, 1, 1)], {"p": 1}, [("t", 2, {"p"})]),
    lambda: rand_instance(2, [(0, 1, 1)], {"a": 1, "b": 1, "c": 1},
                          [("t", 1, {"a", "b"}), ("u", 1, {"b", "c"})]),
])
def test_invalid_inputs_rejected(bad):
    with pytest.raises(ValidationError):
        bad()


def test_lambda_normalization_scales_costs_uniformly():
    inst = rafl_pair(4, 6, 2, 4)
    norm, scale = inst.normalized()
    assert scale == 4
    assert min(f.opening for f in norm.facilities) == 1
    a = Assignment({"t1": "f", "t2": "g"})
    assert sum(eval_rafl_cost(a, norm)) * scale == sum(eval_rafl_cost(a, inst))


# -- properties -------------------------------------------------------------

seeds = st.integers(0, 10**6)


def shortest_solution(inst):
    paths = {}
    for t in inst.terminals:
        dist, pred = inst.graph.dijkstra(inst.source)
        node, p = t.location, [t.location]
        while pred[node] != -1:
            node = pred[node]
            p.append(node)
        paths[t.id] = tuple(p)
    return RandSolution(paths)


@given(seeds)
def test_adding_a_terminal_never_lowers_cost(seed):
    inst = generate(GeneratorConfig(seed=seed, nodes=7, terminals=4, packets=5))
    sol = shortest_solution(inst)
    smaller = type(inst)(inst.graph, inst.universe, inst.terminals[:-1])
    part = RandSolution({k: v for k, v in sol.paths.items() if k != inst.terminals[-1].id})
    assert eval_rand_cost(part, smaller) <= eval_rand_cost(sol, inst)


@given(seeds)
def test_disjoint_demands_are_additive(seed):
    rng = random.Random(seed)
    g = random_graph(rng, 7, 0.3, (1, 9), source=0)
    k = rng.randint(1, 4)
    terms = tuple(Terminal(f"t{i}", rng.randrange(7), frozenset({f"p{i}"})) for i in range(k))
    inst = type(generate(GeneratorConfig()))(g, PacketUniverse(tuple((f"p{i}", rng.randint(1, 5)) for i in range(k))), terms)
    sol = shortest_solution(inst)
    expected = sum(inst.universe.w(t.demand) * g.path_cost(sol.paths[t.id]) for t in terms)
    assert eval_rand_cost(sol, inst) == expected


@given(seeds)
def test_common_demand_degenerates_to_edge_union(seed):
    rng = random.Random(seed)
    g = random_graph(rng, 7, 0.3, (1, 9), source=0)
    x = frozenset({"a", "b"})
    terms = tuple(Terminal(f"t{i}", rng.randrange(7), x) for i in range(rng.randint(1, 4)))
    inst = type(generate(GeneratorConfig()))(g, PacketUniverse((("a", 2), ("b", 3))), terms)
    sol = shortest_solution(inst)
    union = {e for t in terms for e in sol.edges(t.id)}
    assert eval_rand_cost(sol, inst) == 5 * sum(g.cost(*e) for e in union)


@given(seeds)
def test_facility_term_is_submodular(seed):
    inst = generate(GeneratorConfig(problem="rafl", seed=seed, nodes=5, terminals=5, packets=6, facilities=1))
    terms = list(inst.terminals)
    rng = random.Random(seed)
    small = set(rng.sample(range(5), 2))
    big = small | set(rng.sample(range(5), 2))
    extra = rng.randrange(5)
    w = inst.universe.w

    def load(idx):
        return w(frozenset().union(*(terms[i].demand for i in idx)))

    assert load(small | {extra}) - load(small) >= load(big | {extra}) - load(big)
