import json
import random
from collections import deque
from itertools import combinations, permutations

import pytest
from hypothesis import given, settings, strategies as st

from symdet import exactalg, graphs
from symdet.graphs import BipartiteGraph


def brute_matchings(g):
    if g.left != g.right:
        return 0
    return sum(all((u, p[u]) in g.edges for u in range(g.left)) for p in permutations(range(g.right)))


def random_bipartite(rng, n, p):
    edges = [(u, v) for u in range(n) for v in range(n) if rng.random() < p]
    return BipartiteGraph.from_edges(n, n, edges)


def test_fixed_counts():
    assert graphs.count_perfect_matchings(graphs.complete_bipartite(3, 3)) == 6
    assert graphs.count_perfect_matchings(graphs.cube_q3()) == 9
    assert graphs.count_perfect_matchings(graphs.even_cycle(6)) == 2
    assert exactalg.permanent_ryser(graphs.biadjacency(graphs.cube_q3())) == 9


@settings(max_examples=40)
@given(st.integers(1, 6), st.floats(0.2, 0.9), st.integers(0, 10**6))
def test_counting_routes_agree(n, p, seed):
    g = random_bipartite(random.Random(seed), n, p)
    c = graphs.count_perfect_matchings(g)
    assert c == brute_matchings(g)
    assert c == sum(1 for _ in graphs.enumerate_perfect_matchings(g))


def test_enumeration_yields_perfect_matchings():
    g = graphs.cube_q3()
    seen = set()
    for mu in graphs.enumerate_perfect_matchings(g):
        assert sorted(mu) == list(range(4)) and sorted(mu.values()) == list(range(4))
        assert all((u, v) in g.edges for u, v in mu.items())
        seen.add(tuple(sorted(mu.items())))
    assert len(seen) == 9


def test_two_factors_complement_matchings():
    g = graphs.complete_bipartite(3, 3)
    fs = graphs.two_factors(g)
    assert len(fs) == 6
    for f in fs:
        assert len(f) == 6 and f <= g.edges


def test_json_roundtrip(tmp_path):
    g = graphs.cube_q3()
    path = tmp_path / "g.json"
    graphs.dump_graph(g, path)
    assert graphs.load_graph(path) == g
    obj = json.loads(path.read_text())
    assert set(obj) >= {"left", "right", "edges"}
    assert "--" in graphs.to_dot(g)


def test_disjoint_union_multiplies():
    g = graphs.disjoint_union(graphs.even_cycle(6), graphs.complete_bipartite(2, 2))
    assert graphs.count_perfect_matchings(g) == 2 * 2


def test_bad_edge_rejected():
    with pytest.raises(ValueError):
        BipartiteGraph.from_edges(2, 2, [(0, 2)])


def largest_component(adj, removed):
    seen, best = set(removed), 0
    for s in range(len(adj)):
        if s in seen:
            continue
        comp, q = 1, deque([s])
        seen.add(s)
        while q:
            w = q.popleft()
            for x in adj[w]:
                if x not in seen:
                    seen.add(x)
                    comp += 1
                    q.append(x)
        best = max(best, comp)
    return best


def brute_min_balanced(adj):
    n = len(adj)
    for size in range(n + 1):
        for s in combinations(range(n), size):
            if 2 * largest_component(adj, s) <= n:
                return size


@pytest.mark.parametrize("g", [graphs.cube_q3(), graphs.complete_bipartite(3, 3), graphs.even_cycle(8)])
def test_separator_against_brute_force(g):
    adj = g.adjacency_lists()
    size = brute_min_balanced(adj)
    sep, _ = graphs.min_balanced_separator_upto(g, len(adj))
    assert len(sep) == size
    assert graphs.is_balanced_separator(g, sep)
    assert graphs.well_connectedness(g, len(adj)) == size - 1


def test_separator_budget():
    with pytest.raises(graphs.BudgetExceeded):
        graphs.min_balanced_separator_upto(graphs.cube_q3(), 8, budget=10)


def path(n):
    return [[j for j in (i - 1, i + 1) if 0 <= j < n] for i in range(n)]


def cycle(n):
    return [[(i - 1) % n, (i + 1) % n] for i in range(n)]


def complete(n):
    return [[j for j in range(n) if j != i] for i in range(n)]


def test_cops_treewidth():
    star = [[1, 2, 3], [0], [0], [0]]
    for tree in (path(5), star):
        assert graphs.cops_win(tree, 2)
    assert not graphs.cops_win(path(3), 1)
    for n in (4, 5, 6):
        assert graphs.cops_win(cycle(n), 3)
        assert not graphs.cops_win(cycle(n), 2)
    assert graphs.cops_win(complete(4), 4)
    assert not graphs.cops_win(complete(4), 3)
