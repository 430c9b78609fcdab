import random
from fractions import Fraction

from hypothesis import given
from hypothesis import strategies as st

from tw_congest.graph import INF, MultiGraph
from tw_congest.oracles import (oracle_apsp, oracle_balance, oracle_constrained_walks, oracle_girth,
                                oracle_matching, oracle_min_vertex_cut, shortest_cycle_edges)
from tw_congest.walks import INIT, CountConstraint, constrained_distance

from conftest import cycle, graph, path


def test_apsp_examples():
    g = graph([(0, 1), (1, 2)], n=3, directed=True, costs=[2, 3])
    d = oracle_apsp(g)
    assert d[(0, 2)] == 5 and d[(1, 1)] == 0 and d[(2, 0)] == INF


def test_matching_examples():
    assert oracle_matching(path(4)) == 2
    assert oracle_matching(graph([(0, 1), (0, 2), (0, 3)], n=4)) == 1
    assert oracle_matching(cycle(6)) == 3


def test_girth_examples():
    assert oracle_girth(graph([(0, 1), (1, 2), (2, 0)], n=3, costs=[1, 2, 3])) == 6
    assert oracle_girth(graph([(0, 1), (1, 2), (1, 3)], n=4)) == INF
    bow = graph([(0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (4, 0)], n=5, costs=[5, 5, 5, 1, 2, 3])
    assert oracle_girth(bow) == 6
    assert shortest_cycle_edges(bow) == {3, 4, 5}


def test_constrained_walk_examples():
    tri = graph([(0, 1), (1, 2), (2, 0)], n=3, costs=[2, 3, 4])
    c = CountConstraint({0: 1, 1: 0, 2: 0}, 1)
    table = oracle_constrained_walks(tri, c, 4)
    assert table[(1, 1, INIT)] == 0
    assert set(oracle_constrained_walks(tri, c, 0)) == {(v, v, INIT) for v in range(3)}
    for (s, t, q), w in table.items():
        if q != INIT:
            assert constrained_distance(tri, c, s, t, q) <= w
    assert table[(0, 0, 1)] == constrained_distance(tri, c, 0, 0, 1) == 9


@given(st.integers(0, 10**6))
def test_walk_table_stabilises(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 4)
    g = MultiGraph(set(range(n)))
    for v in range(1, n):
        g.add_edge(rng.randrange(v), v, rng.randint(1, 4))
    c = CountConstraint({e: rng.randint(0, 1) for e in g.gamma}, 1)
    bound = len(c.states) * n
    a = oracle_constrained_walks(g, c, bound)
    b = oracle_constrained_walks(g, c, 2 * bound)
    assert a == b


def test_vertex_cut_examples():
    assert oracle_min_vertex_cut(path(3), {0}, {2}) == (1, frozenset({1}))
    assert oracle_min_vertex_cut(path(3), {0}, {1})[0] == INF
    k4 = graph([(a, b) for a in range(4) for b in range(a + 1, 4)], n=4)
    assert oracle_min_vertex_cut(k4, {0}, {3})[0] == INF
    # with the 0-3 edge removed the two vertices are opposite corners
    k4_minus = graph([(a, b) for a in range(4) for b in range(a + 1, 4) if (a, b) != (0, 3)], n=4)
    assert oracle_min_vertex_cut(k4_minus, {0}, {3}) == (2, frozenset({1, 2}))
    assert oracle_min_vertex_cut(cycle(4), {0}, {2}) == (2, frozenset({1, 3}))


def test_balance_examples():
    g = path(7)
    assert oracle_balance(g, set(range(7)), alpha=Fraction(1, 2))
    assert not oracle_balance(g, set(), alpha=Fraction(99, 100))
    assert oracle_balance(g, {3}, alpha=Fraction(1, 2))
    assert not oracle_balance(path(8), {2}, alpha=Fraction(1, 2))
    assert oracle_balance(g, {1}, X={0: 1, 2: 1}, alpha=Fraction(1, 2))
