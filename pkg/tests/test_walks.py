import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tw_congest.generators import make_instance
from tw_congest.graph import INF, MultiGraph, TreeDecomposition, derive_comm_graph, validate_tree_decomposition
from tw_congest.oracles import oracle_constrained_walks
from tw_congest.walks import (BOT, INIT, ColoredConstraint, CountConstraint, InvalidState, MalformedConstraint,
                              StatefulConstraint, Unreachable, build_product_graph, cdl_build, cdl_decode,
                              constrained_distance, extract_constrained_walk)

from conftest import graph, path


def one_bag(g):
    return TreeDecomposition({(): set(g.vertices)})


def walk_weight(g, edges):
    return sum(g.cost[e] for e in edges)


def is_walk(g, s, t, edges):
    at = s
    for e in edges:
        u, v = g.gamma[e]
        if u == at:
            at = v
        elif v == at and not g.directed:
            at = u
        else:
            return False
    return at == t


def small_random_graph(rng, n_max=7, directed=False, max_w=5):
    n = rng.randint(1, n_max)
    g = MultiGraph(set(range(n)), directed=directed)
    for v in range(1, n):
        g.add_edge(rng.randrange(v), v, rng.randint(1, max_w))
    for _ in range(rng.randint(0, n)):
        u, v = rng.randrange(n), rng.randrange(n)
        if u != v:
            g.add_edge(u, v, rng.randint(1, max_w))
    return g


def random_constraint(rng, g):
    if rng.random() < 0.5:
        palette = list(range(rng.randint(1, 3)))
        return ColoredConstraint({e: rng.choice(palette) for e in g.gamma}, palette)
    return CountConstraint({e: rng.randint(0, 1) for e in g.gamma}, rng.randint(0, 2))


def test_fold_and_reject_state():
    c = ColoredConstraint({0: "r", 1: "r", 2: "b"})
    assert c.fold([]) == INIT
    assert c.fold([0, 2, 1]) == "r"
    assert c.fold([0, 1]) == BOT and c.fold([0, 1, 2]) == BOT
    k = CountConstraint({0: 1, 1: 0, 2: 1}, 1)
    assert k.fold([1]) == 0 and k.fold([0, 1]) == 1 and k.fold([0, 2]) == BOT


def test_malformed_constraints():
    with pytest.raises(MalformedConstraint):
        StatefulConstraint(["a"], {0: {BOT: "a"}}).validate()
    with pytest.raises(MalformedConstraint):
        StatefulConstraint(["a"], {0: {"a": INIT}}).validate()
    with pytest.raises(MalformedConstraint):
        CountConstraint({0: 2}, 1)
    with pytest.raises(MalformedConstraint):
        ColoredConstraint({0: 5}, palette=[0, 1])
    g = graph([(0, 1)], n=2)
    with pytest.raises(MalformedConstraint):
        build_product_graph(g, StatefulConstraint(["a"], {0: {BOT: "a"}}))


def test_text_format_round_trip():
    c = StatefulConstraint(["a", "b"], {0: {INIT: "a", "a": "b"}, 1: {"b": "a"}})
    text = c.to_text()
    d = StatefulConstraint.from_text(text)
    assert d.states == c.states
    for e in (0, 1):
        assert d.table(e) == c.table(e)
    e = StatefulConstraint.from_text("states 0 1\n# comment\n0: ▽->0 0->1\n")
    assert e.delta(0, INIT) == 0 and e.delta(0, 1) == BOT
    with pytest.raises(MalformedConstraint):
        StatefulConstraint.from_text("0: a->b\n")


def test_monochromatic_path_rejected():
    g = path(3)
    c = ColoredConstraint({0: 0, 1: 0}, palette=[0])
    assert constrained_distance(g, c, 0, 2, 0) == INF
    assert constrained_distance(g, c, 0, 1, 0) == 1


def test_count_single_edge_transition():
    g = graph([(0, 1)], n=2, directed=True)
    c = CountConstraint({0: 1}, 1)
    pg = build_product_graph(g, c)
    arcs = {(pg.pair[u], pg.pair[v]) for _, u, v, _ in pg.graph.arcs()}
    assert ((0, INIT), (1, 1)) in arcs


@given(st.integers(0, 10**6))
def test_product_cardinality(seed):
    rng = random.Random(seed)
    g = small_random_graph(rng, 12)
    c = random_constraint(rng, g)
    pg = build_product_graph(g, c)
    assert len(pg.pair) == len(c.states) * g.n
    for _, u, v, cost in pg.graph.arcs():
        (a, q), (b, r) = pg.pair[u], pg.pair[v]
        if a == b and r == BOT and cost == 0:
            continue
        assert any(g.cost[e] == cost and c.delta(e, q) == r and {a, b} == set(g.gamma[e])
                   for e in g.gamma)


def test_constrained_distance_examples():
    g = path(4)
    assert constrained_distance(g, ColoredConstraint({0: 0}), 2, 2, INIT) == 0
    with pytest.raises(InvalidState):
        constrained_distance(g, ColoredConstraint({0: 0}), 0, 1, BOT)
    tri = graph([(0, 1), (1, 2), (2, 0)], n=3, costs=[2, 3, 4])
    c = CountConstraint({0: 1, 1: 0, 2: 0}, 1)
    want = min(w for (s, t, q), w in oracle_constrained_walks(tri, c, 6).items() if s == t == 0 and q == 1)
    assert constrained_distance(tri, c, 0, 0, 1) == want == 9
    alt = path(4)
    m = ColoredConstraint({0: "m", 1: "u", 2: "m"})
    assert constrained_distance(alt, m, 0, 3, "m") == 3
    assert oracle_constrained_walks(alt, m, 3)[(0, 3, "m")] == 3


def test_cdl_examples():
    g = make_instance("ktree", 12, 2, 0.8, seed=1, weight_range=(1, 5))
    c = CountConstraint({e: int(e % 3 == 0) for e in g.gamma}, 1)
    labels = cdl_build(g, c)
    v = min(g.vertices)
    assert cdl_decode(INIT, labels[v], labels[v]) == 0
    with pytest.raises(InvalidState):
        cdl_decode(BOT, labels[v], labels[v])
    zero = CountConstraint({e: 0 for e in g.gamma}, 1)
    zl = cdl_build(g, zero)
    assert all(cdl_decode(1, zl[v], zl[u]) == INF for u in g.vertices)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.booleans())
def test_cdl_matches_product_dijkstra(seed, directed):
    rng = random.Random(seed)
    g = small_random_graph(rng, 7, directed)
    c = random_constraint(rng, g)
    labels = cdl_build(g, c, one_bag(g))
    pg = labels.pg
    full = oracle_constrained_walks(g, c, len(pg.pair))
    short = oracle_constrained_walks(g, c, 8)
    for s, t in itertools.product(g.vertices, repeat=2):
        for q in c.states:
            if q == BOT:
                continue
            d = constrained_distance(g, c, s, t, q, pg)
            assert cdl_decode(q, labels[s], labels[t]) == d
            assert full.get((s, t, q), INF) == d
            assert short.get((s, t, q), INF) >= d


def test_extract_examples():
    g = path(4)
    m = ColoredConstraint({0: "m", 1: "u", 2: "m"})
    w = extract_constrained_walk(g, m, 0, 3, "m", td=one_bag(g))
    assert w.edges == [0, 1, 2] and w.distance == 3
    assert w.nodes == [(0, INIT), (1, "m"), (2, "u"), (3, "m")]
    assert w.outputs[(3, "m")] == (3, (2, "u"))
    one = extract_constrained_walk(g, m, 1, 2, "u", td=one_bag(g))
    assert one.edges == [1]
    empty = extract_constrained_walk(g, m, 2, 2, INIT, td=one_bag(g))
    assert empty.edges == [] and empty.distance == 0
    with pytest.raises(Unreachable):
        extract_constrained_walk(g, m, 0, 3, "u", td=one_bag(g))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_extracted_walks_are_shortest(seed):
    rng = random.Random(seed)
    g = small_random_graph(rng, 8, rng.random() < 0.5)
    c = random_constraint(rng, g)
    labels = cdl_build(g, c, one_bag(g))
    s, t = rng.choice(sorted(g.vertices)), rng.choice(sorted(g.vertices))
    for q in c.states:
        if q == BOT:
            continue
        d = constrained_distance(g, c, s, t, q, labels.pg)
        if d == INF:
            with pytest.raises(Unreachable):
                extract_constrained_walk(g, c, s, t, q, labels)
            continue
        w = extract_constrained_walk(g, c, s, t, q, labels)
        assert w.distance == d == walk_weight(g, w.edges)
        assert is_walk(g, s, t, w.edges) and c.fold(w.edges) == q
        for a, b in zip(w.nodes, w.nodes[1:]):
            assert w.outputs[b][1] == a


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 40), st.integers(1, 3), st.integers(0, 10**6))
def test_lift_width_and_diameter(n, k, seed):
    rng = random.Random(seed)
    g = make_instance("ktree", n, min(k, n - 1), 0.8, seed, weight_range=(1, 3), directed=rng.random() < 0.5)
    c = random_constraint(rng, g)
    pg = build_product_graph(g, c)
    lifted = pg.lift(g.witness)
    rep = validate_tree_decomposition(pg.graph, lifted)
    assert rep["valid"]
    w = g.witness.width()
    assert rep["width"] <= (w + 1) * (len(c.states) + 1) - 1
    assert pg.comm.diameter() <= derive_comm_graph(g).diameter() + 2
