import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tw_congest import primitives as pr
from tw_congest.generators import make_instance
from tw_congest.graph import INF, CommGraph, derive_comm_graph
from tw_congest.network import Network
from tw_congest.oracles import oracle_min_vertex_cut

from conftest import cycle, graph, path


def comm(g):
    return derive_comm_graph(g)


def coll_of(c, *sets):
    return pr.NearDisjointCollection([pr.Part.induced(c, s) for s in sets])


def components(c, vertices, edges):
    """Union-find components of (vertices, edges): vertex -> smallest member."""
    up = {v: v for v in vertices}

    def find(v):
        while up[v] != v:
            up[v] = up[up[v]]
            v = up[v]
        return v

    for u, v in edges:
        a, b = find(u), find(v)
        if a != b:
            up[max(a, b)] = min(a, b)
    roots = {v: find(v) for v in vertices}
    least = {}
    for v, r in roots.items():
        least[r] = min(least.get(r, v), v)
    return {v: least[r] for v, r in roots.items()}


def random_collection(seed, n=30, parts=3):
    """A connected graph and a few disjoint connected parts plus shared boundary vertices."""
    rng = random.Random(seed)
    g = make_instance("ktree", n, 2, 0.8, seed)
    c = comm(g)
    free = set(c.vertices)
    sets = []
    for _ in range(parts):
        if not free:
            break
        start = rng.choice(sorted(free))
        grown = {start}
        frontier = [start]
        target = rng.randint(1, max(1, n // parts))
        while frontier and len(grown) < target:
            u = frontier.pop(rng.randrange(len(frontier)))
            for w in sorted(c.adjacency[u] & free - grown):
                if len(grown) < target:
                    grown.add(w)
                    frontier.append(w)
        free -= grown
        sets.append(grown)
    return c, sets


def test_pa_sum_on_path():
    c = comm(path(3))
    out = pr.pa(Network(c), coll_of(c, {0, 1, 2}), {0: 1, 1: 2, 2: 3}, "sum")
    assert all(out[v][0] == 6 for v in range(3))


def test_pa_parts_sharing_a_vertex():
    # two triangles glued at vertex 0; 0 is in both parts but outside both cores
    g = graph([(0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (4, 0)], n=5)
    c = comm(g)
    coll = coll_of(c, {0, 1, 2}, {0, 3, 4})
    assert coll.cores == [frozenset({1, 2}), frozenset({3, 4})]
    vals = {(0, 0): 10, (1, 0): 1, (2, 0): 2, (0, 1): 20, (3, 1): 3, (4, 1): 4}
    out = pr.pa(Network(c), coll, vals, "sum")
    assert out[0] == {0: 13, 1: 27}
    assert out[1][0] == 13 and out[4][1] == 27


def test_pa_min_singletons():
    c = comm(path(4))
    coll = coll_of(c, {0}, {1}, {2}, {3})
    out = pr.pa(Network(c), coll, {0: 5, 1: 3, 2: 8, 3: 1}, "min")
    assert {v: out[v][v] for v in range(4)} == {0: 5, 1: 3, 2: 8, 3: 1}


def test_invalid_collection_detected():
    c = comm(path(4))
    with pytest.raises(pr.InvalidCollection):
        pr.pa(Network(c), coll_of(c, {0, 2}), {}, "sum")
    # the edge (1, 2) has both ends in two parts
    with pytest.raises(pr.InvalidCollection):
        pr.pa(Network(c), coll_of(c, {0, 1, 2}, {1, 2, 3}), {}, "sum")


@given(st.integers(0, 10**6), st.sampled_from(["sum", "min", "max"]))
def test_pa_matches_direct_aggregation(seed, op):
    c, sets = random_collection(seed)
    coll = coll_of(c, *sets)
    rng = random.Random(seed)
    vals = {v: rng.randint(0, 1000) for v in c.vertices}
    out = pr.pa(Network(c), coll, vals, op)
    f = {"sum": sum, "min": min, "max": max}[op]
    for i, s in enumerate(sets):
        want = f(vals[v] for v in s)
        assert all(out[v][i] == want for v in s)


def test_rst_examples():
    c = comm(path(5))
    f = pr.rst(Network(c), coll_of(c, {2}), {0: 2})
    assert f.parent[(2, 0)] == 2
    f = pr.rst(Network(c), coll_of(c, set(range(5))), {0: 0})
    assert [f.parent[(v, 0)] for v in range(5)] == [0, 0, 1, 2, 3]
    c4 = comm(cycle(4))
    f = pr.rst(Network(c4), coll_of(c4, set(range(4))), {0: 3})
    edges = {(min(v, p), max(v, p)) for (v, _), p in f.parent.items() if v != p}
    assert len(edges) == 3 and all(p in c4.adjacency[v] for (v, _), p in f.parent.items() if v != p)
    for v in range(4):
        seen = set()
        while v != 3:
            assert v not in seen
            seen.add(v)
            v = f.parent[(v, 0)]


@given(st.integers(0, 10**6))
def test_rst_spans_every_part(seed):
    c, sets = random_collection(seed)
    coll = coll_of(c, *sets)
    roots = {i: max(s) for i, s in enumerate(sets)}
    f = pr.rst(Network(c), coll, roots)
    for i, s in enumerate(sets):
        assert f.members(i) == sorted(s)
        for v in s:
            steps = 0
            while v != roots[i]:
                p = f.parent[(v, i)]
                assert p in c.adjacency[v] and p in s
                v = p
                steps += 1
                assert steps <= len(s)


def test_sta_examples():
    c = comm(graph([(0, 1), (0, 2), (0, 3), (2, 4)], n=5))
    tree = {0: {0: 0, 1: 0, 2: 0, 3: 0, 4: 2}}
    sizes = pr.sta(Network(c), tree, lambda v, i: 1, "sum")
    assert {v: sizes[v][0] for v in range(5)} == {0: 5, 1: 1, 2: 2, 3: 1, 4: 1}
    best = pr.sta(Network(c), tree, {0: 1, 1: 7, 2: 3, 3: 2, 4: 9}, "max")
    assert best[0][0] == 9 and best[1][0] == 7


def test_sta_rejects_non_trees():
    c = comm(cycle(3))
    with pytest.raises(pr.NotATree):
        pr.sta(Network(c), {0: {0: 1, 1: 2, 2: 0}}, {})
    with pytest.raises(pr.NotATree):
        pr.sta(Network(c), {0: {0: 0, 1: 1}}, {})


def test_sle_examples():
    c = comm(path(6))
    coll = coll_of(c, {0, 1, 2}, {3, 4, 5})
    net = Network(c)
    assert pr.sle(net, coll, {0: [1], 1: [5]})[0][0] == 1
    out = pr.sle(net, coll, {0: [0, 1, 2], 1: [3, 4, 5]})
    assert out[2][0] == 0 and out[5][1] == 3
    with pytest.raises(pr.NoCandidate):
        pr.sle(net, coll, {0: [1]})


@given(st.integers(0, 10**6))
def test_sle_picks_minimum_candidate(seed):
    c, sets = random_collection(seed)
    rng = random.Random(seed)
    cands = {i: rng.sample(sorted(s), rng.randint(1, len(s))) for i, s in enumerate(sets)}
    out = pr.sle(Network(c), coll_of(c, *sets), cands)
    for i, s in enumerate(sets):
        assert all(out[v][i] == min(cands[i]) for v in s)


def test_ccd_examples():
    c = comm(path(4))
    coll = coll_of(c, set(range(4)))
    net = Network(c)
    assert {v: r[0] for v, r in pr.ccd(net, coll, {0: [(0, 1), (1, 2), (2, 3)]}).items()} == {v: 0 for v in range(4)}
    assert {v: r[0] for v, r in pr.ccd(net, coll, {0: []}).items()} == {v: v for v in range(4)}
    assert {v: r[0] for v, r in pr.ccd(net, coll, {0: [(0, 1), (2, 3)]}).items()} == {0: 0, 1: 0, 2: 2, 3: 2}


@given(st.integers(0, 10**6))
def test_ccd_matches_union_find(seed):
    c, sets = random_collection(seed)
    coll = coll_of(c, *sets)
    rng = random.Random(seed)
    ind = {i: [e for e in p.edges() if rng.random() < 0.6] for i, p in enumerate(coll.parts)}
    out = pr.ccd(Network(c), coll, ind)
    for i, s in enumerate(sets):
        want = components(c, s, ind[i])
        assert {v: out[v][i] for v in s} == want


def test_bct_examples():
    c = comm(graph([(0, 1), (0, 2), (0, 3)], n=4))
    coll = coll_of(c, {0, 1, 2, 3})
    net = Network(c)
    one = pr.bct(net, coll, 1, {0: [(2, 9)]})
    assert all(one[v][0] == [(2, 9)] for v in range(4))
    same = pr.bct(net, coll, 3, {0: [(1, 5), (1, 6), (1, 7)]})
    assert all(same[v][0] == [(1, 5), (1, 6), (1, 7)] for v in range(4))
    leaves = pr.bct(net, coll, 3, {0: [(1, 1), (2, 2), (3, 3)]})
    assert leaves[0][0] == [(1, 1), (2, 2), (3, 3)]
    with pytest.raises(pr.TooManySources):
        pr.bct(net, coll, 1, {0: [(1, 1), (2, 2)]})


def test_bct_rounds_grow_additively():
    c = comm(path(20))
    coll = coll_of(c, set(range(20)))
    rounds = []
    for h in (10, 20, 40, 80):
        net = Network(c)
        pr.bct(net, coll, h, {0: [(19, (k, k)) for k in range(h)]})
        rounds.append(net.stats.rounds)
    slopes = [(b - a) / 10 for a, b in zip(rounds, rounds[1:])]
    # additive in h: the extra cost per message stays bounded instead of scaling with the path length
    assert rounds[-1] < 19 * 80
    assert all(s <= 2 for s in slopes), rounds


def test_mvc_examples():
    c = comm(path(3))
    net = Network(c)
    coll = coll_of(c, {0, 1, 2})
    assert pr.mvc(net, coll, 1, 1, {0: [({0}, {2})]}) == {(0, 0): frozenset({1})}
    assert pr.mvc(net, coll, 1, 1, {0: [({0}, {1})]}) == {(0, 0): -1}
    k4 = comm(graph([(a, b) for a in range(4) for b in range(a + 1, 4) if (a, b) != (0, 3)], n=4))
    coll4 = coll_of(k4, set(range(4)))
    assert pr.mvc(Network(k4), coll4, 1, 1, {0: [({0}, {3})]}) == {(0, 0): -1}
    assert pr.mvc(Network(k4), coll4, 1, 2, {0: [({0}, {3})]}) == {(0, 0): frozenset({1, 2})}
    with pytest.raises(pr.InvalidPair):
        pr.mvc(net, coll, 1, 1, {0: [({0, 1}, {1})]})


@given(st.integers(0, 10**6), st.integers(0, 4))
def test_mvc_agrees_with_brute_force(seed, t):
    rng = random.Random(seed)
    g = make_instance("ktree", rng.randint(4, 11), rng.randint(1, 3), 0.8, seed)
    c = comm(g)
    vs = sorted(c.vertices)
    X = set(rng.sample(vs, rng.randint(1, 2)))
    rest = [v for v in vs if v not in X]
    Y = set(rng.sample(rest, rng.randint(1, min(2, len(rest)))))
    res = pr.mvc(Network(c), coll_of(c, set(vs)), 1, t, {0: [(X, Y)]})[(0, 0)]
    size, _ = oracle_min_vertex_cut(c, X, Y)
    if size == INF or size > t:
        assert res == -1
    else:
        assert res != -1 and len(res) <= t
        assert not res & (X | Y)
        left = c.subgraph(c.vertices - res)
        reach = set()
        for x in X:
            reach |= set(left.bfs_distances(x))
        assert not reach & Y


def test_neighbor_exchange_long_payloads():
    c = comm(path(3))
    net = Network(c)
    payload = tuple(range(200))
    got = pr.neighbor_exchange(net, {0: {1: payload}, 2: {1: (7,)}})
    assert got[1] == {0: payload, 2: (7,)}
    assert net.stats.rounds > 1


def test_empty_network_collection():
    c = CommGraph({0}, {0: set()})
    out = pr.pa(Network(c), coll_of(c, {0}), {0: 4}, "sum")
    assert out[0][0] == 4
