from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tw_congest.generators import make_instance
from tw_congest.graph import WeightedMeasure, derive_comm_graph
from tw_congest.network import Network
from tw_congest.oracles import oracle_balance
from tw_congest.separator import (Disconnected, SepConfig, SplitError, SplitTree, find_balanced_separator,
                                  parallel_separators, profile, split)

from conftest import graph, path

DESK = SepConfig.desk()


def unit(vertices):
    return WeightedMeasure(frozenset(vertices))


def test_config_validation():
    assert SepConfig().alpha == Fraction(14399, 14400)
    assert SepConfig.paper().size_bound(4) == 400 * 16 // 2
    assert SepConfig.paper().iterations(300) == 301
    with pytest.raises(ValueError):
        SepConfig(alpha_num=5, alpha_den=4)
    with pytest.raises(ValueError):
        SepConfig(pair_samples=0)
    with pytest.raises(ValueError):
        profile("fast")


@pytest.mark.parametrize("t", [1, 2, 3])
def test_split_star(t):
    leaves = 12 * t
    tree = SplitTree(0, {0: 0, **{i: 0 for i in range(1, leaves + 1)}})
    muG = leaves + 1
    pieces = split(tree, unit(tree.vertices), muG, t)
    lo = Fraction(muG, 12 * t)
    assert all(p.root == 0 for p in pieces)
    sizes = sorted(len(p.vertices) for p in pieces)
    # every leaf alone is lighter than lo, so leaves are grouped with the hub
    assert all(lo <= s < 3 * lo for s in sizes)
    assert all(s < 2 * lo for s in sizes[:-1]) or len(sizes) == 1
    assert set().union(*(p.edges() for p in pieces)) == tree.edges()


@pytest.mark.parametrize("L", [6, 10, 11, 40])
def test_split_path_center_is_midpoint(L):
    tree = SplitTree(0, {i: max(i - 1, 0) for i in range(L + 1)})
    pieces = split(tree, unit(tree.vertices), L + 1, 1)
    assert {p.root for p in pieces} == {L // 2}


def test_split_precondition():
    tree = SplitTree(0, {0: 0, 1: 0, 2: 1})
    with pytest.raises(SplitError):
        split(tree, unit(tree.vertices), 100, 2)
    with pytest.raises(SplitError):
        split(SplitTree(0, {0: 0}), unit({0}), 1, 1)
    with pytest.raises(SplitError):
        split(SplitTree(0, {0: 0, 1: 0}), unit({0, 1}), 2, 1)


@given(st.integers(2, 60), st.integers(0, 10**6), st.integers(1, 4))
def test_split_postconditions_on_random_trees(n, seed, t):
    import random
    rng = random.Random(seed)
    parent = {0: 0}
    for v in range(1, n):
        parent[v] = rng.randrange(v)
    tree = SplitTree(0, parent)
    x = frozenset(v for v in range(n) if rng.random() < 0.7) or frozenset({0})
    mu = WeightedMeasure(x)
    muG = mu(tree.vertices)
    if 2 * muG <= 12 * t:
        with pytest.raises(SplitError):
            split(tree, mu, muG, t)
        return
    pieces = split(tree, mu, muG, t)
    lo = Fraction(muG, 12 * t)
    for p in pieces:
        assert lo <= mu(p.vertices) <= Fraction(5 * muG, 6)


def test_cutoff_returns_x():
    g = path(10)
    s = find_balanced_separator(g, x={1, 2, 3}, cfg=SepConfig.paper())
    assert set(s) == {1, 2, 3} and s.step == "cutoff" and s.t == 2


@pytest.mark.parametrize("n", [60, 200])
def test_long_path_balanced(n):
    g = path(n)
    s = find_balanced_separator(g, cfg=DESK, seed=3)
    assert oracle_balance(g, s, alpha=DESK.alpha)
    assert len(s) <= DESK.size_bound(s.t)
    assert s.step != "cutoff"


@pytest.mark.parametrize("n,cfg", [(12, SepConfig.paper()), (30, SepConfig.paper()), (20, DESK), (40, DESK)])
def test_clique_only_stops_at_cutoff(n, cfg):
    g = graph([(a, b) for a in range(n) for b in range(a + 1, n)], n=n)
    s = find_balanced_separator(g, cfg=cfg)
    assert s.step == "cutoff" and set(s) == set(range(n))
    assert list(s.tried) == [2 * 2 ** i for i in range(len(s.tried))]
    assert cfg.base_cutoff * s.t ** 2 >= n


def test_disconnected_rejected():
    g = graph([(0, 1), (2, 3)], n=4)
    with pytest.raises(Disconnected):
        find_balanced_separator(g, cfg=DESK)


def test_parallel_two_paths():
    g = graph([(i, i + 1) for i in range(59)] + [(i, i + 1) for i in range(60, 139)], n=140)
    parts = [set(range(60)), set(range(60, 140))]
    seps = parallel_separators(g, parts, cfg=DESK, seed=5)
    for p, s in zip(parts, seps):
        assert set(s) <= p
        sub = derive_comm_graph(g).subgraph(p)
        assert oracle_balance(sub, s, alpha=DESK.alpha)


def test_parallel_single_part_matches():
    g = make_instance("ktree", 120, 2, 0.8, seed=9)
    alone = find_balanced_separator(g, cfg=DESK, seed=4)
    (par,) = parallel_separators(g, [g.vertices], cfg=DESK, seed=4)
    assert set(alone) == set(par) and alone.t == par.t and alone.step == par.step


def test_parallel_singletons():
    g = path(5)
    seps = parallel_separators(g, [{v} for v in range(5)], xs=[{v} for v in range(5)], cfg=DESK)
    assert [set(s) for s in seps] == [{v} for v in range(5)]


def test_runs_are_deterministic():
    g = make_instance("ktree", 150, 3, 0.8, seed=2)
    a, b = (find_balanced_separator(g, cfg=DESK, seed=11, net=Network(g)) for _ in range(2))
    assert set(a) == set(b) and (a.t, a.step, a.tried, a.trials) == (b.t, b.step, b.tried, b.trials)
    na, nb = Network(g), Network(g)
    find_balanced_separator(g, cfg=DESK, seed=11, net=na)
    find_balanced_separator(g, cfg=DESK, seed=11, net=nb)
    assert na.stats == nb.stats


@settings(max_examples=15, deadline=None)
@given(st.integers(40, 160), st.integers(1, 3), st.integers(0, 10**6))
def test_separator_contract(n, k, seed):
    g = make_instance("ktree", n, k, 0.8, seed)
    x = {v for v in g.vertices if v % 3}
    s = find_balanced_separator(g, x=x, cfg=DESK, seed=seed)
    assert oracle_balance(g, s, X=x, alpha=DESK.alpha)
    assert len(s) <= DESK.size_bound(s.t)
