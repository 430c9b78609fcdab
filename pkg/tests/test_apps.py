import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tw_congest.apps import (GirthConfig, GirthTrace, Matching, MatchingTrace, NotBipartite, count_one_trial,
                             girth_directed, girth_undirected, max_matching, sample_labels, two_colouring)
from tw_congest.generators import make_instance
from tw_congest.graph import INF, MultiGraph, TreeDecomposition, derive_comm_graph
from tw_congest.network import Network
from tw_congest.oracles import oracle_girth, oracle_matching

from conftest import cycle, graph, path


def one_bag(g):
    return TreeDecomposition({(): set(g.vertices)})


def test_two_colouring():
    col = two_colouring(derive_comm_graph(path(5)))
    assert [col[v][1] for v in range(5)] == [0, 1, 0, 1, 0]
    with pytest.raises(NotBipartite):
        two_colouring(derive_comm_graph(cycle(5)))


def test_matching_examples():
    assert len(max_matching(path(4), td=one_bag(path(4)))) == 2
    star = graph([(0, 1), (0, 2), (0, 3)], n=4)
    assert len(max_matching(star, td=one_bag(star))) == 1
    with pytest.raises(NotBipartite):
        max_matching(cycle(3))


def test_matching_validity_helper():
    g = path(4)
    assert Matching.from_edges(g, {0, 2}).is_valid(g)
    assert not Matching.from_edges(g, {0, 1}).is_valid(g)


def test_augmentation_path_exercised():
    g = make_instance("bipartite-ktree", 60, 2, 0.8, seed=3)
    trace = MatchingTrace()
    m = max_matching(g, seed=3, leaf_size=6, trace=trace)
    assert len(m) == oracle_matching(g)
    assert trace.levels and trace.searches > 0
    assert trace.augmentations == len(trace.walks)
    for walk, nodes in zip(trace.walks, trace.walk_nodes):
        assert len(walk) % 2 == 1 and len(set(nodes)) == len(nodes)


@settings(max_examples=10, deadline=None)
@given(st.integers(4, 40), st.integers(1, 3), st.integers(0, 10**6))
def test_matching_matches_oracle(n, k, seed):
    g = make_instance("bipartite-ktree", n, k, 0.7, seed)
    m = max_matching(g, seed=seed, leaf_size=random.Random(seed).choice([4, 8, 100]))
    assert m.is_valid(g)
    assert len(m) == oracle_matching(g)


def test_girth_directed_examples():
    tri = graph([(0, 1), (1, 2), (2, 0)], n=3, directed=True, costs=[1, 2, 3])
    assert girth_directed(tri, one_bag(tri)) == 6
    dag = graph([(0, 1), (1, 2), (0, 2)], n=3, directed=True)
    assert girth_directed(dag, one_bag(dag)) == INF


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 60), st.integers(1, 3), st.integers(0, 10**6))
def test_girth_directed_matches_oracle(n, k, seed):
    g = make_instance("ktree", n, min(k, n - 1), 0.8, seed, weight_range=(1, 50), directed=True)
    assert girth_directed(g) == oracle_girth(g)


def test_girth_undirected_examples():
    tri = graph([(0, 1), (1, 2), (2, 0)], n=3, costs=[1, 2, 3])
    assert girth_undirected(tri, td=one_bag(tri), seed=1) == 6
    c4 = cycle(4)
    assert girth_undirected(c4, td=one_bag(c4), seed=1) == 4
    tree = graph([(0, 1), (1, 2), (1, 3)], n=4)
    assert girth_undirected(tree, td=one_bag(tree)) == INF


def test_girth_undirected_rejects_bad_input():
    with pytest.raises(ValueError):
        girth_undirected(graph([(0, 1), (0, 1)], n=2))
    with pytest.raises(ValueError):
        girth_undirected(graph([(0, 1), (1, 2), (2, 0)], n=3, costs=[0, 1, 1]))
    with pytest.raises(ValueError):
        girth_undirected(graph([(0, 1)], n=2, directed=True))


def test_girth_config():
    cfg = GirthConfig()
    assert list(cfg.exponents(16)) == list(range(10))
    assert cfg.trials(16) == 4 and GirthConfig(c1=3).trials(16) == 12


def test_sampling_probability():
    g = cycle(300)
    rng = random.Random(0)
    ones = sum(sum(sample_labels(g, 4, rng).values()) for _ in range(40))
    assert abs(ones / (300 * 40) - 1 / 12) < 0.01


@settings(max_examples=12, deadline=None)
@given(st.integers(3, 12), st.integers(0, 10**6))
def test_every_trial_is_an_upper_bound(n, seed):
    g = make_instance("ktree", n, 2, 0.8, seed, weight_range=(1, 9))
    truth = oracle_girth(g)
    rng = random.Random(seed)
    for c_hat in (1, 2, 4):
        bits = sample_labels(g, c_hat, rng)
        assert count_one_trial(g, bits, g.witness) >= truth


def test_girth_undirected_small_instances():
    exact = 0
    for seed in range(6):
        g = make_instance("ktree", 10, 2, 0.8, seed, weight_range=(1, 10))
        trace = GirthTrace()
        net = Network(g)
        value = girth_undirected(g, seed=seed, net=net, trace=trace)
        truth = oracle_girth(g)
        assert value >= truth
        assert all(v >= truth for _, _, v in trace.trials)
        exact += value == truth
        assert trace.rounds == net.stats.rounds
    assert exact >= 5
