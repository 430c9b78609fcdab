"""Seeded instance generators, each returning a graph with a witness decomposition."""

from __future__ import annotations

import random

from .graph import MultiGraph, TreeDecomposition, derive_comm_graph


def _weights(rng: random.Random, weight_range: tuple) -> int:
    lo, hi = weight_range
    return rng.randint(lo, hi)


def _assemble(n: int, pairs: list, rng: random.Random, weight_range: tuple, directed: bool,
              bags: dict) -> MultiGraph:
    g = MultiGraph(set(range(n)), directed=directed)
    eid = 0
    for u, v in pairs:
        if directed:
            mode = rng.randrange(3)
            ends = [(u, v)] if mode == 0 else [(v, u)] if mode == 1 else [(u, v), (v, u)]
        else:
            ends = [(u, v)]
        for a, b in ends:
            g.add_edge(a, b, _weights(rng, weight_range), eid)
            eid += 1
    g.witness = TreeDecomposition(bags)
    return g


def generate_partial_ktree(n: int, k: int, keep_prob: float = 1.0, weight_range: tuple = (1, 1),
                           seed: int = 0, directed: bool = False) -> MultiGraph:
    """Random k-tree on ``n`` vertices with each edge kept independently.

    The k-tree starts from a (k+1)-clique; every further vertex joins a
    k-clique taken from a random existing bag.  The bags of the construction
    form the witness decomposition (width k).  Vertex labels are shuffled so
    that ids carry no structural information.  With ``directed`` every kept
    edge is oriented one way or both ways uniformly at random.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if k < 0 or k >= n:
        raise ValueError(f"need 0 <= k < n, got k={k}, n={n}")
    if not 0 <= keep_prob <= 1:
        raise ValueError("keep_prob must lie in [0, 1]")
    rng = random.Random(seed)
    label = list(range(n))
    rng.shuffle(label)

    bag_list = [(tuple(), list(range(k + 1)))]
    kids = [0]
    edges = [(a, b) for a in range(k + 1) for b in range(a + 1, k + 1)]
    for v in range(k + 1, n):
        pi = rng.randrange(len(bag_list))
        parent_id, parent_bag = bag_list[pi]
        drop = rng.randrange(len(parent_bag)) if k > 0 else None
        clique = [w for i, w in enumerate(parent_bag) if i != drop] if k > 0 else []
        edges.extend((w, v) for w in clique)
        child_id = parent_id + (kids[pi],)
        kids[pi] += 1
        bag_list.append((child_id, clique + [v]))
        kids.append(0)

    kept = [(label[a], label[b]) for a, b in edges if keep_prob >= 1 or rng.random() < keep_prob]
    kept = [(min(a, b), max(a, b)) for a, b in kept]
    bags = {x: {label[w] for w in b} for x, b in bag_list}
    return _assemble(n, kept, rng, weight_range, directed, bags)


def generate_bipartite_partial_ktree(n: int, k: int, keep_prob: float = 1.0, seed: int = 0) -> MultiGraph:
    """Partial k-tree restricted to the edges across a random two-colouring."""
    base = generate_partial_ktree(n, k, keep_prob, (1, 1), seed)
    rng = random.Random(seed ^ 0x5EED)
    side = {v: rng.randrange(2) for v in sorted(base.vertices)}
    g = MultiGraph(set(base.vertices), witness=base.witness)
    for eid in sorted(base.gamma):
        u, v = base.gamma[eid]
        if side[u] != side[v]:
            g.add_edge(u, v, 1, eid)
    return g


def path_graph(n: int, weight_range: tuple = (1, 1), seed: int = 0, directed: bool = False) -> MultiGraph:
    rng = random.Random(seed)
    pairs = [(i, i + 1) for i in range(n - 1)]
    if n == 1:
        bags = {(): {0}}
    else:
        bags = {(0,) * i: {i, i + 1} for i in range(n - 1)}
    return _assemble(n, pairs, rng, weight_range, directed, bags)


def cycle_graph(n: int, weight_range: tuple = (1, 1), seed: int = 0, directed: bool = False) -> MultiGraph:
    if n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    rng = random.Random(seed)
    pairs = [(i, i + 1) for i in range(n - 1)] + [(0, n - 1)]
    bags = {(0,) * (i - 1): {0, i, i + 1} for i in range(1, n - 1)}
    return _assemble(n, pairs, rng, weight_range, directed, bags)


def grid_graph(rows: int, cols: int, weight_range: tuple = (1, 1), seed: int = 0,
               directed: bool = False) -> MultiGraph:
    rng = random.Random(seed)
    vid = lambda r, c: r * cols + c  # noqa: E731
    pairs = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                pairs.append((vid(r, c), vid(r, c + 1)))
            if r + 1 < rows:
                pairs.append((vid(r, c), vid(r + 1, c)))
    # sweep row-major; each bag holds a window of cols + 1 consecutive ids
    n = rows * cols
    if n <= cols + 1:
        bags = {(): set(range(n))}
    else:
        bags = {(0,) * i: set(range(i, i + cols + 1)) for i in range(n - cols)}
    return _assemble(n, pairs, rng, weight_range, directed, bags)


def star_graph(n: int, weight_range: tuple = (1, 1), seed: int = 0, directed: bool = False) -> MultiGraph:
    rng = random.Random(seed)
    pairs = [(0, i) for i in range(1, n)]
    bags = {(): {0}}
    bags.update({(i - 1,): {0, i} for i in range(1, n)})
    return _assemble(n, pairs, rng, weight_range, directed, bags)


def largest_component(g: MultiGraph) -> MultiGraph:
    """Induced subgraph on the largest connected component, relabelled to 0..n'-1."""
    comps = derive_comm_graph(g).components()
    keep = max(comps, key=lambda c: (len(c), -min(c)))
    order = sorted(keep)
    relabel = {v: i for i, v in enumerate(order)}
    h = MultiGraph(set(range(len(order))), directed=g.directed)
    for eid in sorted(g.gamma):
        u, v = g.gamma[eid]
        if u in relabel and v in relabel:
            h.add_edge(relabel[u], relabel[v], g.cost[eid], eid)
    if g.witness is not None:
        bags = {x: {relabel[w] for w in b if w in relabel} for x, b in g.witness.bags.items()}
        h.witness = TreeDecomposition(bags)
    return h


FAMILIES = ("ktree", "path", "cycle", "grid", "star", "bipartite-ktree")


def make_instance(family: str, n: int, k: int = 2, keep_prob: float = 1.0, seed: int = 0,
                  weight_range: tuple = (1, 1), directed: bool = False) -> MultiGraph:
    """Build one instance of a named family (connected for every family)."""
    if family == "ktree":
        g = generate_partial_ktree(n, k, keep_prob, weight_range, seed, directed)
        return largest_component(g) if keep_prob < 1 else g
    if family == "bipartite-ktree":
        return largest_component(generate_bipartite_partial_ktree(n, k, keep_prob, seed))
    if family == "path":
        return path_graph(n, weight_range, seed, directed)
    if family == "cycle":
        return cycle_graph(n, weight_range, seed, directed)
    if family == "grid":
        cols = max(1, int(round(n ** 0.5)))
        return grid_graph(max(1, n // cols), cols, weight_range, seed, directed)
    if family == "star":
        return star_graph(n, weight_range, seed, directed)
    raise ValueError(f"unknown family {family!r}")
