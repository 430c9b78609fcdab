"""Centralised reference implementations, used only for verification.

Nothing here calls the distributed code; the only shared pieces are the
graph types and the constraint objects' transition functions.
"""

from __future__ import annotations

import heapq
import itertools
from fractions import Fraction

import networkx as nx

from .graph import INF, MultiGraph
from .walks import BOT, INIT


def _dijkstra(out: dict, source) -> dict:
    dist = {source: 0}
    heap = [(0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, c in out.get(u, ()):
            nd = d + c
            if nd < dist.get(v, INF):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def _out_lists(g: MultiGraph, skip=None) -> dict:
    out: dict = {v: [] for v in g.vertices}
    for e, (u, v) in g.gamma.items():
        c = g.cost[e]
        if e == skip or c == INF:
            continue
        out[u].append((v, c))
        if not g.directed:
            out[v].append((u, c))
    return out


def oracle_apsp(g: MultiGraph) -> dict:
    """{(u, v): distance} over all ordered pairs, INF when unreachable."""
    out = _out_lists(g)
    res = {}
    for s in g.vertices:
        d = _dijkstra(out, s)
        for t in g.vertices:
            res[(s, t)] = d.get(t, INF)
    return res


def oracle_matching(g: MultiGraph) -> int:
    """Maximum matching cardinality of a bipartite graph (Hopcroft-Karp)."""
    G = nx.Graph()
    G.add_nodes_from(g.vertices)
    G.add_edges_from((u, v) for u, v in g.gamma.values() if u != v)
    if not nx.is_bipartite(G):
        raise ValueError("graph is not bipartite")
    total = 0
    for comp in nx.connected_components(G):
        if len(comp) < 2:
            continue
        sub = G.subgraph(comp)
        left, _ = nx.bipartite.sets(sub)
        total += len(nx.bipartite.hopcroft_karp_matching(sub, top_nodes=left)) // 2
    return total


def oracle_girth(g: MultiGraph) -> float:
    """Weight of the shortest simple cycle (INF when there is none).

    Directed: min over arcs (u, v) of c + d(v, u).  Undirected: min over
    edges of c + d(u, v) in the graph without that edge; a self-loop is a
    cycle of its own weight, and parallel edges form 2-cycles.
    """
    best = INF
    if g.directed:
        out = _out_lists(g)
        cache: dict = {}
        for e, (u, v) in g.gamma.items():
            c = g.cost[e]
            if c == INF:
                continue
            if v not in cache:
                cache[v] = _dijkstra(out, v)
            best = min(best, c + cache[v].get(u, INF))
        return best
    for e, (u, v) in g.gamma.items():
        c = g.cost[e]
        if c == INF:
            continue
        if u == v:
            best = min(best, c)
            continue
        d = _dijkstra(_out_lists(g, skip=e), u).get(v, INF)
        best = min(best, c + d)
    return best


def shortest_cycle_edges(g: MultiGraph) -> set:
    """Edges of an undirected graph lying on at least one shortest cycle."""
    girth = oracle_girth(g)
    if girth == INF:
        return set()
    return {e for e, (u, v) in g.gamma.items()
            if g.cost[e] + _dijkstra(_out_lists(g, skip=e), u).get(v, INF) == girth}


def oracle_constrained_walks(g: MultiGraph, c, max_len: int) -> dict:
    """{(s, t, q): weight} of the lightest walk of at most ``max_len`` edges
    from s to t whose folded state is q (the reject state is never listed)."""
    out: dict = {v: [] for v in g.vertices}
    for e, (u, v) in g.gamma.items():
        if g.cost[e] == INF:
            continue
        out[u].append((e, v, g.cost[e]))
        if not g.directed and u != v:
            out[v].append((e, u, g.cost[e]))
    best = {}
    for s in g.vertices:
        layer = {(s, INIT): 0}
        best[(s, s, INIT)] = 0
        for _ in range(max_len):
            nxt: dict = {}
            for (x, q), d in layer.items():
                for e, v, w in out[x]:
                    r = c.delta(e, q)
                    if r == BOT:
                        continue
                    if d + w < nxt.get((v, r), INF):
                        nxt[(v, r)] = d + w
            for (v, r), d in nxt.items():
                if d < best.get((s, v, r), INF):
                    best[(s, v, r)] = d
            layer = nxt
            if not layer:
                break
    return best


def oracle_min_vertex_cut(g, X, Y) -> tuple:
    """Smallest vertex set outside X and Y meeting every X-Y path.

    Returns (size, witness).  Touching sets (sharing a vertex or joined by
    an edge) have no such cut and give (INF, None).  Exhaustive search.
    """
    adj = _adjacency(g)
    X, Y = set(X), set(Y)
    if X & Y or any(w in Y for x in X for w in adj[x]):
        return INF, None
    vertices = sorted(set(adj) - X - Y)
    for size in range(len(vertices) + 1):
        for cut in itertools.combinations(vertices, size):
            cut = set(cut)
            if not _reaches(adj, X - cut, Y - cut, cut):
                return size, frozenset(cut)
    return INF, None  # pragma: no cover - removing everything always separates


def _adjacency(g) -> dict:
    if isinstance(g, MultiGraph):
        adj = {v: set() for v in g.vertices}
        for u, v in g.gamma.values():
            if u != v:
                adj[u].add(v)
                adj[v].add(u)
        return adj
    return {v: set(ws) for v, ws in g.adjacency.items()}


def _reaches(adj, src, dst, removed) -> bool:
    seen = set(src)
    stack = list(src)
    while stack:
        u = stack.pop()
        if u in dst:
            return True
        for w in adj[u]:
            if w not in seen and w not in removed:
                seen.add(w)
                stack.append(w)
    return False


def oracle_balance(g, S, X=None, alpha=Fraction(1, 2)) -> bool:
    """Whether every component of g - S holds at most an alpha share of X.

    ``X`` is a vertex set (uniform weights) or a {vertex: weight} mapping;
    it defaults to all vertices.  An X of zero total is vacuously balanced.
    """
    adj = _adjacency(g)
    if X is None:
        X = {v: 1 for v in adj}
    elif not isinstance(X, dict):
        X = {v: 1 for v in X}
    total = sum(X.values())
    if total == 0:
        return True
    S = set(S)
    seen = set(S)
    for v in adj:
        if v in seen:
            continue
        seen.add(v)
        stack, weight = [v], 0
        while stack:
            u = stack.pop()
            weight += X.get(u, 0)
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if Fraction(weight, 1) > Fraction(alpha) * total:
            return False
    return True
