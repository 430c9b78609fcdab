"""Exact directed distance labels built bottom-up over a tree decomposition.

Terminology used below, for a node ``x`` of a structured decomposition
(see :func:`~.graph.structured_decomposition`):

* ``core(x)``: vertices below ``x`` that are not in the parent bag;
* ``G*_x``: edges touching ``core(x)`` plus the edges inside ``B_x``;
* ``H_x``: the graph on ``B_x`` whose arc costs are the minimum of the
  direct edge cost and the ``G*`` distance inside any child that contains
  both ends.  Distances in ``H_x`` equal distances in ``G*_x`` between
  vertices of ``B_x``.

Bottom-up, every vertex ``u`` of ``core(x) | B_x`` learns ``d_{G*_x}(u, s)``
and ``d_{G*_x}(s, u)`` for all ``s`` in ``B_x``.  Afterwards a top-down pass
turns these into exact distances in ``G`` for every hub of ``u``.
"""

from __future__ import annotations

import heapq
from collections import defaultdict
from dataclasses import dataclass, field

from . import primitives as prim
from . import sim
from .graph import (INF, GraphError, MultiGraph, TreeDecomposition, derive_comm_graph,
                    restrict_decomposition, structured_decomposition, validate_tree_decomposition)
from .network import Network


class InvalidDecomposition(ValueError):
    pass


class DisjointHubSets(RuntimeError):
    pass


@dataclass
class DistanceLabel:
    owner: int
    fwd: dict = field(default_factory=dict)   # hub -> d(owner, hub)
    bwd: dict = field(default_factory=dict)   # hub -> d(hub, owner)
    component: int = 0

    @property
    def hubs(self) -> set:
        return set(self.fwd)

    def triples(self) -> set:
        out = {(self.owner, s, d) for s, d in self.fwd.items()}
        out |= {(s, self.owner, d) for s, d in self.bwd.items()}
        return out

    def __len__(self) -> int:
        return len(self.fwd) + len(self.bwd)

    def to_text(self) -> str:
        def fmt(d):
            return "inf" if d == INF else str(d)
        rows = [f"label {self.owner} {self.component}"]
        rows += [f"{a} {b} {fmt(d)}" for a, b, d in sorted(self.triples(), key=lambda t: (t[0], t[1]))]
        return "\n".join(rows) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "DistanceLabel":
        lines = [ln.split() for ln in text.splitlines() if ln.strip()]
        _, owner, comp = lines[0]
        lab = cls(int(owner), component=int(comp))
        for a, b, d in lines[1:]:
            a, b = int(a), int(b)
            d = INF if d == "inf" else int(d)
            if a == lab.owner:
                lab.fwd[b] = d
            if b == lab.owner:
                lab.bwd[a] = d
        return lab


def decode(lu: DistanceLabel, lv: DistanceLabel) -> float:
    """d(u, v) from the forward part of ``lu`` and the backward part of ``lv``."""
    if lu.owner == lv.owner:
        return 0
    if lu.component != lv.component:
        return INF
    common = lu.fwd.keys() & lv.bwd.keys()
    if not common:
        raise DisjointHubSets(f"labels of {lu.owner} and {lv.owner} share no hub")
    return min(lu.fwd[s] + lv.bwd[s] for s in common)


@dataclass
class LabelTrace:
    """Intermediate data kept for inspection in tests."""

    decomposition: TreeDecomposition | None = None
    h_costs: dict = field(default_factory=dict)      # x -> {(a, b): cost}
    star_dist: dict = field(default_factory=dict)    # x -> {u: (to, frm)}
    cores: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# helpers


def _apsp(nodes, arcs: dict) -> dict:
    """All-pairs distances on a small graph given as {(a, b): cost}."""
    out_adj = defaultdict(list)
    for (a, b), c in arcs.items():
        out_adj[a].append((b, c))
    dist = {}
    for s in nodes:
        d = {s: 0}
        heap = [(0, s)]
        while heap:
            du, u = heapq.heappop(heap)
            if du > d.get(u, INF):
                continue
            for w, c in out_adj[u]:
                nd = du + c
                if nd < d.get(w, INF):
                    d[w] = nd
                    heapq.heappush(heap, (nd, w))
        dist[s] = d
    return dist


def _min_arcs(g: MultiGraph) -> dict:
    """Cheapest finite arc for every ordered pair of distinct vertices."""
    best = {}
    for _, u, v, c in g.arcs():
        if u != v and c != INF and c < best.get((u, v), INF):
            best[(u, v)] = c
    return best


def _encode_bag_ids(ids) -> tuple:
    flat = [len(ids)]
    for x in sorted(ids):
        flat.append(len(x))
        flat.extend(x)
    return tuple(flat)


def _decode_bag_ids(flat: tuple) -> set:
    out = set()
    k, pos = flat[0], 1
    for _ in range(k):
        ln = flat[pos]
        out.add(tuple(flat[pos + 1:pos + 1 + ln]))
        pos += 1 + ln
    return out


class _Codec:
    """Distances in messages: infinity is a reserved value above any path length."""

    def __init__(self, n: int, max_cost: int):
        self.inf = n * max(max_cost, 1) + 1

    def enc(self, d) -> int:
        return self.inf if d == INF else d

    def dec(self, x: int):
        return INF if x >= self.inf else x


# ---------------------------------------------------------------------------
# construction


def prepare_decomposition(g: MultiGraph, td: TreeDecomposition | None) -> TreeDecomposition:
    if td is None:
        td = g.witness
    if td is None:
        raise InvalidDecomposition("no decomposition given and the graph has no witness")
    rep = validate_tree_decomposition(g, td)
    if not rep["valid"]:
        raise InvalidDecomposition("; ".join(rep["violations"][:5]))
    return td


def build_labels(g: MultiGraph, td: TreeDecomposition | None = None, net: Network | None = None,
                 trace: LabelTrace | None = None) -> dict:
    """Distance labels for every vertex of ``g``.

    ``td`` (default: the graph's witness) must be a valid decomposition; it is
    first rewritten into structured form.  Rounds are charged to ``net``.
    Returns {vertex: DistanceLabel}.
    """
    td = prepare_decomposition(g, td)
    if net is None:
        net = Network(g)
    # one distance plus routing fields must fit a message; weights far beyond
    # poly(n) on a tiny graph cannot be carried at all
    top = max(g.vertices, default=0)
    if sim.message_bits((1, 1, top, top, 1, _Codec(g.n, g.max_cost()).inf)) > net.bandwidth:
        raise ValueError(f"max weight {g.max_cost()} is too large for {net.bandwidth}-bit messages")
    comm = derive_comm_graph(g)
    labels = {}
    comps = comm.components()
    for ci, comp in enumerate(comps):
        sub = g.induced(comp) if len(comps) > 1 else g
        sub_td = restrict_decomposition(td, comp) if len(comps) > 1 else td
        sub_td = TreeDecomposition({x: b for x, b in sub_td.bags.items()})
        try:
            std = structured_decomposition(sub, sub_td)
        except GraphError as exc:  # pragma: no cover - comp is connected
            raise InvalidDecomposition(str(exc)) from exc
        within = comp if len(comps) > 1 else None
        for v, lab in _build_connected(sub, std, net, within, trace).items():
            lab.component = ci
            labels[v] = lab
    return labels


def _build_connected(g: MultiGraph, td: TreeDecomposition, net: Network, within, trace) -> dict:
    bags = td.bags
    kids = td.child_map()
    sub = td.subtree_vertices()
    core = {x: sub[x] - (bags[x[:-1]] if x else frozenset()) for x in bags}
    members = {x: core[x] | bags[x] for x in bags}
    arcs = _min_arcs(g)
    codec = _Codec(g.n, g.max_cost())
    if trace is not None:
        trace.decomposition = td
        trace.cores = core

    # every vertex knows the ids of its own bags; one exchange tells it
    # those of its neighbours
    occ = defaultdict(set)
    for x, b in bags.items():
        for v in b:
            occ[v].add(x)
    comm = derive_comm_graph(g)
    payload = {v: {w: _encode_bag_ids(occ[v]) for w in comm.adjacency[v]} for v in g.vertices}
    got = net.run("dl-exchange", prim.NeighborExchange(), payload, within)
    nbr_bags = {v: {w: _decode_bag_ids(t) for w, t in got.get(v, {}).items()} for v in g.vertices}

    def in_core(w: int, x: tuple, seen_by: int) -> bool:
        ids = occ[w] if w == seen_by else nbr_bags[seen_by][w]
        below = any(y[:len(x)] == x for y in ids)
        return below and (not x or x[:-1] not in ids)

    by_depth = defaultdict(list)
    for x in bags:
        by_depth[len(x)].append(x)
    colls = {}
    forests = {}
    index = {}
    for d in sorted(by_depth):
        xs = sorted(by_depth[d])
        parts = []
        for x in xs:
            adj = {}
            for u in members[x]:
                if u in core[x]:
                    adj[u] = frozenset(comm.adjacency[u])
                else:
                    adj[u] = frozenset(w for w in comm.adjacency[u] if in_core(w, x, u))
            parts.append(prim.Part(frozenset(members[x]), adj))
        colls[d] = prim.NearDisjointCollection(parts)
        index[d] = {x: i for i, x in enumerate(xs)}
        colls[d].validate(net.comm)
        forests[d] = prim.bfs_forest(net, colls[d], validate=False)

    # bottom-up: star[x][u] = (to, frm) with distances in G*_x to/from B_x
    star: dict = {}
    for d in sorted(by_depth, reverse=True):
        xs = sorted(by_depth[d])
        messages = {}
        for x in xs:
            items = {}
            for s in bags[x]:
                items[(s, s)] = 0
                for s2 in bags[x]:
                    c = arcs.get((s, s2))
                    if c is not None:
                        items[(s, s2)] = min(items.get((s, s2), INF), c)
                for y in kids[x]:
                    if s in bags[y]:
                        to = star[y][s][0]
                        for s2 in bags[x] & bags[y]:
                            if s2 != s and to[s2] != INF:
                                items[(s, s2)] = min(items.get((s, s2), INF), to[s2])
            messages[index[d][x]] = [(a, (b, c)) for (a, b), c in sorted(items.items())]
        h = max((len(m) for m in messages.values()), default=0)
        received = prim.bct(net, colls[d], h, messages, forest=forests[d], validate=False)
        for x in xs:
            i = index[d][x]
            # every member receives the same list; evaluate it once
            anchor = min(members[x])
            h_arcs = {}
            for a, (b, c) in received[anchor][i]:
                if a != b:
                    h_arcs[(a, b)] = min(h_arcs.get((a, b), INF), c)
            hv = sorted(bags[x])
            dh = _apsp(hv, h_arcs)
            if trace is not None:
                trace.h_costs[x] = h_arcs
            star[x] = {}
            for u in members[x]:
                if u in bags[x]:
                    to = {s: dh[u].get(s, INF) for s in hv}
                    frm = {s: dh[s].get(u, INF) for s in hv}
                else:
                    y = next(y for y in kids[x] if u in core[y])
                    cto, cfrm = star[y][u]
                    shared = [s1 for s1 in hv if s1 in bags[y]]
                    to = {s: min((cto[s1] + dh[s1].get(s, INF) for s1 in shared), default=INF) for s in hv}
                    frm = {s: min((dh[s].get(s1, INF) + cfrm[s1] for s1 in shared), default=INF) for s in hv}
                star[x][u] = (to, frm)
    if trace is not None:
        trace.star_dist = star

    # pre-labels from the canonical node of every hub
    canon = {}
    for x in sorted(bags, key=lambda y: (len(y), y)):
        for v in bags[x]:
            canon.setdefault(v, x)
    fwd = {u: {} for u in g.vertices}
    bwd = {u: {} for u in g.vertices}
    for v, z in canon.items():
        for u in core[z]:
            to, frm = star[z][u]
            fwd[u][v] = to[v]
            bwd[u][v] = frm[v]

    # top-down refinement through the hubs shared with the parent bag;
    # on tiny graphs with heavy weights one row may not fit a message, so
    # the two distances then travel as separate items
    top = max(g.vertices)
    split_rows = sim.message_bits((1, 1, top, top, codec.inf, codec.inf)) > net.bandwidth
    for d in sorted(by_depth):
        if d == 0:
            continue
        xs = sorted(by_depth[d])
        messages = {}
        for z in xs:
            shared = sorted(bags[z] & bags[z[:-1]])
            items = []
            for v in sorted(bags[z] - bags[z[:-1]]):
                to, frm = star[z][v]
                for s in shared:
                    if split_rows:
                        items.append((v, (s, 0, codec.enc(frm[s]))))
                        items.append((v, (s, 1, codec.enc(to[s]))))
                    else:
                        items.append((v, (s, codec.enc(frm[s]), codec.enc(to[s]))))
            messages[index[d][z]] = items
        h = max((len(m) for m in messages.values()), default=0)
        if h == 0:
            continue
        received = prim.bct(net, colls[d], h, messages, forest=forests[d], validate=False)
        for z in xs:
            i = index[d][z]
            rows = defaultdict(list)
            if split_rows:
                halves = defaultdict(dict)
                for v, (s, side, x) in received[min(members[z])][i]:
                    halves[(v, s)][side] = codec.dec(x)
                for (v, s), pair in sorted(halves.items()):
                    rows[v].append((s, pair[0], pair[1]))
            else:
                for v, (s, d_sv, d_vs) in received[min(members[z])][i]:
                    rows[v].append((s, codec.dec(d_sv), codec.dec(d_vs)))
            for u in core[z]:
                fu, bu = fwd[u], bwd[u]
                for v, lst in rows.items():
                    best_f = fu[v]
                    best_b = bu[v]
                    for s, d_sv, d_vs in lst:
                        best_f = min(best_f, fu[s] + d_sv)
                        best_b = min(best_b, d_vs + bu[s])
                    fu[v] = best_f
                    bu[v] = best_b

    labels = {}
    for u in g.vertices:
        fwd[u][u] = 0
        bwd[u][u] = 0
        labels[u] = DistanceLabel(u, fwd[u], bwd[u])
    return labels


# ---------------------------------------------------------------------------
# single-source distances


def sssp_from(g: MultiGraph, td: TreeDecomposition | None, source: int, labels: dict | None = None,
              net: Network | None = None) -> dict:
    """Distances from ``source``: the source label is broadcast and decoded everywhere."""
    if net is None:
        net = Network(g)
    if labels is None:
        labels = build_labels(g, td, net)
    comm = net.comm
    comp = next(c for c in comm.components() if source in c)
    coll = prim.NearDisjointCollection([prim.Part.induced(comm, comp)])
    lab = labels[source]
    codec = _Codec(g.n, g.max_cost())
    items = [(source, (s, codec.enc(d))) for s, d in sorted(lab.fwd.items())]
    got = prim.bct(net, coll, len(items), {0: items}, validate=False)
    out = {}
    for v in g.vertices:
        if v not in comp:
            out[v] = INF
            continue
        fwd = {s: codec.dec(dd) for _, (s, dd) in got[v][0]}
        mine = labels[v]
        common = fwd.keys() & mine.bwd.keys()
        out[v] = 0 if v == source else min((fwd[s] + mine.bwd[s] for s in common), default=INF)
    return out
