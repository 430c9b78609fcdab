"""Stateful walk constraints, the product graph and constrained labels.

A constraint is a finite state set containing the reject state ``BOT`` and
the initial state ``INIT`` together with one transition map per edge.  The
state of a walk is the fold of the transitions of its edges starting from
``INIT``.  Constrained shortest walks become ordinary shortest paths in the
product graph on V x Q.
"""

from __future__ import annotations

import heapq
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Hashable, Iterable

from . import primitives as prim
from . import sim
from .graph import INF, CommGraph, MultiGraph, TreeDecomposition, derive_comm_graph
from .labels import DistanceLabel, _Codec, build_labels, decode
from .network import ProductNetwork

BOT = "⊥"
INIT = "▽"

_TEXT_ALIASES = {"bot": BOT, "⊥": BOT, "init": INIT, "▽": INIT}


class MalformedConstraint(ValueError):
    pass


class InvalidState(ValueError):
    pass


class Unreachable(ValueError):
    pass


class StatefulConstraint:
    """Constraint given by explicit per-edge transition tables.

    ``transitions[eid]`` maps a state to its successor; missing entries go to
    ``BOT``.
    """

    def __init__(self, states: Iterable[Hashable], transitions: dict | None = None):
        states = list(states)
        for special in (BOT, INIT):
            if special not in states:
                states.append(special)
        if len(set(states)) != len(states):
            raise MalformedConstraint("duplicate states")
        # BOT and INIT first, the rest in the given order
        self.states: tuple = (BOT, INIT) + tuple(q for q in states if q not in (BOT, INIT))
        self.index = {q: i for i, q in enumerate(self.states)}
        self.transitions = {e: dict(t) for e, t in (transitions or {}).items()}

    def delta(self, eid: int, q: Hashable) -> Hashable:
        return self.transitions.get(eid, {}).get(q, BOT)

    def table(self, eid: int) -> dict:
        """Non-rejecting transitions of one edge."""
        out = {}
        for q in self.states:
            r = self.delta(eid, q)
            if r != BOT:
                out[q] = r
        return out

    def fold(self, eids: Iterable[int]) -> Hashable:
        q = INIT
        for e in eids:
            q = self.delta(e, q)
        return q

    def edge_ids(self, g: MultiGraph | None = None) -> list:
        return sorted(g.gamma) if g is not None else sorted(self.transitions)

    def validate(self, g: MultiGraph | None = None) -> None:
        for e in self.edge_ids(g):
            if self.delta(e, BOT) != BOT:
                raise MalformedConstraint(f"edge {e} leaves the reject state")
            for q in self.states:
                r = self.delta(e, q)
                if r not in self.index:
                    raise MalformedConstraint(f"edge {e} maps {q!r} to unknown state {r!r}")
                if r == INIT:
                    raise MalformedConstraint(f"edge {e} maps {q!r} to the initial state")

    def to_text(self, g: MultiGraph | None = None) -> str:
        lines = ["states " + " ".join(str(q) for q in self.states)]
        for e in self.edge_ids(g):
            pairs = [f"{q}→{r}" for q, r in self.table(e).items()]
            lines.append(f"{e}: " + " ".join(pairs))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "StatefulConstraint":
        def state(tok: str):
            tok = _TEXT_ALIASES.get(tok, tok)
            return int(tok) if tok.lstrip("-").isdigit() else tok

        rows = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if not rows or not rows[0].startswith("states"):
            raise MalformedConstraint("the first line must list the states")
        states = [state(t) for t in rows[0].split()[1:]]
        known = set(states) | {BOT, INIT}
        trans = {}
        for row in rows[1:]:
            head, sep, rest = row.partition(":")
            if not sep:
                raise MalformedConstraint(f"malformed line: {row}")
            e = int(head)
            table = {}
            for tok in rest.split():
                a, arrow, b = tok.replace("->", "→").partition("→")
                if not arrow:
                    raise MalformedConstraint(f"malformed transition {tok!r}")
                qa, qb = state(a), state(b)
                if qa not in known or qb not in known:
                    raise MalformedConstraint(f"unknown state in {tok!r}")
                table[qa] = qb
            trans[e] = table
        c = cls(states, trans)
        c.validate()
        return c


class ColoredConstraint(StatefulConstraint):
    """Walks in which no two consecutive edges share a colour."""

    def __init__(self, coloring: dict, palette: Iterable | None = None):
        palette = sorted(set(coloring.values()) if palette is None else set(palette))
        missing = set(coloring.values()) - set(palette)
        if missing:
            raise MalformedConstraint(f"colours outside the palette: {sorted(missing)}")
        super().__init__(palette)
        self.coloring = dict(coloring)

    def delta(self, eid, q):
        if q == BOT:
            return BOT
        f = self.coloring.get(eid)
        if f is None or q == f:
            return BOT
        return f

    def edge_ids(self, g=None):
        return sorted(g.gamma) if g is not None else sorted(self.coloring)


class CountConstraint(StatefulConstraint):
    """Walks containing at most ``c`` edges labelled one."""

    def __init__(self, bits: dict, c: int):
        if c < 0:
            raise MalformedConstraint("the budget must be non-negative")
        if any(b not in (0, 1) for b in bits.values()):
            raise MalformedConstraint("edge labels must be 0 or 1")
        super().__init__(range(c + 1))
        self.bits = dict(bits)
        self.c = c

    def delta(self, eid, q):
        if q == BOT:
            return BOT
        f = self.bits.get(eid)
        if f is None:
            return BOT
        r = f if q == INIT else q + f
        return r if r <= self.c else BOT

    def edge_ids(self, g=None):
        return sorted(g.gamma) if g is not None else sorted(self.bits)


# ---------------------------------------------------------------------------
# product graph


@dataclass
class ProductGraph:
    graph: MultiGraph                # directed, on product ids
    comm: CommGraph                  # communication graph of the product
    host_comm: CommGraph             # communication graph of the input
    states: tuple
    index: dict                      # (v, q) -> product id
    pair: dict                       # product id -> (v, q)
    host: dict                       # product id -> v
    state_index: dict                # product id -> index of q
    origin: dict = field(default_factory=dict)   # product edge id -> input edge id (None for drops)
    max_links_per_edge: int = 0

    def lift(self, td: TreeDecomposition) -> TreeDecomposition:
        """Replace every vertex of every bag by all its product copies."""
        return TreeDecomposition({x: {self.index[(v, q)] for v in b for q in self.states}
                                  for x, b in td.bags.items()})

    def node(self, v, q) -> int:
        return self.index[(v, q)]


def build_product_graph(g: MultiGraph, c: StatefulConstraint) -> ProductGraph:
    c.validate(g)
    states = c.states
    nq = len(states)
    order = sorted(g.vertices)
    index, pair, host, sidx = {}, {}, {}, {}
    for r, v in enumerate(order):
        for qi, q in enumerate(states):
            p = r * nq + qi
            index[(v, q)] = p
            pair[p] = (v, q)
            host[p] = v
            sidx[p] = qi
    best = {}
    for eid, u, v, cost in sorted(g.arcs(), key=lambda a: (a[0], a[1])):
        for q in states:
            r = c.delta(eid, q)
            key = (index[(u, q)], index[(v, r)])
            cur = best.get(key)
            if cur is None or (cost, eid) < cur:
                best[key] = (cost, eid)
    for v in order:
        bot = index[(v, BOT)]
        for q in states:
            if q != BOT:
                key = (index[(v, q)], bot)
                cur = best.get(key)
                if cur is None or 0 < cur[0]:
                    best[key] = (0, None)
    pg_graph = MultiGraph(set(pair), directed=True)
    origin = {}
    for k, (key, (cost, eid)) in enumerate(sorted(best.items())):
        pg_graph.add_edge(key[0], key[1], cost, k)
        origin[k] = eid
    comm = derive_comm_graph(pg_graph)
    links = defaultdict(int)
    for a in comm.adjacency:
        for b in comm.adjacency[a]:
            if a < b and host[a] != host[b]:
                links[frozenset((host[a], host[b]))] += 1
    return ProductGraph(pg_graph, comm, derive_comm_graph(g), states, index, pair, host, sidx,
                        origin, max(links.values(), default=0))


def _check_state(c: StatefulConstraint, q) -> None:
    if q == BOT:
        raise InvalidState("the reject state has no distances")
    if q not in c.index:
        raise InvalidState(f"unknown state {q!r}")


def _dijkstra(graph: MultiGraph, source: int) -> tuple:
    adj = defaultdict(list)
    for eid, u, v, cost in graph.arcs():
        if cost != INF:
            adj[u].append((v, cost, eid))
    dist = {source: 0}
    pred = {}
    heap = [(0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, cost, eid in adj[u]:
            nd = d + cost
            if nd < dist.get(v, INF):
                dist[v] = nd
                pred[v] = (u, eid)
                heapq.heappush(heap, (nd, v))
    return dist, pred


def constrained_distance(g: MultiGraph, c: StatefulConstraint, s: int, t: int, q,
                         pg: ProductGraph | None = None) -> float:
    """Shortest weight of a walk from s to t whose state is ``q``."""
    _check_state(c, q)
    pg = pg or build_product_graph(g, c)
    dist, _ = _dijkstra(pg.graph, pg.index[(s, INIT)])
    return dist.get(pg.index[(t, q)], INF)


# ---------------------------------------------------------------------------
# constrained distance labels


class ConstrainedLabels(dict):
    """{vertex: {state: DistanceLabel of the product node}} plus the product graph."""

    pg: ProductGraph


def cdl_build(g: MultiGraph, c: StatefulConstraint, td: TreeDecomposition | None = None,
              net: ProductNetwork | None = None, pg: ProductGraph | None = None) -> ConstrainedLabels:
    """Labels of every product node, computed on the product graph hosted by ``g``."""
    pg = pg or build_product_graph(g, c)
    td = td if td is not None else g.witness
    if td is None:
        raise ValueError("a decomposition of the input graph is required")
    net = net or ProductNetwork(pg)
    raw = build_labels(pg.graph, pg.lift(td), net)
    out = ConstrainedLabels()
    out.pg = pg
    for p, lab in raw.items():
        v, q = pg.pair[p]
        out.setdefault(v, {})[q] = lab
    return out


def cdl_decode(q, label_u: dict, label_v: dict) -> float:
    if q == BOT:
        raise InvalidState("the reject state has no distances")
    if q not in label_v:
        raise InvalidState(f"unknown state {q!r}")
    return decode(label_u[INIT], label_v[q])


# ---------------------------------------------------------------------------
# walk extraction


@dataclass
class ConstrainedWalk:
    source: int
    target: int
    state: Hashable
    distance: int
    edges: list                  # input edge ids from source to target
    nodes: list                  # product nodes (v, q) from (source, INIT) to (target, state)
    outputs: dict                # (v, q) -> (distance from source, predecessor or None)


class _Trace(sim.NodeProgram):
    """Follow predecessor choices backwards from the target node.

    Input: (is_source, is_target, dist, candidates) where candidates are
    (dist(pred) + cost, pred, edge id) tuples for the in-arcs.
    """

    def init(self, view):
        is_src, is_tgt, dist, cands = view.inp or (False, False, INF, ())
        return {"src": is_src, "tgt": is_tgt, "dist": dist, "cands": cands, "out": None,
                "start": True}

    def _step(self, s, out):
        if s["out"] is not None:
            raise Unreachable("the predecessor chain revisits a node (zero-cost cycle)")
        if s["src"] and s["dist"] == 0:
            s["out"] = (0, None, None)
            return
        options = sorted((p, e) for total, p, e in s["cands"] if total == s["dist"])
        if not options:
            raise Unreachable("no predecessor realizes the distance")
        p, e = options[0]
        s["out"] = (s["dist"], p, e)
        out[p] = (1,)

    def on_round(self, s, inbox):
        out = {}
        if s["start"]:
            s["start"] = False
            if s["tgt"]:
                self._step(s, out)
        if inbox:
            self._step(s, out)
        return s, out, True

    def output(self, s):
        return s["out"]


def extract_constrained_walk(g: MultiGraph, c: StatefulConstraint, s: int, t: int, q,
                             labels: ConstrainedLabels | None = None, td: TreeDecomposition | None = None,
                             net: ProductNetwork | None = None) -> ConstrainedWalk:
    """Shortest walk from s to t with final state ``q``.

    The label of (s, INIT) is broadcast, every product node decodes its
    distance from it, tells its out-neighbours, and the target follows the
    predecessors back (smallest product id, then edge id, on ties).
    """
    _check_state(c, q)
    if labels is None:
        labels = cdl_build(g, c, td, net)
    pg = labels.pg
    net = net or ProductNetwork(pg)
    src = pg.index[(s, INIT)]
    tgt = pg.index[(t, q)]
    codec = _Codec(pg.graph.n, pg.graph.max_cost())

    # broadcast the forward part of the source label to every product node
    comp = next(cc for cc in pg.comm.components() if src in cc)
    coll = prim.NearDisjointCollection([prim.Part.induced(pg.comm, comp)])
    slab = labels[s][INIT]
    items = [(src, (hub, codec.enc(d))) for hub, d in sorted(slab.fwd.items())]
    got = prim.bct(net, coll, len(items), {0: items}, validate=False)
    dist = {}
    for p in pg.pair:
        if p not in comp:
            dist[p] = INF
            continue
        v, qq = pg.pair[p]
        fwd = {hub: codec.dec(dd) for _, (hub, dd) in got[p][0]}
        mine = labels[v][qq]
        common = fwd.keys() & mine.bwd.keys()
        dist[p] = 0 if p == src else min((fwd[h] + mine.bwd[h] for h in common), default=INF)
    if dist[tgt] == INF:
        raise Unreachable(f"no walk from {s} to {t} ends in state {q!r}")

    # every node tells its out-neighbours its distance along each arc
    payload = defaultdict(dict)
    arc_list = defaultdict(list)
    for eid, u, v, cost in pg.graph.arcs():
        if u != v and cost != INF:
            arc_list[(u, v)].append((eid, cost))
    for (u, v), lst in arc_list.items():
        eid, cost = min(lst, key=lambda ec: (ec[1], ec[0]))
        payload[u][v] = (codec.enc(dist[u]), eid)
    got = net.run("walk-exchange", prim.NeighborExchange(), dict(payload))
    cands = defaultdict(list)
    for v, senders in got.items():
        for u, (du, eid) in senders.items():
            du = codec.dec(du)
            if du != INF:
                cands[v].append((du + pg.graph.cost[eid], u, eid))
    inputs = {p: (p == src, p == tgt, dist[p], tuple(cands[p])) for p in pg.pair}
    res = net.run("walk-trace", _Trace(), inputs)

    outputs = {}
    chain = []
    p = tgt
    seen = set()
    while True:
        if p in seen:
            # only possible through a cycle of zero-cost arcs
            raise RuntimeError("predecessor pointers form a cycle")
        seen.add(p)
        d, pred, eid = res[p]
        outputs[pg.pair[p]] = (d, pg.pair[pred] if pred is not None else None)
        chain.append((p, eid))
        if pred is None:
            break
        p = pred
    chain.reverse()
    nodes = [pg.pair[p] for p, _ in chain]
    edges = [pg.origin[eid] for _, eid in chain[1:]]
    # drop edges into the reject layer cannot appear: the target state is not BOT
    return ConstrainedWalk(s, t, q, dist[tgt], edges, nodes, outputs)
