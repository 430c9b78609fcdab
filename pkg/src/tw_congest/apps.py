"""Applications of the labeling machinery: bipartite matching and girth."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from . import primitives as pr
from . import sim
from .graph import INF, MultiGraph, TreeDecomposition, derive_comm_graph, restrict_decomposition
from .labels import build_labels, decode
from .network import Network, ProductNetwork
from .separator import SepConfig, parallel_separators
from .treedecomp import build_tree_decomposition
from .walks import ColoredConstraint, CountConstraint, build_product_graph, cdl_build, cdl_decode, \
    extract_constrained_walk


class NotBipartite(ValueError):
    pass


class MatchingError(AssertionError):
    pass


# ---------------------------------------------------------------------------
# two-colouring


class _TwoColour(sim.NodeProgram):
    """Flood (smallest id seen, parity); the final states form a 2-colouring
    of every component exactly when no neighbour ends with the same pair."""

    def init(self, view):
        return {"best": (view.vid, 0), "nbrs": view.neighbors, "heard": {}, "start": True}

    def on_round(self, s, inbox):
        improved = s["start"]
        s["start"] = False
        for u, (lead, par) in inbox.items():
            s["heard"][u] = (lead, par)
            if lead < s["best"][0]:
                s["best"] = (lead, par ^ 1)
                improved = True
        out = {w: s["best"] for w in s["nbrs"]} if improved else {}
        return s, out, True

    def output(self, s):
        lead, par = s["best"]
        clash = [u for u, (lu, pu) in s["heard"].items() if lu == lead and pu == par]
        return lead, par, clash


def two_colouring(g, net: Network | None = None) -> dict:
    """Distributed 2-colouring; returns {v: (component leader, side)}.

    Raises :class:`NotBipartite` when some edge joins two vertices of the
    same side.
    """
    comm = g if not isinstance(g, MultiGraph) else derive_comm_graph(g)
    net = net or Network(comm)
    out = net.run("two-colour", _TwoColour())
    for v, (_, _, clash) in out.items():
        if clash:
            raise NotBipartite(f"odd cycle through the edge ({v},{min(clash)})")
    return {v: (lead, par) for v, (lead, par, _) in out.items()}


# ---------------------------------------------------------------------------
# matching


@dataclass
class Matching:
    edges: frozenset                 # edge ids
    matched: dict                    # vertex -> bool

    def __len__(self) -> int:
        return len(self.edges)

    @classmethod
    def from_edges(cls, g: MultiGraph, edges) -> "Matching":
        edges = frozenset(edges)
        hit = {v: False for v in g.vertices}
        for e in edges:
            u, v = g.gamma[e]
            hit[u] = hit[v] = True
        return cls(edges, hit)

    def is_valid(self, g: MultiGraph) -> bool:
        seen = set()
        for e in self.edges:
            u, v = g.gamma[e]
            if u == v or u in seen or v in seen:
                return False
            seen |= {u, v}
        return all(self.matched[v] == (v in seen) for v in g.vertices)


@dataclass
class MatchingTrace:
    levels: list = field(default_factory=list)        # per level: [(piece, separator order)]
    walks: list = field(default_factory=list)         # augmenting walks as edge-id lists
    walk_nodes: list = field(default_factory=list)    # matching vertex sequences
    central_pieces: int = 0
    searches: int = 0
    augmentations: int = 0
    rounds: int = 0


def _kuhn(vertices, adj, side, mate: dict) -> None:
    """Maximum matching of a small bipartite graph by augmenting paths (in place)."""
    def augment(u, seen):
        for w, e in sorted(adj[u]):
            if w in seen:
                continue
            seen.add(w)
            if w not in mate or augment(mate[w][0], seen):
                mate[u] = (w, e)
                mate[w] = (u, e)
                return True
        return False

    for u in sorted(vertices):
        if side[u] == 0 and u not in mate:
            augment(u, set())


def _path_edges(walk_edges, mate_edges) -> bool:
    """Whether the edge sequence alternates non-matching / matching."""
    return all((e in mate_edges) == (k % 2 == 1) for k, e in enumerate(walk_edges))


def max_matching(g: MultiGraph, cfg: SepConfig | None = None, seed=0, td: TreeDecomposition | None = None,
                 net: Network | None = None, leaf_size: int | None = None,
                 trace: MatchingTrace | None = None) -> Matching:
    """Maximum matching of a bipartite graph by separator divide and conquer.

    Pieces with at most ``leaf_size`` vertices (default: twice the
    separator size bound at t = 2) are gathered and solved locally.  Larger
    pieces are split by a balanced separator; after the parts below are
    solved, the separator vertices are switched on one by one and each
    searches for one augmenting path, found as a shortest alternating walk
    on constrained labels in which every edge touching a switched-off
    vertex costs infinity.  ``td`` is the decomposition used for the labels
    (default: the graph's witness, else one is built).
    """
    cfg = cfg or SepConfig.desk()
    comm = derive_comm_graph(g)
    net = net or Network(comm)
    trace = trace if trace is not None else MatchingTrace()
    start = net.stats.rounds
    leaf = 2 * cfg.size_bound(2) if leaf_size is None else leaf_size
    if any(u == v for u, v in g.gamma.values()):
        raise NotBipartite("self-loop")
    colour = two_colouring(comm, net)
    side = {v: p for v, (_, p) in colour.items()}
    adj = {v: [] for v in g.vertices}
    for e, (u, v) in g.gamma.items():
        adj[u].append((v, e))
        adj[v].append((u, e))

    mate: dict = {}  # v -> (partner, edge id)
    comps: dict = {}
    for v, (lead, _) in colour.items():
        comps.setdefault(lead, set()).add(v)
    pieces = [frozenset(comps[k]) for k in sorted(comps)]
    levels = []
    level = 0
    while pieces:
        small = [p for p in pieces if len(p) <= leaf]
        big = [p for p in pieces if len(p) > leaf]
        if small:
            _solve_small(net, comm, small, adj, side, mate)
            trace.central_pieces += len(small)
        if not big:
            break
        level += 1
        seps = parallel_separators(comm, big, None, cfg, (seed, "matching", level), net)
        levels.append([(p, sorted(s)) for p, s in zip(big, seps)])
        coll = pr.NearDisjointCollection([pr.Part.induced(comm, p) for p in big])
        ind = {i: [(u, w) for u, w in part.edges() if u not in seps[i] and w not in seps[i]]
               for i, part in enumerate(coll.parts)}
        ids = pr.ccd(net, coll, ind, validate=False)
        pieces = []
        for i, p in enumerate(big):
            sub: dict = {}
            for v in p - seps[i]:
                sub.setdefault(ids[v][i], set()).add(v)
            pieces.extend(frozenset(sub[k]) for k in sorted(sub))
    trace.levels = levels

    if levels:
        if td is None:
            td = g.witness if g.witness is not None else build_tree_decomposition(g, cfg, seed, net)
        for pieces_sep in reversed(levels):
            _switch_on(g, comm, net, td, pieces_sep, mate, trace)
    m = Matching.from_edges(g, {e for _, e in mate.values()})
    if not m.is_valid(g):
        raise MatchingError("final matching is invalid")
    trace.rounds = net.stats.rounds - start
    return m


def _solve_small(net, comm, pieces, adj, side, mate) -> None:
    """Gather every small piece's edges at all its members and solve locally."""
    coll = pr.NearDisjointCollection([pr.Part.induced(comm, p) for p in pieces])
    msgs = {}
    for i, p in enumerate(pieces):
        items = []
        for u in sorted(p):
            for w, e in adj[u]:
                if w in p and u < w:
                    items.append((u, (w, e)))
        msgs[i] = items
    h = max((len(x) for x in msgs.values()), default=0)
    got = pr.bct(net, coll, h, msgs, validate=False) if h else {}
    for i, p in enumerate(pieces):
        # every member now knows the piece; solve it from what its smallest vertex received
        local_adj = {u: [] for u in p}
        for u, (w, e) in got.get(min(p), {}).get(i, []):
            local_adj[u].append((w, e))
            local_adj[w].append((u, e))
        _kuhn(p, local_adj, side, mate)


def _switch_on(g, comm, net, td, pieces_sep, mate, trace) -> None:
    off = set()
    for _, order in pieces_sep:
        off.update(order)
    # vertices outside this level's pieces belong to higher separators
    inside = set().union(*(p for p, _ in pieces_sep))
    sub = g.induced(inside)
    sub_td = restrict_decomposition(td, inside)
    steps = max(len(order) for _, order in pieces_sep)
    for i in range(steps):
        sources = [order[i] for _, order in pieces_sep if i < len(order)]
        off -= set(sources)
        masked = MultiGraph(set(sub.vertices), dict(sub.gamma),
                            {e: (INF if (u in off or v in off) else 1) for e, (u, v) in sub.gamma.items()})
        matched_edges = {e for _, e in mate.values()}
        c = ColoredConstraint({e: int(e in matched_edges) for e in sub.gamma}, palette=[0, 1])
        pg = build_product_graph(masked, c)
        pnet = ProductNetwork(pg, net.bandwidth_factor, net.max_rounds)
        labels = cdl_build(masked, c, sub_td, pnet, pg)
        # each source's label reaches its piece; unmatched vertices report (dist, id)
        cap = 2 * g.n + 2
        coll = pr.NearDisjointCollection([pr.Part.induced(comm, p) for p, order in pieces_sep if i < len(order)])
        vals = {}
        for k, s in enumerate(sources):
            for v in coll.parts[k].vertices:
                d = INF
                if v != s and v not in off and v not in mate:
                    d = cdl_decode(0, labels[s], labels[v])
                vals[(v, k)] = (cap, 0) if d == INF else (d, v)
        best_of = pr.pa(net, coll, vals, "min", validate=False)
        for k, s in enumerate(sources):
            trace.searches += 1
            if s in mate:
                raise MatchingError(f"switched-on vertex {s} is already matched")
            best = best_of[s][k]
            if best[0] >= cap:
                continue
            walk = extract_constrained_walk(masked, c, s, best[1], 0, labels=labels, net=pnet)
            verts = [v for v, _ in walk.nodes]
            if len(set(verts)) != len(verts):
                raise MatchingError("augmenting walk is not simple")
            if not _path_edges(walk.edges, matched_edges) or len(walk.edges) % 2 != 1:
                raise MatchingError("augmenting walk does not alternate")
            for e in walk.edges:
                u, v = g.gamma[e]
                if e in matched_edges:
                    mate.pop(u, None)
                    mate.pop(v, None)
            for j, e in enumerate(walk.edges):
                if j % 2 == 0:
                    u, v = g.gamma[e]
                    mate[u] = (v, e)
                    mate[v] = (u, e)
            matched_edges = {e for _, e in mate.values()}
            if not Matching.from_edges(g, matched_edges).is_valid(g):
                raise MatchingError("matching became invalid after an augmentation")
            trace.walks.append(list(walk.edges))
            trace.walk_nodes.append(verts)
            trace.augmentations += 1
        net.charge("cdl", pnet.stats.rounds, pnet.stats.messages_sent, pnet.stats.max_message_bits)


# ---------------------------------------------------------------------------
# girth


def _aggregate_min(net: Network, comm, values: dict, codec_inf: int) -> float:
    """Minimum of per-vertex values over every component (one PA)."""
    comps = comm.components()
    coll = pr.NearDisjointCollection([pr.Part.induced(comm, c) for c in comps])
    enc = {v: (codec_inf if x == INF else x) for v, x in values.items()}
    res = pr.pa(net, coll, enc, "min", validate=False)
    best = min((res[min(c)][i] for i, c in enumerate(comps)), default=codec_inf)
    return INF if best >= codec_inf else best


def girth_directed(g: MultiGraph, td: TreeDecomposition | None = None, net: Network | None = None) -> float:
    """Weight of the shortest directed cycle (INF for acyclic graphs)."""
    if not g.directed:
        raise ValueError("girth_directed expects a directed graph")
    if any(c <= 0 for c in g.cost.values()):
        raise ValueError("edge weights must be positive")
    comm = derive_comm_graph(g)
    net = net or Network(comm)
    labels = build_labels(g, td, net)
    net.charge("label-exchange", 1 if g.gamma else 0)
    local = {v: INF for v in g.vertices}
    for e, (u, v) in g.gamma.items():
        w = g.cost[e] + decode(labels[v], labels[u])
        if w < local[u]:
            local[u] = w
    cap = sum(g.cost.values()) + 1
    return _aggregate_min(net, comm, local, cap)


@dataclass(frozen=True)
class GirthConfig:
    c1: int = 1
    ceiling: int | None = None       # largest exponent of c-hat; default ceil(log2 n^2) + 1

    def exponents(self, n: int) -> range:
        top = self.ceiling if self.ceiling is not None else math.ceil(math.log2(max(n, 2) ** 2)) + 1
        return range(top + 1)

    def trials(self, n: int) -> int:
        return self.c1 * max(1, math.ceil(math.log2(max(n, 2))))


@dataclass
class GirthTrace:
    trials: list = field(default_factory=list)       # (c_hat, trial, value)
    rounds: int = 0


def sample_labels(g: MultiGraph, c_hat: int, rng: random.Random) -> dict:
    """Label every edge one independently with probability 1/(3 c_hat)."""
    p = 1 / (3 * c_hat)
    return {e: int(rng.random() < p) for e in sorted(g.gamma)}


def count_one_trial(g: MultiGraph, bits: dict, td: TreeDecomposition, net: Network | None = None) -> float:
    """Shortest closed walk with exactly one labelled edge, minimised over vertices."""
    comm = derive_comm_graph(g)
    c = CountConstraint(bits, 1)
    pg = build_product_graph(g, c)
    pnet = ProductNetwork(pg)
    labels = cdl_build(g, c, td, pnet, pg)
    if net is not None:
        net.charge("cdl", pnet.stats.rounds, pnet.stats.messages_sent, pnet.stats.max_message_bits)
    local = {v: cdl_decode(1, labels[v], labels[v]) for v in g.vertices}
    cap = sum(g.cost.values()) + 1
    return _aggregate_min(net or Network(comm), comm, local, cap)


def girth_undirected(g: MultiGraph, cfg: GirthConfig | None = None, seed=0, td: TreeDecomposition | None = None,
                     net: Network | None = None, trace: GirthTrace | None = None) -> float:
    """Weight of the shortest cycle of a simple undirected graph (INF for forests)."""
    if g.directed:
        raise ValueError("girth_undirected expects an undirected graph")
    seen = set()
    for u, v in g.gamma.values():
        key = (min(u, v), max(u, v))
        if u == v or key in seen:
            raise ValueError("the graph must be simple")
        seen.add(key)
    if any(c <= 0 for c in g.cost.values()):
        raise ValueError("edge weights must be positive")
    cfg = cfg or GirthConfig()
    comm = derive_comm_graph(g)
    net = net or Network(comm)
    if td is None:
        td = g.witness if g.witness is not None else build_tree_decomposition(g, seed=seed, net=net)
    trace = trace if trace is not None else GirthTrace()
    start = net.stats.rounds
    rng = random.Random(seed)
    best = INF
    for a in cfg.exponents(g.n):
        c_hat = 1 << a
        for k in range(cfg.trials(g.n)):
            bits = sample_labels(g, c_hat, rng)
            # with no labelled edge every count-1 distance is infinite
            value = count_one_trial(g, bits, td, net) if any(bits.values()) else INF
            trace.trials.append((c_hat, k, value))
            best = min(best, value)
    trace.rounds = net.stats.rounds - start
    return best
