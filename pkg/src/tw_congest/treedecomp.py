"""Recursive tree decomposition from balanced separators.

Level by level, every current piece G'_x (a component of G minus the
parent bag) gets a separator S'_x, all pieces of a level at once.  The bag
of x is the part of the parent bag that touches G_x plus S'_x, and the
components of G'_x - S'_x become the children.  A node becomes a leaf as
soon as its graph is at most twice the size of its separator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import primitives as pr
from .graph import MultiGraph, TreeDecomposition, derive_comm_graph
from .network import Network
from .separator import Disconnected, SepConfig, parallel_separators


@dataclass
class DecompositionTrace:
    separators: dict = field(default_factory=dict)   # x -> Separator of G'_x
    graphs: dict = field(default_factory=dict)       # x -> V(G_x)
    levels: int = 0
    max_t: int = 0
    rounds: int = 0

    def separator_bound(self, cfg: SepConfig) -> int:
        """Config-implied bound on any separator of this run."""
        return cfg.size_bound(self.max_t) if self.max_t else 0


def build_tree_decomposition(g: MultiGraph, cfg: SepConfig | None = None, seed=0,
                             net: Network | None = None,
                             trace: DecompositionTrace | None = None) -> TreeDecomposition:
    """Tree decomposition of a graph with connected communication graph.

    Bag ids are tuples of child indices; children of a node are ranked by
    the smallest vertex id of their component.
    """
    cfg = cfg or SepConfig.paper()
    comm = derive_comm_graph(g)
    if not comm.vertices:
        return TreeDecomposition({(): ()})
    if not comm.is_connected():
        raise Disconnected("the communication graph is not connected")
    net = net or Network(comm)
    start_rounds = net.stats.rounds
    trace = trace if trace is not None else DecompositionTrace()

    bags: dict = {}
    # level frontier: x -> (V(G_x), V(G'_x), parent bag restricted to G_x)
    frontier = {(): (frozenset(comm.vertices), frozenset(comm.vertices), frozenset())}
    level = 0
    while frontier:
        level += 1
        order = sorted(frontier)
        seps = parallel_separators(comm, [frontier[x][1] for x in order], None, cfg,
                                   (seed, level), net)
        split_parts = []
        for x, sep in zip(order, seps):
            gx, gpx, bpx = frontier[x]
            trace.separators[x] = sep
            trace.graphs[x] = gx
            trace.max_t = max(trace.max_t, sep.t)
            s_full = frozenset(sep) | bpx
            if len(gx) <= 2 * len(s_full):
                bags[x] = gx
                continue
            bag = bpx | frozenset(sep)
            if not bag <= gx:
                raise AssertionError(f"bag {x} leaves its graph")
            bags[x] = bag
            split_parts.append((x, gpx, frozenset(sep)))
        frontier = {}
        if not split_parts:
            break
        # children: components of G'_x - S'_x, found by component detection
        coll = pr.NearDisjointCollection([pr.Part.induced(comm, gpx) for _, gpx, _ in split_parts])
        indicators = {}
        for i, (x, gpx, sep) in enumerate(split_parts):
            part = coll.parts[i]
            indicators[i] = [(u, w) for u, w in part.edges() if u not in sep and w not in sep]
        ids = pr.ccd(net, coll, indicators, validate=False)
        for i, (x, gpx, sep) in enumerate(split_parts):
            comps: dict = {}
            for v in gpx - sep:
                comps.setdefault(ids[v][i], set()).add(v)
            bag = bags[x]
            for rank, cid in enumerate(sorted(comps)):
                comp = frozenset(comps[cid])
                touch = frozenset(w for v in comp for w in comm.adjacency[v] if w in bag)
                frontier[x + (rank,)] = (comp | touch, comp, touch)
    trace.levels = level
    trace.rounds = net.stats.rounds - start_rounds
    return TreeDecomposition(bags)


def decomposition_witness_width(td: TreeDecomposition) -> int:
    """Largest bag size minus one (-1 when there are no vertices)."""
    return max((len(b) for b in td.bags.values()), default=0) - 1
