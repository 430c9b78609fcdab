"""Graph containers, communication graphs and tree decompositions."""

from __future__ import annotations

import math
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator

INF = math.inf

BagId = tuple


class GraphError(ValueError):
    pass


class VertexNotInDecomposition(KeyError):
    pass


@dataclass
class MultiGraph:
    """Directed or undirected multigraph with integer edge costs.

    ``gamma`` maps an edge id to its ordered endpoint pair and ``cost`` maps
    it to a non-negative integer or ``INF``.
    """

    vertices: set = field(default_factory=set)
    gamma: dict = field(default_factory=dict)
    cost: dict = field(default_factory=dict)
    directed: bool = False
    witness: "TreeDecomposition | None" = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        self.vertices = set(self.vertices)
        if set(self.gamma) != set(self.cost):
            raise GraphError("gamma and cost must share the same edge ids")
        for eid, (u, v) in self.gamma.items():
            if u not in self.vertices or v not in self.vertices:
                raise GraphError(f"edge {eid} has an endpoint outside the vertex set")
            c = self.cost[eid]
            if c != INF and (not isinstance(c, int) or c < 0):
                raise GraphError(f"edge {eid} has invalid cost {c!r}")

    @property
    def edges(self) -> set:
        return set(self.gamma)

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def m(self) -> int:
        return len(self.gamma)

    def add_vertex(self, v: int) -> None:
        self.vertices.add(v)

    def add_edge(self, u: int, v: int, cost: int = 1, eid: int | None = None) -> int:
        if eid is None:
            eid = max(self.gamma, default=-1) + 1
        if eid in self.gamma:
            raise GraphError(f"duplicate edge id {eid}")
        if u not in self.vertices or v not in self.vertices:
            raise GraphError("edge endpoint outside the vertex set")
        if cost != INF and (not isinstance(cost, int) or cost < 0):
            raise GraphError(f"invalid cost {cost!r}")
        self.gamma[eid] = (u, v)
        self.cost[eid] = cost
        return eid

    def arcs(self) -> Iterator[tuple]:
        """Yield (eid, tail, head, cost) for every traversal direction."""
        for eid, (u, v) in self.gamma.items():
            c = self.cost[eid]
            yield eid, u, v, c
            if not self.directed and u != v:
                yield eid, v, u, c

    def out_arcs(self) -> dict:
        out = {v: [] for v in self.vertices}
        for eid, u, v, c in self.arcs():
            out[u].append((eid, v, c))
        return out

    def in_arcs(self) -> dict:
        inc = {v: [] for v in self.vertices}
        for eid, u, v, c in self.arcs():
            inc[v].append((eid, u, c))
        return inc

    def copy(self) -> "MultiGraph":
        return MultiGraph(set(self.vertices), dict(self.gamma), dict(self.cost), self.directed, self.witness)

    def induced(self, keep: Iterable[int]) -> "MultiGraph":
        keep = set(keep)
        gamma = {e: uv for e, uv in self.gamma.items() if uv[0] in keep and uv[1] in keep}
        witness = restrict_decomposition(self.witness, keep) if self.witness is not None else None
        return MultiGraph(keep, gamma, {e: self.cost[e] for e in gamma}, self.directed, witness)

    def max_cost(self) -> int:
        finite = [c for c in self.cost.values() if c != INF]
        return max(finite, default=0)


@dataclass
class CommGraph:
    vertices: set
    adjacency: dict

    @property
    def n(self) -> int:
        return len(self.vertices)

    def edges(self) -> list:
        return sorted((u, v) for u in self.adjacency for v in self.adjacency[u] if u < v)

    def neighbors(self, v: int) -> set:
        return self.adjacency[v]

    def subgraph(self, keep: Iterable[int]) -> "CommGraph":
        keep = set(keep)
        return CommGraph(keep, {v: self.adjacency[v] & keep for v in keep})

    def components(self, within: Iterable[int] | None = None) -> list:
        """Connected components (as sets) of the subgraph induced by ``within``."""
        pool = set(self.vertices if within is None else within)
        comps = []
        for s in sorted(pool):
            if s not in pool:
                continue
            pool.discard(s)
            comp = {s}
            queue = deque([s])
            while queue:
                u = queue.popleft()
                for w in self.adjacency[u]:
                    if w in pool:
                        pool.discard(w)
                        comp.add(w)
                        queue.append(w)
            comps.append(comp)
        return comps

    def is_connected(self, within: Iterable[int] | None = None) -> bool:
        pool = self.vertices if within is None else set(within)
        return len(pool) <= 1 or len(self.components(pool)) == 1

    def bfs_distances(self, source: int, within: set | None = None) -> dict:
        dist = {source: 0}
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for w in self.adjacency[u]:
                if w not in dist and (within is None or w in within):
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return dist

    def diameter(self) -> int:
        best = 0
        for v in self.vertices:
            d = self.bfs_distances(v)
            if len(d) < len(self.vertices):
                return INF
            best = max(best, max(d.values()))
        return best


def derive_comm_graph(g: MultiGraph) -> CommGraph:
    """Drop orientations, merge parallel edges and remove self-loops."""
    adj = {v: set() for v in g.vertices}
    for u, v in g.gamma.values():
        if u != v:
            adj[u].add(v)
            adj[v].add(u)
    return CommGraph(set(g.vertices), adj)


@dataclass(frozen=True)
class WeightedMeasure:
    target: frozenset

    def __call__(self, ys: Iterable[int]) -> int:
        return sum(1 for y in ys if y in self.target)


# ---------------------------------------------------------------------------
# Tree decompositions


def is_prefix(x: BagId, y: BagId) -> bool:
    return len(x) <= len(y) and y[: len(x)] == x


class TreeDecomposition:
    """Rooted decomposition tree whose nodes are tuples of child indices.

    The root is the empty tuple and the parent of ``x`` is ``x[:-1]``.
    """

    def __init__(self, bags: dict | None = None):
        self.bags: dict = {tuple(x): frozenset(b) for x, b in (bags or {}).items()}

    @property
    def nodes(self) -> set:
        return set(self.bags)

    def children(self, x: BagId) -> list:
        return sorted(y for y in self.bags if len(y) == len(x) + 1 and y[:-1] == x)

    def child_map(self) -> dict:
        out = defaultdict(list)
        for y in self.bags:
            if y:
                out[y[:-1]].append(y)
        return {x: sorted(out.get(x, [])) for x in self.bags}

    def depth(self) -> int:
        return max((len(x) for x in self.bags), default=0)

    def width(self) -> int:
        return max((len(b) for b in self.bags.values()), default=0) - 1

    def vertices(self) -> set:
        out = set()
        for b in self.bags.values():
            out |= b
        return out

    def occurrences(self) -> dict:
        occ = defaultdict(list)
        for x, b in self.bags.items():
            for v in b:
                occ[v].append(x)
        return occ

    def subtree_vertices(self) -> dict:
        """Map each node to the union of the bags in its subtree."""
        out = {x: set(b) for x, b in self.bags.items()}
        for x in sorted(self.bags, key=len, reverse=True):
            if x:
                out[x[:-1]] |= out[x]
        return out

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TreeDecomposition) and self.bags == other.bags

    def __repr__(self) -> str:
        return f"TreeDecomposition({len(self.bags)} bags, width={self.width()}, depth={self.depth()})"


def validate_tree_decomposition(g: MultiGraph, td: TreeDecomposition) -> dict:
    violations = []
    bags = td.bags
    if bags and () not in bags:
        violations.append("missing root bag")
    for x in bags:
        if x and x[:-1] not in bags:
            violations.append(f"node {x} has no parent")
    covered = td.vertices()
    for v in sorted(g.vertices - covered):
        violations.append(f"vertex {v} is in no bag")
    for v in sorted(covered - g.vertices):
        violations.append(f"bag vertex {v} is not in the graph")

    occ = td.occurrences()
    for eid in sorted(g.gamma):
        u, v = g.gamma[eid]
        if u == v:
            continue
        if not any(u in bags[x] for x in occ.get(v, ())):
            violations.append(f"edge {eid} ({u},{v}) uncovered")
    for v, xs in sorted(occ.items()):
        xs_set = set(xs)
        tops = [x for x in xs if not x or x[:-1] not in xs_set]
        if len(tops) != 1:
            violations.append(f"bags containing {v} are disconnected")
    return {
        "valid": not violations,
        "width": td.width(),
        "depth": td.depth(),
        "violations": violations,
    }


def canonical_string(td: TreeDecomposition, v: int) -> BagId:
    best = None
    for x, b in td.bags.items():
        if v in b and (best is None or (len(x), x) < (len(best), best)):
            best = x
    if best is None:
        raise VertexNotInDecomposition(v)
    return best


def upward_bags(td: TreeDecomposition, v: int) -> set:
    x = canonical_string(td, v)
    out = set()
    for i in range(len(x) + 1):
        out |= td.bags[x[:i]]
    return out


def canonical_strings(td: TreeDecomposition) -> dict:
    """Canonical string of every vertex in one pass."""
    out = {}
    for x in sorted(td.bags, key=lambda y: (len(y), y)):
        for v in td.bags[x]:
            out.setdefault(v, x)
    return out


def restrict_decomposition(td: TreeDecomposition, keep: Iterable[int]) -> TreeDecomposition:
    """Intersect every bag with ``keep``; valid for the induced subgraph."""
    keep = set(keep)
    return TreeDecomposition({x: b & keep for x, b in td.bags.items()})


def _cores(td: TreeDecomposition) -> dict:
    sub = td.subtree_vertices()
    return {x: sub[x] - (td.bags[x[:-1]] if x else frozenset()) for x in td.bags}


def structured_decomposition(g: MultiGraph, td: TreeDecomposition) -> TreeDecomposition:
    """Rewrite ``td`` into an equivalent decomposition with connected cores.

    The core of a node ``x`` is the union of the bags below ``x`` minus the
    parent's bag.  In the result every core is non-empty and connected and
    every vertex shared by a bag and its parent bag has a neighbour in the
    core of the child.  Subtrees whose core falls apart are duplicated once
    per connected piece, empty nodes are dropped, shared vertices without a
    neighbour in the core are removed from the whole subtree, and child
    indices are renumbered by the smallest vertex of each piece.  Validity
    is preserved and bags only shrink.
    """
    comm = derive_comm_graph(g)
    if not td.bags:
        return TreeDecomposition()
    if len(comm.components()) > 1:
        raise GraphError("structured decompositions need a connected graph")
    kids = td.child_map()
    subtree = td.subtree_vertices()
    out = {}

    def build(x: BagId, scope: set, new_id: BagId) -> None:
        # scope: vertices handled by this copy, including the shared part of
        # the parent bag
        bag = frozenset(td.bags[x] & scope)
        out[new_id] = bag
        pieces = []
        for y in kids[x]:
            sub = subtree[y] & scope
            exclusive = sub - bag
            if not exclusive:
                continue
            for comp in comm.components(exclusive):
                touch = {w for w in sub & bag if comm.adjacency[w] & comp}
                pieces.append((min(comp), y, comp | touch))
        pieces.sort(key=lambda p: p[0])
        for i, (_, y, sc) in enumerate(pieces):
            build(y, sc, new_id + (i,))

    build((), set(g.vertices), ())
    # an empty root with a single child carries no information
    while not out[()] and (0,) in out and (1,) not in out:
        out = {x[1:]: b for x, b in out.items() if x}
    return TreeDecomposition(out)


def is_structured(g: MultiGraph, td: TreeDecomposition) -> bool:
    comm = derive_comm_graph(g)
    cores = _cores(td)
    for x, core in cores.items():
        if not core or not comm.is_connected(core):
            return False
        if x:
            for w in td.bags[x] & td.bags[x[:-1]]:
                if not comm.adjacency[w] & core:
                    return False
    return True
