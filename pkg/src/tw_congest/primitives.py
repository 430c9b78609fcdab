"""Part-wise communication primitives over near-disjoint collections.

A collection is a list of connected parts of the communication graph such
that every edge has an endpoint lying in at most one part; hence every
edge belongs to at most one part and a vertex can tell from the sender
which of its parts a message concerns.  The core of a part is the set of
its vertices that lie in no other part.

All primitives are node programs run through a :class:`~.network.Network`
so that rounds are accounted for.  Values are tuples of non-negative ints
(plain ints are accepted and returned as ints).
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Callable, Iterable

from . import sim
from .graph import CommGraph, MultiGraph
from .network import Network


class PrimitiveError(ValueError):
    pass


class InvalidCollection(PrimitiveError):
    pass


class NotATree(PrimitiveError):
    pass


class NoCandidate(PrimitiveError):
    pass


class TooManySources(PrimitiveError):
    pass


class InvalidPair(PrimitiveError):
    pass


# ---------------------------------------------------------------------------
# operators


def _sum(a: tuple, b: tuple) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


OPS: dict = {
    "sum": _sum,
    "min": min,
    "max": max,
    "or": lambda a, b: tuple(x | y for x, y in zip(a, b)),
}


def resolve_op(op) -> Callable:
    if callable(op):
        return op
    try:
        return OPS[op]
    except KeyError:
        raise ValueError(f"unknown operator {op!r}") from None


def _as_tuple(x) -> tuple:
    return tuple(x) if isinstance(x, (tuple, list)) else (x,)


def _net(net) -> Network:
    if isinstance(net, Network):
        return net
    if isinstance(net, (CommGraph, MultiGraph)):
        return Network(net)
    raise TypeError("expected a Network, CommGraph or MultiGraph")


# ---------------------------------------------------------------------------
# collections


@dataclass(frozen=True)
class Part:
    vertices: frozenset
    adj: dict  # vertex -> frozenset of part neighbours

    @classmethod
    def induced(cls, comm: CommGraph, vertices: Iterable[int]) -> "Part":
        vs = frozenset(vertices)
        return cls(vs, {v: frozenset(comm.adjacency[v] & vs) for v in vs})

    @classmethod
    def from_edges(cls, vertices: Iterable[int], edges: Iterable[tuple]) -> "Part":
        vs = frozenset(vertices)
        adj = {v: set() for v in vs}
        for u, v in edges:
            if u not in vs or v not in vs:
                raise InvalidCollection(f"part edge ({u},{v}) leaves the part")
            if u != v:
                adj[u].add(v)
                adj[v].add(u)
        return cls(vs, {v: frozenset(a) for v, a in adj.items()})

    def edges(self) -> list:
        return sorted((u, v) for u in self.adj for v in self.adj[u] if u < v)

    def is_connected(self, within: Iterable[int] | None = None) -> bool:
        pool = set(self.vertices if within is None else within)
        if len(pool) <= 1:
            return True
        start = min(pool)
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for w in self.adj[u]:
                if w in pool and w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(pool)


class NearDisjointCollection:
    def __init__(self, parts: list):
        self.parts = list(parts)
        self.membership: dict = defaultdict(list)
        for i, p in enumerate(self.parts):
            for v in p.vertices:
                self.membership[v].append(i)
        self.cores = [frozenset(v for v in p.vertices if len(self.membership[v]) == 1)
                      for p in self.parts]

    @classmethod
    def induced(cls, comm: CommGraph, vertex_sets: Iterable[Iterable[int]]) -> "NearDisjointCollection":
        return cls([Part.induced(comm, vs) for vs in vertex_sets])

    def __len__(self) -> int:
        return len(self.parts)

    def violations(self, comm: CommGraph) -> list:
        out = []
        for i, p in enumerate(self.parts):
            if not p.vertices:
                out.append(f"part {i} is empty")
                continue
            for u, nb in p.adj.items():
                if u not in comm.adjacency:
                    out.append(f"part {i}: vertex {u} not in the network")
                    continue
                for w in nb:
                    if w not in comm.adjacency[u]:
                        out.append(f"part {i}: ({u},{w}) is not a network edge")
                    elif u not in p.adj.get(w, ()):
                        out.append(f"part {i}: adjacency of ({u},{w}) is not symmetric")
                    elif len(self.membership[u]) > 1 and len(self.membership[w]) > 1 and u < w:
                        out.append(f"part {i}: edge ({u},{w}) has both ends in several parts")
            if not p.is_connected():
                out.append(f"part {i} is disconnected")
            core = self.cores[i]
            if core and not p.is_connected(core):
                out.append(f"part {i} has a disconnected core")
            if not core and len(p.vertices) > 1:
                out.append(f"part {i} has an empty core")
        return out

    def validate(self, comm: CommGraph) -> None:
        bad = self.violations(comm)
        if bad:
            raise InvalidCollection("; ".join(bad[:5]))


def _check(coll: NearDisjointCollection, net: Network, validate: bool) -> None:
    if validate:
        coll.validate(net.comm)


# ---------------------------------------------------------------------------
# wave / echo with extinction

_PUSH, _WAVE, _ECHO, _FIN, _RESULT = range(5)


class _WNode:
    __slots__ = ("part", "nbrs", "in_wave", "cand", "own", "attach", "b", "parent", "pending",
                 "acc", "height", "children", "echoed", "done", "result", "deliver")

    def __init__(self, part, nbrs, in_wave, cand, own, attach):
        self.part = part
        self.nbrs = nbrs
        self.in_wave = in_wave
        self.cand = cand
        self.own = own
        self.attach = attach
        self.b = None
        self.parent = None
        self.pending = 0
        self.acc = own
        self.height = 0
        self.children = []
        self.echoed = False
        self.done = False
        self.result = None
        self.deliver = []


@dataclass(frozen=True)
class WaveResult:
    root: int
    result: tuple
    parent: int | None
    children: tuple
    height: int
    core: bool


class _WState:
    __slots__ = ("vid", "step", "nodes", "by_nbr")


class WaveProgram(sim.NodeProgram):
    """Echo waves with extinction over per-part virtual graphs.

    Input per vertex: a list of node specs
    ``(part, nbrs, in_wave, candidate_id_or_None, value, attach, links)``.
    Nodes with ``in_wave`` take part in the wave over ``nbrs`` and accept
    pushes over ``links``; the others
    push their value to ``attach`` in the first round and later receive the
    result from it.  The wave of the smallest candidate survives; its
    spanning tree aggregates all values with ``op``.  In-wave nodes of a
    connected component without candidates never finish, so callers must
    guarantee a candidate per component.
    """

    def __init__(self, op="sum"):
        self.op = resolve_op(op)

    def init(self, view):
        st = _WState()
        st.vid = view.vid
        st.step = 0
        st.nodes = []
        st.by_nbr = {}
        for part, nbrs, in_wave, cand, value, attach, links in view.inp or ():
            node = _WNode(part, tuple(sorted(nbrs)), in_wave, cand, tuple(value), attach)
            st.nodes.append(node)
            for w in node.nbrs:
                st.by_nbr[w] = node
            for w in links:
                st.by_nbr[w] = node
            if attach is not None:
                st.by_nbr[attach] = node
        return st

    def on_round(self, st, inbox):
        st.step += 1
        out = {}
        op = self.op
        if st.step == 1:
            for node in st.nodes:
                if not node.in_wave:
                    if node.attach is None:
                        node.done = True
                        node.b = node.cand if node.cand is not None else st.vid
                        node.result = node.own
                    else:
                        cand = 0 if node.cand is None else node.cand + 1
                        out[node.attach] = (_PUSH, cand) + node.own
            return st, out, not any(n.in_wave for n in st.nodes)

        per_node = defaultdict(list)
        for sender in sorted(inbox):
            per_node[id(st.by_nbr[sender])].append((sender, inbox[sender]))

        for node in st.nodes:
            msgs = per_node.get(id(node), ())
            if not node.in_wave:
                for sender, f in msgs:
                    if f[0] == _RESULT:
                        node.b = f[1]
                        node.result = tuple(f[2:])
                        node.done = True
                continue
            waves = []
            for sender, f in msgs:
                kind = f[0]
                if kind == _PUSH:
                    node.own = op(node.own, tuple(f[2:]))
                    if f[1]:
                        c = f[1] - 1
                        node.cand = c if node.cand is None else min(node.cand, c)
                    node.deliver.append(sender)
                elif kind == _WAVE:
                    waves.append((f[1], sender))
            if st.step == 2 and node.cand is not None and node.b is None:
                self._adopt(node, node.cand, None, out)
            if waves:
                best = min(b for b, _ in waves)
                if node.b is None or best < node.b:
                    self._adopt(node, best, min(s for b, s in waves if b == best), out)
                for b, s in waves:
                    if b == node.b and s != node.parent:
                        node.pending -= 1
            for sender, f in msgs:
                kind = f[0]
                if kind == _ECHO and f[1] == node.b:
                    node.pending -= 1
                    node.children.append(sender)
                    node.height = max(node.height, f[2] + 1)
                    node.acc = op(node.acc, tuple(f[3:]))
                elif kind == _FIN and f[1] == node.b:
                    self._finish(node, f[1], f[2], tuple(f[3:]), out)
            if node.b is not None and not node.echoed and node.pending == 0:
                node.echoed = True
                if node.parent is None:
                    self._finish(node, node.b, node.height, node.acc, out)
                else:
                    out[node.parent] = (_ECHO, node.b, node.height) + node.acc
        return st, out, True

    @staticmethod
    def _adopt(node, b, parent, out):
        node.b = b
        node.parent = parent
        node.pending = len(node.nbrs) - (0 if parent is None else 1)
        node.acc = node.own
        node.height = 0
        node.children = []
        node.echoed = False
        for w in node.nbrs:
            if w != parent:
                out[w] = (_WAVE, b)

    @staticmethod
    def _finish(node, b, height, result, out):
        node.done = True
        node.height = height
        node.result = result
        for c in node.children:
            out[c] = (_FIN, b, height) + result
        for w in node.deliver:
            out[w] = (_RESULT, b) + result

    def output(self, st):
        res = {}
        for node in st.nodes:
            if not node.done:
                res[node.part] = None
                continue
            if node.in_wave:
                res[node.part] = WaveResult(node.b, node.result, node.parent,
                                            tuple(sorted(node.children)), node.height, True)
            else:
                res[node.part] = WaveResult(node.b, node.result, node.attach, (), 0, False)
        return res


def _attach_point(coll: NearDisjointCollection, i: int, v: int) -> int | None:
    core = coll.cores[i]
    if v in core:
        return None
    nb = [w for w in coll.parts[i].adj[v] if w in core]
    return min(nb) if nb else None


def _wave_inputs(coll: NearDisjointCollection, values: dict, cands: dict) -> dict:
    """Build WaveProgram inputs in push mode: cores run the wave."""
    inputs = defaultdict(list)
    for i, p in enumerate(coll.parts):
        core = coll.cores[i]
        for v in p.vertices:
            val = values[(v, i)]
            cand = cands.get((v, i))
            if v in core:
                nbrs = [w for w in p.adj[v] if w in core]
                inputs[v].append((i, nbrs, True, cand, val, None, p.adj[v]))
            else:
                inputs[v].append((i, (), False, cand, val, _attach_point(coll, i, v), ()))
    return inputs


def _run_wave(net: Network, label: str, coll: NearDisjointCollection, values: dict, cands: dict,
              op) -> dict:
    out = net.run(label, WaveProgram(op), _wave_inputs(coll, values, cands))
    return {v: res for v, res in out.items() if res}


def _values(coll, values, default=0) -> tuple:
    """Normalize per-(vertex, part) inputs; returns (dict, scalar?)."""
    scalar = True
    norm = {}
    for i, p in enumerate(coll.parts):
        for v in p.vertices:
            if callable(values):
                x = values(v, i)
            elif (v, i) in values:
                x = values[(v, i)]
            elif v in values:
                x = values[v]
            else:
                x = default
            if isinstance(x, (tuple, list)):
                scalar = False
            norm[(v, i)] = _as_tuple(x)
    return norm, scalar


def pa(net, coll: NearDisjointCollection, values, op="sum", validate: bool = True) -> dict:
    """Part-wise aggregation.

    ``values`` maps (vertex, part) or vertex to the input; returns
    {vertex: {part: aggregate}}.
    """
    net = _net(net)
    _check(coll, net, validate)
    vals, scalar = _values(coll, values)
    cands = {(v, i): v for i in range(len(coll)) for v in coll.cores[i]}
    raw = _run_wave(net, "pa", coll, vals, cands, op)
    return {v: {i: (r.result[0] if scalar else r.result) for i, r in res.items()}
            for v, res in raw.items()}


def sle(net, coll: NearDisjointCollection, candidates, validate: bool = True) -> dict:
    """Leader election per part; the smallest candidate id wins.

    ``candidates`` is a set of (vertex, part) pairs or a per-part iterable of
    vertices.  Returns {vertex: {part: leader}}.
    """
    net = _net(net)
    _check(coll, net, validate)
    cands = _candidate_pairs(coll, candidates)
    for i in range(len(coll)):
        if not any(key[1] == i for key in cands):
            raise NoCandidate(f"part {i} has no candidate")
    vals = {(v, i): () for i, p in enumerate(coll.parts) for v in p.vertices}
    raw = _run_wave(net, "sle", coll, vals, {k: k[0] for k in cands}, "sum")
    return {v: {i: r.root for i, r in res.items()} for v, res in raw.items()}


def _candidate_pairs(coll, candidates) -> set:
    if isinstance(candidates, dict):
        pairs = set()
        for i, vs in candidates.items():
            pairs |= {(v, i) for v in vs}
    else:
        pairs = set(candidates)
    for v, i in pairs:
        if not 0 <= i < len(coll) or v not in coll.parts[i].vertices:
            raise InvalidCollection(f"candidate {v} is not in part {i}")
    return pairs


@dataclass
class Forest:
    """Rooted spanning trees, one per part."""

    roots: dict            # part -> root vertex
    parent: dict           # (vertex, part) -> parent vertex (root -> itself)
    children: dict         # (vertex, part) -> tuple of children
    height: dict           # part -> tree height

    def members(self, i: int) -> list:
        return sorted(v for (v, j) in self.parent if j == i)

    def parts(self) -> list:
        return sorted(self.roots)


def rst(net, coll: NearDisjointCollection, roots: dict, validate: bool = True) -> Forest:
    """Rooted spanning tree of every part, rooted at ``roots[part]``."""
    net = _net(net)
    _check(coll, net, validate)
    for i in range(len(coll)):
        if i not in roots or roots[i] not in coll.parts[i].vertices:
            raise InvalidCollection(f"root of part {i} is not a member")
    vals = {(v, i): () for i, p in enumerate(coll.parts) for v in p.vertices}
    raw = _run_wave(net, "rst", coll, vals, {(r, i): r for i, r in roots.items()}, "sum")
    return _forest_from_waves(coll, raw, roots)


def _forest_from_waves(coll, raw: dict, roots: dict) -> Forest:
    parent = {}
    kids = defaultdict(list)
    for v, res in raw.items():
        for i, r in res.items():
            parent[(v, i)] = r.parent
            for c in r.children:
                kids[(v, i)].append(c)
    # non-core members hang below their attach point
    for (v, i), p in list(parent.items()):
        if v not in coll.cores[i] and p is not None:
            kids[(p, i)].append(v)
    height = {}
    for i, r in roots.items():
        if len(coll.parts[i].vertices) == 1:
            parent[(r, i)] = r
            height[i] = 0
            continue
        if r in coll.cores[i]:
            parent[(r, i)] = r
        else:
            # re-root: the attach point of a non-core root started the wave
            c = parent[(r, i)]
            parent[(r, i)] = r
            parent[(c, i)] = r
            kids[(c, i)] = [w for w in kids[(c, i)] if w != r]
            kids[(r, i)] = [c]
        height[i] = _tree_height(r, i, kids)
    children = {key: tuple(sorted(kids.get(key, ()))) for key in parent}
    return Forest(dict(roots), parent, children, height)


def _tree_height(r, i, kids) -> int:
    best = 0
    stack = [(r, 0)]
    while stack:
        v, d = stack.pop()
        best = max(best, d)
        stack.extend((c, d + 1) for c in kids.get((v, i), ()))
    return best


def bfs_forest(net, coll: NearDisjointCollection, validate: bool = True) -> Forest:
    """Spanning tree of every part rooted at its smallest core vertex."""
    roots = {i: min(coll.cores[i]) if coll.cores[i] else min(coll.parts[i].vertices)
             for i in range(len(coll))}
    return rst(net, coll, roots, validate)


def ccd(net, coll: NearDisjointCollection, indicators, validate: bool = True) -> dict:
    """Connected components of the indicated sub-part of every part.

    ``indicators`` maps a part index to the set of selected part edges
    (pairs).  Returns {vertex: {part: smallest vertex id of its component}}.
    """
    net = _net(net)
    _check(coll, net, validate)
    inputs = defaultdict(list)
    for i, p in enumerate(coll.parts):
        sel = defaultdict(set)
        for u, v in indicators.get(i, ()):
            if v not in p.adj.get(u, ()):
                raise InvalidCollection(f"indicated edge ({u},{v}) is not in part {i}")
            sel[u].add(v)
            sel[v].add(u)
        for v in p.vertices:
            inputs[v].append((i, sorted(sel[v]), True, v, (), None, ()))
    out = net.run("ccd", WaveProgram("sum"), inputs)
    return {v: {i: r.root for i, r in res.items()} for v, res in out.items() if res}


# ---------------------------------------------------------------------------
# tree programs


class _TNode:
    __slots__ = ("part", "parent", "children", "acc", "waiting", "total", "sent")


class TreeCast(sim.NodeProgram):
    """Convergecast over rooted trees, optionally followed by a broadcast.

    Input per vertex: list of (part, parent_or_None, children, value).
    Output per vertex: {part: (subtree aggregate, total or None)}.
    """

    def __init__(self, op="sum", broadcast: bool = True):
        self.op = resolve_op(op)
        self.broadcast = broadcast

    def init(self, view):
        nodes = []
        by = {}
        for part, parent, children, value in view.inp or ():
            t = _TNode()
            t.part = part
            t.parent = parent
            t.children = tuple(children)
            t.acc = tuple(value)
            t.waiting = len(t.children)
            t.total = None
            t.sent = False
            nodes.append(t)
            for c in t.children:
                by[c] = t
            if parent is not None:
                by[parent] = t
        return nodes, by

    def on_round(self, state, inbox):
        nodes, by = state
        out = {}
        for sender, f in inbox.items():
            t = by[sender]
            if f[0] == 0:
                t.acc = self.op(t.acc, tuple(f[1:]))
                t.waiting -= 1
            else:
                t.total = tuple(f[1:])
                for c in t.children:
                    out[c] = (1,) + t.total
        for t in nodes:
            if not t.sent and t.waiting == 0:
                t.sent = True
                if t.parent is None:
                    t.total = t.acc
                    if self.broadcast:
                        for c in t.children:
                            out[c] = (1,) + t.total
                else:
                    out[t.parent] = (0,) + t.acc
        return state, out, True

    def output(self, state):
        return {t.part: (t.acc, t.total) for t in state[0]}


def _tree_inputs(forest: Forest, values: dict, parts: Iterable[int] | None = None) -> dict:
    inputs = defaultdict(list)
    wanted = None if parts is None else set(parts)
    for (v, i), p in forest.parent.items():
        if wanted is not None and i not in wanted:
            continue
        inputs[v].append((i, None if p == v else p, forest.children[(v, i)], values[(v, i)]))
    return inputs


def tree_aggregate(net, forest: Forest, values: dict, op="sum", broadcast: bool = True,
                   label: str = "tree") -> dict:
    """Aggregate over each tree of ``forest``; returns {(v, part): (subtree, total)}."""
    net = _net(net)
    vals = {k: _as_tuple(values[k]) for k in forest.parent}
    out = net.run(label, TreeCast(op, broadcast), _tree_inputs(forest, vals))
    return {(v, i): r for v, res in out.items() if res for i, r in res.items()}


def _check_tree(trees: dict) -> None:
    """``trees``: part -> {vertex: parent}; the root maps to itself."""
    for i, par in trees.items():
        roots = [v for v, p in par.items() if p == v]
        if len(roots) != 1:
            raise NotATree(f"part {i} has {len(roots)} roots")
        for v, p in par.items():
            if p not in par:
                raise NotATree(f"part {i}: parent {p} of {v} is not in the tree")
            seen = {v}
            while par[v] != v:
                v = par[v]
                if v in seen:
                    raise NotATree(f"part {i} contains a cycle")
                seen.add(v)


def forest_from_parents(trees: dict) -> Forest:
    """Build a :class:`Forest` from {part: {vertex: parent}} (root maps to itself)."""
    parent, kids, roots = {}, defaultdict(list), {}
    for i, par in trees.items():
        for v, p in par.items():
            parent[(v, i)] = p
            if p == v:
                roots[i] = v
            else:
                kids[(p, i)].append(v)
    return Forest(roots, parent, {k: tuple(sorted(kids.get(k, ()))) for k in parent},
                  {i: _tree_height(r, i, kids) for i, r in roots.items()})


def sta(net, trees: dict, values, op="sum") -> dict:
    """Subtree aggregation on rooted trees.

    ``trees`` maps a part index to {vertex: parent} (root maps to itself);
    trees must be edge-disjoint subgraphs of the network.  Returns
    {vertex: {part: aggregate over the vertex's subtree}}.
    """
    net = _net(net)
    _check_tree(trees)
    seen_edges = {}
    for i, par in trees.items():
        for v, p in par.items():
            if p != v:
                if p not in net.comm.adjacency[v]:
                    raise NotATree(f"tree edge ({v},{p}) is not a network edge")
                e = (min(v, p), max(v, p))
                if seen_edges.setdefault(e, i) != i:
                    raise InvalidCollection(f"edge {e} is shared by two trees")
    forest = forest_from_parents(trees)
    parent = forest.parent
    scalar = True
    vals = {}
    for (v, i) in parent:
        x = values(v, i) if callable(values) else values.get((v, i), values.get(v, 0))
        scalar = scalar and not isinstance(x, (tuple, list))
        vals[(v, i)] = _as_tuple(x)
    res = tree_aggregate(net, forest, vals, op, broadcast=False, label="sta")
    out = defaultdict(dict)
    for (v, i), (sub, _) in res.items():
        out[v][i] = sub[0] if scalar else sub
    return dict(out)


# ---------------------------------------------------------------------------
# pipelined broadcast


class _BNode:
    __slots__ = ("part", "parent", "children", "up", "down", "child_done", "up_done",
                 "got", "down_done", "end_sent", "is_root")


class PipelinedBroadcast(sim.NodeProgram):
    """Every item reaches the root of its tree and is streamed back down.

    Input per vertex: list of (part, parent_or_None, children, items) with
    items being equal-length tuples.  Each message packs as many items as
    fit into the bandwidth.  Output: {part: sorted list of all items}.
    """

    def __init__(self, arity: int):
        self.arity = arity

    def init(self, view):
        nodes, by = [], {}
        for part, parent, children, items in view.inp or ():
            b = _BNode()
            b.part = part
            b.parent = parent
            b.children = tuple(children)
            b.is_root = parent is None
            b.up = deque(items if not b.is_root else ())
            b.got = list(items) if b.is_root else []
            b.down = {c: deque(items if b.is_root else ()) for c in b.children}
            b.child_done = 0
            b.up_done = False
            b.down_done = False
            b.end_sent = set()
            nodes.append(b)
            for c in b.children:
                by[c] = b
            if parent is not None:
                by[parent] = b
        return nodes, by, view.bandwidth

    @staticmethod
    def _pack(kind, queue, budget):
        used = sim.message_bits((kind, 1))
        taken = []
        while queue:
            b = sim.message_bits(queue[0])
            if taken and used + b > budget:
                break
            used += b
            taken.append(queue.popleft())
        return taken

    def on_round(self, state, inbox):
        nodes, by, budget = state
        out = {}
        for sender, f in inbox.items():
            b = by[sender]
            kind, end = f[0], f[1]
            body = f[2:]
            items = [tuple(body[k:k + self.arity]) for k in range(0, len(body), self.arity)]
            if kind == 0:  # from a child
                if b.is_root:
                    b.got.extend(items)
                    for c in b.children:
                        b.down[c].extend(items)
                else:
                    b.up.extend(items)
                if end:
                    b.child_done += 1
            else:  # from the parent
                b.got.extend(items)
                for c in b.children:
                    b.down[c].extend(items)
                if end:
                    b.down_done = True
        halted = True
        for b in nodes:
            if b.is_root and b.child_done == len(b.children):
                b.down_done = True
            if not b.is_root and not b.up_done:
                finished_below = b.child_done == len(b.children)
                if b.up or finished_below:
                    taken = self._pack(0, b.up, budget)
                    end = int(finished_below and not b.up)
                    if taken or end:
                        out[b.parent] = (0, end) + tuple(x for it in taken for x in it)
                        b.up_done = bool(end)
            for c in b.children:
                if c in b.end_sent:
                    continue
                q = b.down[c]
                if q or b.down_done:
                    taken = self._pack(1, q, budget)
                    end = int(b.down_done and not q)
                    if taken or end:
                        out[c] = (1, end) + tuple(x for it in taken for x in it)
                        if end:
                            b.end_sent.add(c)
            if (not b.is_root and not b.up_done and b.up) or any(
                    b.down[c] for c in b.children if c not in b.end_sent) or (
                    b.down_done and len(b.end_sent) < len(b.children)):
                halted = False
        return state, out, halted

    def output(self, state):
        return {b.part: sorted(b.got) for b in state[0]}


def bct(net, coll: NearDisjointCollection, h: int, messages: dict, forest: Forest | None = None,
        validate: bool = True) -> dict:
    """Broadcast every (source, message) pair of a part to all its members.

    ``messages`` maps a part index to a list of (source, payload) pairs,
    payload being an int or a tuple of ints of a common length.  Returns
    {vertex: {part: sorted list of (source, payload)}}.
    """
    net = _net(net)
    _check(coll, net, validate)
    arity = None
    scalar = True
    per_vertex = defaultdict(list)
    for i, items in messages.items():
        if len(items) > h:
            raise TooManySources(f"part {i} has {len(items)} messages, more than h={h}")
        for src, payload in items:
            if src not in coll.parts[i].vertices:
                raise InvalidCollection(f"source {src} is not in part {i}")
            scalar = scalar and not isinstance(payload, (tuple, list))
            t = (src,) + _as_tuple(payload)
            if arity is None:
                arity = len(t)
            elif len(t) != arity:
                raise ValueError("all payloads must have the same length")
            per_vertex[(src, i)].append(t)
    if arity is None:
        return {v: {i: [] for i in coll.membership[v]} for v in coll.membership}
    if forest is None:
        forest = bfs_forest(net, coll, validate=False)
    inputs = defaultdict(list)
    for (v, i), p in forest.parent.items():
        inputs[v].append((i, None if p == v else p, forest.children[(v, i)], per_vertex.get((v, i), [])))
    out = net.run("bct", PipelinedBroadcast(arity), inputs)
    res = {}
    for v, parts in out.items():
        if not parts:
            continue
        res[v] = {i: [(t[0], t[1] if scalar else tuple(t[1:])) for t in items]
                  for i, items in parts.items()}
    return res


# ---------------------------------------------------------------------------
# minimum vertex cuts


class _ResidualBFS(sim.NodeProgram):
    """One residual BFS phase on the vertex-split part.

    Input: (nbrs, is_x, is_y, intf, fin, fout) where ``intf`` is the flow on
    v_in -> v_out, ``fin[u]`` the flow on u_out -> v_in and ``fout[u]`` the
    flow on v_out -> u_in.  Message fields: (reach mask, ack mask, hit dist
    + 1 or 0, hit id, sender dist).  Bit 0 concerns arcs ending at the
    receiver's in-half, bit 1 arcs ending at its out-half.
    """

    def init(self, view):
        nbrs, is_x, is_y, intf, fin, fout = view.inp
        return {
            "vid": view.vid, "nbrs": nbrs, "x": is_x, "y": is_y, "intf": intf, "fin": fin, "fout": fout,
            "r": [False, False], "d": [0, 0], "p": [None, None], "pend": [0, 0], "hit": [None, None],
            "done": [False, False], "root_hit": None, "start": True,
        }

    @staticmethod
    def _minhit(a, b):
        if a is None:
            return b
        if b is None:
            return a
        return min(a, b)

    def on_round(self, s, inbox):
        reach_to = defaultdict(int)
        acks = defaultdict(int)
        hits = {}
        newly = []
        if s["start"]:
            s["start"] = False
            if s["x"]:
                for h in (0, 1):
                    s["r"][h] = True
                    s["p"][h] = "root"
                newly = [0, 1]
                if s["y"]:
                    s["hit"][0] = (0, s["vid"])
        for u in sorted(inbox):
            rm, am, hd, hid, rd = inbox[u]
            hit = (hd - 1, hid) if hd else None
            for h in (0, 1):
                if am >> h & 1:
                    s["pend"][1 - h] -= 1
                    s["hit"][1 - h] = self._minhit(s["hit"][1 - h], hit)
            for h in (0, 1):
                if rm >> h & 1:
                    if s["r"][h]:
                        acks[u] |= 1 << h
                    else:
                        s["r"][h] = True
                        s["p"][h] = u
                        s["d"][h] = rd + 1
                        newly.append(h)
        # expansion, including free local arcs
        stack = list(newly)
        while stack:
            h = stack.pop()
            if h == 0:
                if s["y"] and s["p"][0] != "root":
                    s["hit"][0] = self._minhit(s["hit"][0], (s["d"][0], s["vid"]))
                    continue
                for u in s["nbrs"]:
                    if s["fin"].get(u, 0) > 0:
                        reach_to[u] |= 2
                        s["pend"][0] += 1
                if s["intf"] == 0 and not s["r"][1]:
                    s["r"][1] = True
                    s["p"][1] = "local"
                    s["d"][1] = s["d"][0]
                    s["pend"][0] += 1
                    stack.append(1)
            else:
                for u in s["nbrs"]:
                    reach_to[u] |= 1
                    s["pend"][1] += 1
                if s["intf"] > 0 and not s["r"][0]:
                    s["r"][0] = True
                    s["p"][0] = "local"
                    s["d"][0] = s["d"][1]
                    s["pend"][1] += 1
                    stack.append(0)
        # completion, cascading over local arcs
        changed = True
        while changed:
            changed = False
            for h in (0, 1):
                if s["r"][h] and not s["done"][h] and s["pend"][h] == 0:
                    s["done"][h] = True
                    changed = True
                    p = s["p"][h]
                    if p == "root":
                        s["root_hit"] = self._minhit(s["root_hit"], s["hit"][h])
                    elif p == "local":
                        s["pend"][1 - h] -= 1
                        s["hit"][1 - h] = self._minhit(s["hit"][1 - h], s["hit"][h])
                    else:
                        acks[p] |= 1 << h
                        hits[p] = self._minhit(hits.get(p), s["hit"][h])
        out = {}
        # every half reached in this round has the same hop distance
        mydist = s["d"][newly[0]] if newly else 0
        for u in set(reach_to) | set(acks):
            hit = hits.get(u)
            out[u] = (reach_to.get(u, 0), acks.get(u, 0), hit[0] + 1 if hit else 0,
                      hit[1] if hit else 0, mydist)
        return s, out, True

    def output(self, s):
        return {"r": tuple(s["r"]), "p": tuple(s["p"]), "root_hit": s["root_hit"],
                "hit": s["hit"][0] if s["y"] else None}


class _Augment(sim.NodeProgram):
    """Trace one augmenting path back from the sink along BFS parents."""

    def init(self, view):
        nbrs, intf, fin, fout, parents, start = view.inp
        return {"intf": intf, "fin": dict(fin), "fout": dict(fout), "p": parents, "start": start}

    def _walk(self, s, h, out):
        while True:
            p = s["p"][h]
            if p == "root" or p is None:
                return
            if p == "local":
                if h == 0:
                    s["intf"] -= 1
                    h = 1
                else:
                    s["intf"] += 1
                    h = 0
                continue
            if h == 0:
                s["fin"][p] = s["fin"].get(p, 0) + 1
                out[p] = (0,)
            else:
                s["fout"][p] = s["fout"].get(p, 0) - 1
                out[p] = (1,)
            return

    def on_round(self, s, inbox):
        out = {}
        if s["start"]:
            s["start"] = False
            self._walk(s, 0, out)
        for w, (kind,) in inbox.items():
            if kind == 0:
                s["fout"][w] = s["fout"].get(w, 0) + 1
                self._walk(s, 1, out)
            else:
                s["fin"][w] = s["fin"].get(w, 0) - 1
                self._walk(s, 0, out)
        return s, out, True

    def output(self, s):
        return s["intf"], s["fin"], s["fout"]


def mvc(net, coll: NearDisjointCollection, h: int, t: int, pairs: dict, forest: Forest | None = None,
        validate: bool = True, strict: bool = True) -> dict:
    """Vertex cut of size <= t between X and Y inside each part, or -1.

    ``pairs`` maps a part index to a list of (X, Y) vertex-set pairs (at
    most ``h`` per part); ``t`` is an int or a per-part dict of bounds.
    Returns {(part, j): frozenset cut or -1}.  An
    adjacent or shared X/Y pair has no finite cut; with ``strict`` a shared
    vertex raises :class:`InvalidPair`, otherwise it also yields -1.
    """
    net = _net(net)
    _check(coll, net, validate)
    bound = t if isinstance(t, dict) else {i: t for i in pairs}
    if any(b < 0 for b in bound.values()):
        raise ValueError("t must be non-negative")
    jobs = {}
    for i, lst in pairs.items():
        if len(lst) > h:
            raise TooManySources(f"part {i} has {len(lst)} pairs, more than h={h}")
        part = coll.parts[i]
        for j, (X, Y) in enumerate(lst):
            X, Y = frozenset(X), frozenset(Y)
            if not X <= part.vertices or not Y <= part.vertices:
                raise InvalidPair(f"pair {j} of part {i} leaves the part")
            if X & Y and strict:
                raise InvalidPair(f"pair {j} of part {i}: X and Y overlap")
            jobs[(i, j)] = (X, Y)
    if not jobs:
        return {}
    if forest is None:
        forest = bfs_forest(net, coll, validate=False)
    results = {}
    flows = {}
    for key, (X, Y) in jobs.items():
        if not X or not Y:
            results[key] = frozenset()
            continue
        part = coll.parts[key[0]]
        flows[key] = {v: (0, {}, {}) for v in part.vertices}
    active = [k for k in jobs if k not in results]
    for _ in range(max(bound.values(), default=0) + 2):
        if not active:
            break
        insts = []
        for key in active:
            i = key[0]
            X, Y = jobs[key]
            part = coll.parts[i]
            inp = {v: (tuple(sorted(part.adj[v])), v in X, v in Y) + flows[key][v] for v in part.vertices}
            insts.append((key, _ResidualBFS(), inp, part.vertices))
        bfs = net.run_many("mvc", insts)
        # decide the best hit of every instance over its part tree
        insts = []
        for key in active:
            i = key[0]
            # residual distances stay below twice the part size
            no_hit = (2 * len(coll.parts[i].vertices) + 2, 0)
            vals = {}
            for v in coll.parts[i].vertices:
                rh = bfs[key][v]["root_hit"]
                vals[v] = rh if rh is not None else no_hit
            insts.append((key, TreeCast("min"),
                          _tree_inputs(forest, {(v, i): vals[v] for v in vals}, [i]),
                          coll.parts[i].vertices))
        agg = net.run_many("mvc", insts)
        aug_insts = []
        still = []
        for key in active:
            i = key[0]
            root = forest.roots[i]
            best = agg[key][root][i][1]
            if best[0] >= 2 * len(coll.parts[i].vertices) + 2:
                res = bfs[key]
                results[key] = frozenset(v for v, o in res.items()
                                         if o["r"][0] and not o["r"][1]
                                         and v not in jobs[key][0] and v not in jobs[key][1])
                continue
            dist, y = best
            if dist <= 1:
                results[key] = -1
                continue
            part = coll.parts[i]
            inp = {v: (None, flows[key][v][0], flows[key][v][1], flows[key][v][2],
                       bfs[key][v]["p"], v == y) for v in part.vertices}
            aug_insts.append((key, _Augment(), inp, part.vertices))
            still.append(key)
        if aug_insts:
            aug = net.run_many("mvc", aug_insts)
            for key in still:
                flows[key] = {v: aug[key][v] for v in aug[key]}
                if _flow_value(flows[key], jobs[key][1]) > bound[key[0]]:
                    results[key] = -1
        active = [k for k in still if k not in results]
    for key in active:
        results[key] = -1
    return results


def _flow_value(flow: dict, Y) -> int:
    """Units of flow entering Y (one per augmentation)."""
    return sum(f for y in Y for f in flow[y][1].values())


# ---------------------------------------------------------------------------
# neighbour exchange


class NeighborExchange(sim.NodeProgram):
    """Send an arbitrary-length int tuple to chosen neighbours.

    Input: {neighbour: tuple}.  Long payloads are cut into chunks that fit
    the bandwidth; the first field of every chunk says whether more follow.
    Output: {sender: tuple}.
    """

    def init(self, view):
        queues = {w: list(_as_tuple(p)) for w, p in (view.inp or {}).items()}
        return {"q": queues, "got": defaultdict(list), "B": view.bandwidth}

    def on_round(self, s, inbox):
        for w, f in inbox.items():
            s["got"][w].extend(f[1:])
        out = {}
        for w, q in s["q"].items():
            if q is None:
                continue
            used = sim.field_bits(1)
            k = 0
            while k < len(q) and used + sim.field_bits(q[k]) <= s["B"]:
                used += sim.field_bits(q[k])
                k += 1
            if k == 0 and q:
                raise sim.BandwidthExceeded("a single field does not fit into one message")
            more = int(k < len(q))
            out[w] = (more,) + tuple(q[:k])
            s["q"][w] = q[k:] if more else None
        return s, out, all(q is None for q in s["q"].values())

    def output(self, s):
        return {w: tuple(v) for w, v in s["got"].items()}


def neighbor_exchange(net, payloads: dict, label: str = "exchange") -> dict:
    """Deliver ``payloads[v][w]`` from every v to its neighbour w.

    Returns {w: {v: tuple}}.
    """
    net = _net(net)
    return net.run(label, NeighborExchange(), payloads)
