"""Balanced vertex separators of bounded size.

A separator is found for a guess ``t`` of treewidth + 1 that doubles until
the search succeeds.  For a fixed ``t`` the search either stops early
(few measured vertices), removes the roots of a tree splitting for a few
iterations, or samples pairs of split trees and unions their small vertex
cuts.  All communication goes through the primitives of
:mod:`tw_congest.primitives`; several vertex-disjoint graphs can be
handled at once with :func:`parallel_separators`.
"""

from __future__ import annotations

import math
import random
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from . import primitives as pr
from .graph import CommGraph, MultiGraph, WeightedMeasure, derive_comm_graph
from .network import Network


class SeparatorError(ValueError):
    pass


class Disconnected(SeparatorError):
    pass


class SplitError(SeparatorError):
    """A tree could not be split (precondition) or a split broke its contract."""


@dataclass(frozen=True)
class SepConfig:
    alpha_num: int = 14399
    alpha_den: int = 14400
    base_cutoff: int = 200
    pair_samples: int = 95
    size_bound_mult: int = 400
    trials: int = 5
    split_lo_div: int = 12
    split_hi_div: int = 4
    iter_num: int = 301
    iter_den: int = 300
    name: str = "custom"

    def __post_init__(self):
        if not 0 < self.alpha_num < self.alpha_den:
            raise ValueError("alpha must lie strictly between 0 and 1")
        for f in ("base_cutoff", "pair_samples", "size_bound_mult", "trials",
                  "split_lo_div", "split_hi_div", "iter_num", "iter_den"):
            if getattr(self, f) <= 0:
                raise ValueError(f"{f} must be positive")
        if self.iter_num < self.iter_den:
            raise ValueError("iter_num/iter_den must be at least 1")
        # grouping windows need hi >= 3 lo; single vertices must never be split
        if self.split_lo_div < 3 * self.split_hi_div:
            raise ValueError("split_lo_div must be at least 3 * split_hi_div")
        if 2 * self.base_cutoff < self.split_hi_div:
            raise ValueError("base_cutoff too small for the split thresholds")
        if self.size_bound_mult < 2 * self.base_cutoff:
            raise ValueError("size_bound_mult must cover the step-1 output (>= 2 * base_cutoff)")

    @property
    def alpha(self) -> Fraction:
        return Fraction(self.alpha_num, self.alpha_den)

    def size_bound(self, t: int) -> int:
        return self.size_bound_mult * t * t // 2

    def iterations(self, t: int) -> int:
        return t + math.ceil(t * (self.iter_num - self.iter_den) / self.iter_den)

    def trial_count(self, n: int) -> int:
        return self.trials * max(1, math.ceil(math.log2(max(n, 2))))

    @classmethod
    def paper(cls) -> "SepConfig":
        return cls(name="paper")

    @classmethod
    def desk(cls) -> "SepConfig":
        return cls(alpha_num=3, alpha_den=4, base_cutoff=4, pair_samples=20, size_bound_mult=32,
                   trials=1, name="desk")


PROFILES = {"paper": SepConfig.paper, "desk": SepConfig.desk}


def profile(name: str) -> SepConfig:
    try:
        return PROFILES[name]()
    except KeyError:
        raise ValueError(f"unknown profile {name!r}") from None


# ---------------------------------------------------------------------------
# split trees


@dataclass(frozen=True, eq=False)
class SplitTree:
    """A rooted tree given by a parent map (the root maps to itself)."""

    root: int
    parent: dict

    @property
    def vertices(self) -> frozenset:
        return frozenset(self.parent)

    def edges(self) -> set:
        return {(min(v, p), max(v, p)) for v, p in self.parent.items() if v != p}

    def children(self) -> dict:
        kids = defaultdict(list)
        for v, p in self.parent.items():
            if v != p:
                kids[p].append(v)
        return kids

    @property
    def ident(self) -> tuple:
        """(root, largest child of the root); the root alone for a single vertex."""
        kids = [v for v, p in self.parent.items() if p == self.root and v != self.root]
        return (self.root, max(kids) if kids else self.root)


@dataclass(frozen=True)
class SplitTreeProfile:
    index: int
    ident: tuple
    size: int


def _subtree_sizes(tree: SplitTree, mu) -> dict:
    kids = tree.children()
    order = [tree.root]
    for v in order:
        order.extend(kids.get(v, ()))
    size = {}
    for v in reversed(order):
        size[v] = mu([v]) + sum(size[c] for c in kids.get(v, ()))
    return size


def _is_center(v, kids, size, total) -> bool:
    return 2 * size[v] >= total and all(2 * size[c] <= total for c in kids.get(v, ()))


def _reroot(parent: dict, c: int) -> dict:
    new = dict(parent)
    v = c
    while parent[v] != v:
        new[parent[v]] = v
        v = parent[v]
    new[c] = c
    return new


def _carve(c: int, child_size: dict, mu_c: int, lo: Fraction) -> list:
    """Split a tree rooted at the center ``c`` into pieces sharing ``c``.

    ``child_size`` holds the measure of every child subtree.  Returns a list
    of child groups; each group plus ``c`` forms one piece.
    """
    ys = sorted(child_size)
    cut = [y for y in ys if child_size[y] >= lo]
    rest = [y for y in ys if child_size[y] < lo]
    rest_size = mu_c + sum(child_size[y] for y in rest)
    groups = [[y] for y in cut]
    if rest_size < lo:
        if rest:
            groups[0].extend(rest)
    elif rest:
        formed = []
        cur, acc = [], mu_c
        for y in rest:
            cur.append(y)
            acc += child_size[y]
            if acc >= lo:
                formed.append(cur)
                cur, acc = [], mu_c
        if cur:
            formed[-1].extend(cur)
        for k, grp in enumerate(formed):
            size = mu_c + sum(child_size[y] for y in grp)
            cap = 2 * lo if k < len(formed) - 1 else 3 * lo
            if not lo <= size < cap:
                raise SplitError(f"group of size {size} outside window [{lo}, {cap})")
        groups.extend(formed)
    return groups


def _pieces(parent: dict, c: int, groups: list) -> list:
    kids = defaultdict(list)
    for v, p in parent.items():
        if v != p:
            kids[p].append(v)
    out = []
    for grp in groups:
        par = {c: c}
        stack = list(grp)
        for y in grp:
            par[y] = c
        while stack:
            u = stack.pop()
            for w in kids.get(u, ()):
                par[w] = u
                stack.append(w)
        out.append(SplitTree(c, par))
    return out


def _check_split(tree: SplitTree, pieces: list, mu, mu_G: int, t: int, lo_div: int) -> None:
    total = mu(tree.vertices)
    lo = Fraction(mu_G, lo_div * t)
    seen_edges = set()
    covered = set()
    roots = {p.root for p in pieces}
    for piece in pieces:
        if piece.parent[piece.root] != piece.root:
            raise SplitError("piece root does not map to itself")
        e = piece.edges()
        if e & seen_edges:
            raise SplitError("pieces share an edge")
        seen_edges |= e
        for other in covered & piece.vertices:
            if other not in roots:
                raise SplitError(f"pieces share non-root vertex {other}")
        covered |= piece.vertices
        size = mu(piece.vertices)
        if not lo <= size <= Fraction(5 * total, 6):
            raise SplitError(f"piece of size {size} outside [{lo}, {Fraction(5 * total, 6)}]")
    if seen_edges != tree.edges() or covered != tree.vertices:
        raise SplitError("pieces do not partition the tree")


def split(tree: SplitTree, mu: WeightedMeasure, mu_G: int, t: int, lo_div: int = 12,
          hi_div: int = 4) -> list:
    """Split one tree into pieces of measure in [mu_G/(lo_div t), 5 mu(tree)/6].

    The tree is re-rooted at its center (smallest id among vertices whose
    removal leaves parts of measure at most half).  Child subtrees of
    measure at least mu_G/(lo_div t) become pieces; the light remainder is
    either merged into one of them or grouped into consecutive windows.
    Every piece contains the center as its root.
    """
    total = mu(tree.vertices)
    if total * hi_div * t <= mu_G:
        raise SplitError(f"tree of measure {total} is not heavier than mu_G/({hi_div}t)")
    if len(tree.parent) == 1:
        raise SplitError("a single vertex cannot be split")
    # unit vertices must fit below the lower window: mu_G/(lo_div t) > 1/2
    if 2 * mu_G <= lo_div * t:
        raise SplitError(f"mu_G={mu_G} is too small for t={t}")
    size = _subtree_sizes(tree, mu)
    kids = tree.children()
    c = min(v for v in tree.parent if _is_center(v, kids, size, total))
    new = _reroot(tree.parent, c)
    child_size = {y: size[y] for y in kids.get(c, ())}
    if tree.parent[c] != c:
        child_size[tree.parent[c]] = total - size[c]
    groups = _carve(c, child_size, mu([c]), Fraction(mu_G, lo_div * t))
    pieces = _pieces(new, c, groups)
    _check_split(tree, pieces, mu, mu_G, t, lo_div)
    return pieces


# ---------------------------------------------------------------------------
# request batching: every part runs as a generator that yields primitive
# calls; calls of the same kind from different parts share one execution.


@dataclass
class _Req:
    kind: str
    parts: list = None
    args: dict = None

    @property
    def key(self) -> tuple:
        a = self.args or {}
        return (self.kind, a.get("op"), a.get("broadcast"))


def _shift_forest(f: pr.Forest, off: int) -> tuple:
    return ({i + off: r for i, r in f.roots.items()},
            {(v, i + off): p for (v, i), p in f.parent.items()},
            {(v, i + off): c for (v, i), c in f.children.items()},
            {i + off: h for i, h in f.height.items()})


def _merge_forests(forests: list, offs: list) -> pr.Forest:
    roots, parent, children, height = {}, {}, {}, {}
    for f, off in zip(forests, offs):
        r, p, c, h = _shift_forest(f, off)
        roots.update(r)
        parent.update(p)
        children.update(c)
        height.update(h)
    return pr.Forest(roots, parent, children, height)


def _slice_forest(f: pr.Forest, off: int, count: int) -> pr.Forest:
    keep = range(off, off + count)
    return pr.Forest({i - off: r for i, r in f.roots.items() if i in keep},
                     {(v, i - off): p for (v, i), p in f.parent.items() if i in keep},
                     {(v, i - off): c for (v, i), c in f.children.items() if i in keep},
                     {i - off: h for i, h in f.height.items() if i in keep})


def _by_part(res: dict, reqs: list, offs: list, counts: list) -> list:
    """Split a {vertex: {global part: x}} result into per-request local results."""
    owner = {}
    for k, (off, cnt) in enumerate(zip(offs, counts)):
        for i in range(off, off + cnt):
            owner[i] = k
    out = [defaultdict(dict) for _ in reqs]
    for v, per in res.items():
        for i, x in per.items():
            k = owner[i]
            out[k][v][i - offs[k]] = x
    return out


def _execute(net: Network, reqs: list) -> list:
    kind = reqs[0].kind
    if kind == "snc":
        payloads = {}
        for r in reqs:
            payloads.update(r.args["payloads"])
        res = pr.neighbor_exchange(net, payloads, label="sep-snc")
        return [res] * len(reqs)
    if kind == "tree":
        trees, values, offs, counts = {}, {}, [], []
        off = 0
        for r in reqs:
            offs.append(off)
            counts.append(len(r.args["trees"]))
            for i, par in r.args["trees"].items():
                trees[i + off] = par
            for (v, i), x in r.args["values"].items():
                values[(v, i + off)] = x
            off += len(r.args["trees"])
        forest = pr.forest_from_parents(trees)
        res = pr.tree_aggregate(net, forest, values, r.args["op"], r.args["broadcast"], label="sep-tree")
        nested = defaultdict(dict)
        for (v, i), x in res.items():
            nested[v][i] = x
        split_res = _by_part(nested, reqs, offs, counts)
        return [{(v, i): x for v, per in sr.items() for i, x in per.items()} for sr in split_res]

    parts, offs, counts = [], [], []
    for r in reqs:
        offs.append(len(parts))
        counts.append(len(r.parts))
        parts.extend(r.parts)
    coll = pr.NearDisjointCollection(parts)

    def shift(key):
        d = {}
        for r, off in zip(reqs, offs):
            for i, x in r.args[key].items():
                d[i + off] = x
        return d

    if kind == "pa":
        values = {}
        for r, off in zip(reqs, offs):
            for (v, i), x in r.args["values"].items():
                values[(v, i + off)] = x
        return _by_part(pr.pa(net, coll, values, r.args["op"], validate=False), reqs, offs, counts)
    if kind == "sle":
        return _by_part(pr.sle(net, coll, shift("candidates"), validate=False), reqs, offs, counts)
    if kind == "rst":
        forest = pr.rst(net, coll, shift("roots"), validate=False)
        return [_slice_forest(forest, off, cnt) for off, cnt in zip(offs, counts)]
    if kind == "ccd":
        return _by_part(pr.ccd(net, coll, shift("indicators"), validate=False), reqs, offs, counts)
    forest = _merge_forests([r.args["forest"] for r in reqs], offs)
    h = max(r.args["h"] for r in reqs)
    if kind == "bct":
        res = pr.bct(net, coll, h, shift("messages"), forest=forest, validate=False)
        return _by_part(res, reqs, offs, counts)
    if kind == "mvc":
        bound = {i + off: r.args["t"] for r, off, cnt in zip(reqs, offs, counts) for i in range(cnt)}
        res = pr.mvc(net, coll, h, bound, shift("pairs"), forest=forest, validate=False, strict=False)
        out = [dict() for _ in reqs]
        for k, (off, cnt) in enumerate(zip(offs, counts)):
            for (i, j), cut in res.items():
                if off <= i < off + cnt:
                    out[k][(i - off, j)] = cut
        return out
    raise ValueError(f"unknown request kind {kind!r}")


def _drive(net: Network, procs: list) -> list:
    results = [None] * len(procs)
    pending = {}

    def advance(k, value, first=False):
        try:
            req = next(procs[k]) if first else procs[k].send(value)
        except StopIteration as stop:
            results[k] = stop.value
            pending.pop(k, None)
            return
        pending[k] = req

    for k in range(len(procs)):
        advance(k, None, first=True)
    while pending:
        groups: dict = {}
        for k in sorted(pending):
            groups.setdefault(pending[k].key, []).append(k)
        for members in groups.values():
            answers = _execute(net, [pending[k] for k in members])
            for k, ans in zip(members, answers):
                advance(k, ans)
    return results


# ---------------------------------------------------------------------------
# the search for one part


class Separator(frozenset):
    """Separator vertices plus the trace of the search that produced them.

    ``t`` is the terminal guess, ``step`` says which rule produced the
    output ("cutoff", "roots" or "cuts"), ``tried`` lists every guess and
    ``trials`` counts sampling trials at the terminal guess.
    """

    t: int
    step: str
    tried: tuple
    trials: int

    def __new__(cls, vertices=(), t=2, step="cutoff", tried=(), trials=0):
        self = super().__new__(cls, vertices)
        self.t = t
        self.step = step
        self.tried = tuple(tried)
        self.trials = trials
        return self

    def __reduce__(self):
        return (Separator, (frozenset(self), self.t, self.step, self.tried, self.trials))


class _Search:
    def __init__(self, comm: CommGraph, vertices: frozenset, x: frozenset, cfg: SepConfig, rng):
        self.comm = comm
        self.V = vertices
        self.X = x & vertices
        self.mu = WeightedMeasure(self.X)
        self.cfg = cfg
        self.rng = rng
        self.G = pr.Part.induced(comm, vertices)
        self.big = max(vertices) + 1

    def run(self):
        res = yield _Req("pa", [self.G], {"op": "sum", "values": {(v, 0): int(v in self.X) for v in self.V}})
        self.muG = next(iter(res.values()))[0]
        res = yield _Req("sle", [self.G], {"candidates": {0: sorted(self.V)}})
        self.leader = next(iter(res.values()))[0]
        self.forest = yield _Req("rst", [self.G], {"roots": {0: self.leader}})
        self.tree = {v: self.forest.parent[(v, 0)] for v in self.V}
        t = 2
        tried = []
        cfg = self.cfg
        while True:
            tried.append(t)
            if self.muG <= cfg.base_cutoff * t * t:
                return Separator(self.X, t, "cutoff", tried)
            outcome, payload = yield from self._iterate(t)
            if outcome == "halt":
                if len(payload) <= cfg.size_bound(t):
                    return Separator(payload, t, "roots", tried)
            else:
                for trial in range(1, cfg.trial_count(len(self.V)) + 1):
                    z = yield from self._sample_cuts(t, payload)
                    if len(z) <= cfg.size_bound(t):
                        worst, _ = yield from self._components(z, frozenset())
                        if worst * cfg.alpha_den <= cfg.alpha_num * self.muG:
                            return Separator(z, t, "cuts", tried, trial)
            t *= 2

    # -- helpers -----------------------------------------------------------

    def _components(self, removed: frozenset, focus: frozenset):
        """Measure the components of G - removed.

        Returns (largest measure overall, (measure, id, vertices) of the
        heaviest component inside ``focus`` or None).
        """
        keep = [(u, w) for u, w in self.G.edges() if u not in removed and w not in removed]
        res = yield _Req("ccd", [self.G], {"indicators": {0: keep}})
        cid = {v: res[v][0] for v in self.V if v not in removed}
        groups = defaultdict(set)
        for v, c in cid.items():
            groups[c].add(v)
        order = sorted(groups)
        size_of = {}
        if order:
            parts = [pr.Part.induced(self.comm, groups[c]) for c in order]
            vals = {(v, j): int(v in self.X) for j, c in enumerate(order) for v in groups[c]}
            res = yield _Req("pa", parts, {"op": "sum", "values": vals})
            for j, c in enumerate(order):
                size_of[c] = res[c][j]
        vals = {}
        for v in self.V:
            c = cid.get(v)
            s = size_of[c] if c is not None else 0
            inside = c is not None and v in focus
            vals[(v, 0)] = (s, s if inside else 0, c if inside else 0, int(inside))
        res = yield _Req("tree", None, {"op": "max", "broadcast": True, "trees": {0: self.tree},
                                        "values": {k: (x[0],) for k, x in vals.items()}})
        worst = res[(self.leader, 0)][1][0]
        heavy = None
        if focus - removed:
            res = yield _Req("tree", None, {"op": "max", "broadcast": True, "trees": {0: self.tree},
                                            "values": {k: x[1:] for k, x in vals.items()}})
            s, c, ok = res[(self.leader, 0)][1]
            if ok:
                heavy = (s, c, frozenset(groups[c]))
        return worst, heavy

    def _iterate(self, t: int):
        cfg = self.cfg
        hi_test = lambda size: size * cfg.split_hi_div * t > self.muG  # noqa: E731
        lo = Fraction(self.muG, cfg.split_lo_div * t)
        vi = self.V
        rstar = set()
        tis = []
        for i in range(cfg.iterations(t)):
            part = pr.Part.induced(self.comm, vi)
            res = yield _Req("sle", [part], {"candidates": {0: sorted(vi)}})
            root = res[min(vi)][0]
            f = yield _Req("rst", [part], {"roots": {0: root}})
            start = SplitTree(root, {v: f.parent[(v, 0)] for v in vi})
            done = yield from self._split_all(start, t, i, lo, hi_test)
            tis.append(done)
            ri = {p.root for p in done}
            rstar |= ri
            worst, heavy = yield from self._components(frozenset(rstar), vi)
            if worst * cfg.alpha_den <= cfg.alpha_num * self.muG:
                return "halt", frozenset(rstar)
            if heavy is None:
                break
            vi = heavy[2]
        return "exhausted", tis

    def _split_all(self, start: SplitTree, t: int, index: int, lo: Fraction, heavy_test):
        pending, done = [start], []
        first = True
        while pending:
            trees = {j: p.parent for j, p in enumerate(pending)}
            vals = {(v, j): (int(v in self.X),) for j, p in enumerate(pending) for v in p.parent}
            res = yield _Req("tree", None, {"op": "sum", "broadcast": True, "trees": trees, "values": vals})
            sub = {k: r[0][0] for k, r in res.items()}
            total = [res[(p.root, j)][1][0] for j, p in enumerate(pending)]
            if first:
                first = False
                if not heavy_test(total[0]):
                    done.append(start)
                    break
            kids = [p.children() for p in pending]
            # centers: smallest id satisfying the subtree rule
            cand = {}
            for j, p in enumerate(pending):
                sz = {v: sub[(v, j)] for v in p.parent}
                for v in p.parent:
                    cand[(v, j)] = (v if _is_center(v, kids[j], sz, total[j]) else self.big,)
            res = yield _Req("tree", None, {"op": "min", "broadcast": True, "trees": trees, "values": cand})
            centers = [res[(p.root, j)][1][0] for j, p in enumerate(pending)]
            # re-rooting: subtree indicator of the center, then a neighbour exchange
            flag_vals = {(v, j): (int(v == centers[j]),) for j, p in enumerate(pending) for v in p.parent}
            res = yield _Req("tree", None, {"op": "sum", "broadcast": False, "trees": trees,
                                            "values": flag_vals})
            flag = {k: r[0][0] for k, r in res.items()}
            payloads = defaultdict(dict)
            for j, p in enumerate(pending):
                for v, par in p.parent.items():
                    if v != par:
                        payloads[v][par] = (flag[(v, j)],)
            heard = yield _Req("snc", None, {"payloads": dict(payloads)})
            new_pieces = []
            for j, p in enumerate(pending):
                c = centers[j]
                if c >= self.big:
                    raise SplitError("no center found")
                newpar = {}
                for v, par in p.parent.items():
                    up = [w for w in kids[j].get(v, ()) if heard.get(v, {}).get(w) == (1,)]
                    newpar[v] = v if v == c else (up[0] if up else par)
                child_size = {y: sub[(y, j)] for y in kids[j].get(c, ())}
                if p.parent[c] != c:
                    child_size[p.parent[c]] = total[j] - sub[(c, j)]
                groups = _carve(c, child_size, int(c in self.X), lo)
                pieces = _pieces(newpar, c, groups)
                _check_split(p, pieces, self.mu, self.muG, t, self.cfg.split_lo_div)
                new_pieces.extend(pieces)
            # profile propagation from each new root
            trees = {j: p.parent for j, p in enumerate(new_pieces)}
            sizes = [self.mu(p.vertices) for p in new_pieces]
            vals = {}
            for j, p in enumerate(new_pieces):
                for v in p.parent:
                    vals[(v, j)] = (index, *p.ident, sizes[j]) if v == p.root else (0, 0, 0, 0)
            res = yield _Req("tree", None, {"op": "max", "broadcast": True, "trees": trees, "values": vals})
            pending = []
            for j, p in enumerate(new_pieces):
                if res[(p.root, j)][1][3] != sizes[j]:
                    raise SplitError("profile propagation disagrees with the local size")
                (pending if heavy_test(sizes[j]) else done).append(p)
        return done

    def _sample_cuts(self, t: int, tis: list):
        cfg = self.cfg
        items = []
        lookup = {}
        for i, trees in enumerate(tis):
            for p in trees:
                key = (i, *p.ident)
                if key in lookup:
                    continue
                lookup[key] = p
                items.append((p.root, (i, *p.ident, self.mu(p.vertices))))
        res = yield _Req("bct", [self.G], {"h": len(items), "messages": {0: items}, "forest": self.forest})
        profiles = defaultdict(list)
        for _, (i, r, c, _size) in res[self.leader][0]:
            profiles[i].append((r, c))
        sampled = []
        for i in sorted(profiles):
            for _ in range(cfg.pair_samples):
                a = self.rng.choice(profiles[i])
                b = self.rng.choice(profiles[i])
                sampled.append((self.leader, (i, *a, *b)))
        res = yield _Req("bct", [self.G], {"h": len(sampled), "messages": {0: sampled}, "forest": self.forest})
        # a vertex cut does not depend on the order of its two sides
        keys = sorted({tuple(sorted(((i, ra, ca), (i, rb, cb))))
                       for _, (i, ra, ca, rb, cb) in res[self.leader][0]})
        pairs = [(lookup[a].vertices, lookup[b].vertices) for a, b in keys]
        if not pairs:
            return frozenset()
        cuts = yield _Req("mvc", [self.G], {"h": len(pairs), "t": t, "pairs": {0: pairs},
                                            "forest": self.forest})
        z = set()
        for cut in cuts.values():
            if cut != -1:
                z |= cut
        return frozenset(z)


def _rng(seed, vertices) -> random.Random:
    return random.Random(f"{seed}:{min(vertices)}")


def _as_comm(g) -> CommGraph:
    return derive_comm_graph(g) if isinstance(g, MultiGraph) else g


def parallel_separators(g, parts: Iterable[Iterable[int]], xs=None, cfg: SepConfig | None = None,
                        seed=0, net: Network | None = None) -> list:
    """Balanced separators of several vertex-disjoint connected subgraphs at once.

    ``xs`` gives the measured set of every part (default: the whole part).
    Returns one :class:`Separator` per part, in order.
    """
    comm = _as_comm(g)
    cfg = cfg or SepConfig.paper()
    parts = [frozenset(p) for p in parts]
    xs = [frozenset(p) for p in parts] if xs is None else [frozenset(x) for x in xs]
    if len(xs) != len(parts):
        raise ValueError("one measured set per part is required")
    seen = set()
    for p in parts:
        if not p:
            raise SeparatorError("empty part")
        if seen & p:
            raise SeparatorError("parts are not vertex-disjoint")
        seen |= p
        if not p <= comm.vertices:
            raise SeparatorError("part leaves the graph")
        if not comm.is_connected(p):
            raise Disconnected(f"part starting at {min(p)} is disconnected")
    net = net or Network(comm)
    procs = [_Search(comm, p, x, cfg, _rng(seed, p)).run() for p, x in zip(parts, xs)]
    return _drive(net, procs)


def find_balanced_separator(g, x=None, cfg: SepConfig | None = None, seed=0,
                            net: Network | None = None) -> Separator:
    """(X, alpha)-balanced separator of a connected graph; X defaults to V."""
    comm = _as_comm(g)
    if not comm.vertices:
        return Separator((), 2, "cutoff", (2,))
    if not comm.is_connected():
        raise Disconnected("the graph is not connected")
    x = comm.vertices if x is None else x
    if not set(x) <= comm.vertices:
        raise SeparatorError("X must be a subset of V")
    return parallel_separators(comm, [comm.vertices], [x], cfg, seed, net)[0]
