"""Synchronous round engine with per-edge bandwidth enforcement.

Node programs see only their local view and the messages delivered to
them.  Messages are tuples of non-negative integers; their size is the
length of their Elias-gamma encoding, so every field is self-delimiting and
the accounting matches :func:`encode_message` bit for bit.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import asdict, dataclass, field
from types import MappingProxyType
from typing import Any, Callable, Iterable

from .graph import CommGraph

DEFAULT_BANDWIDTH_FACTOR = 32

_EMPTY = MappingProxyType({})


class SimulationError(RuntimeError):
    pass


class BandwidthExceeded(SimulationError):
    pass


class RoundLimitExceeded(SimulationError):
    pass


class MisaddressedMessage(SimulationError):
    pass


# ---------------------------------------------------------------------------
# codec


def field_bits(x: int) -> int:
    return 2 * (x + 1).bit_length() - 1


def message_bits(fields: Iterable[int]) -> int:
    total = 0
    for x in fields:
        total += 2 * (x + 1).bit_length() - 1
    return total


def encode_message(fields: Iterable[int]) -> tuple:
    """Pack fields into one integer bit string; returns (value, nbits)."""
    value = 0
    nbits = 0
    for x in fields:
        if x < 0:
            raise ValueError("message fields must be non-negative")
        y = x + 1
        k = y.bit_length()
        # k-1 zeros followed by the k bits of y
        value = (value << (2 * k - 1)) | y
        nbits += 2 * k - 1
    return value, nbits


def decode_message(value: int, nbits: int) -> tuple:
    out = []
    pos = nbits
    while pos > 0:
        zeros = 0
        while not (value >> (pos - 1 - zeros)) & 1:
            zeros += 1
        k = zeros + 1
        start = pos - zeros - k
        y = (value >> start) & ((1 << k) - 1)
        out.append(y - 1)
        pos = start
    return tuple(out)


def bandwidth_bits(n: int, factor: int = DEFAULT_BANDWIDTH_FACTOR) -> int:
    return factor * max(1, math.ceil(math.log2(max(n, 2))))


# ---------------------------------------------------------------------------
# programs and statistics


class LocalView:
    __slots__ = ("vid", "neighbors", "n", "bandwidth", "inp")

    def __init__(self, vid: int, neighbors: frozenset, n: int, bandwidth: int, inp: Any):
        self.vid = vid
        self.neighbors = neighbors
        self.n = n
        self.bandwidth = bandwidth
        self.inp = inp


class NodeProgram:
    """Per-vertex state machine.

    ``on_round`` receives the messages delivered in the previous round as a
    mapping sender -> fields and returns (state, outbox, halted).  A halted
    vertex is woken up again when a message reaches it.
    """

    def init(self, view: LocalView) -> Any:
        return None

    def on_round(self, state: Any, inbox: dict) -> tuple:
        return state, None, True

    def output(self, state: Any) -> Any:
        return state


@dataclass
class RunStats:
    rounds: int = 0
    max_message_bits: int = 0
    messages_sent: int = 0
    per_algorithm_rounds: dict = field(default_factory=dict)

    def absorb(self, other: "RunStats", label: str | None = None) -> None:
        """Append a run that happened after everything already recorded."""
        self.rounds += other.rounds
        self.max_message_bits = max(self.max_message_bits, other.max_message_bits)
        self.messages_sent += other.messages_sent
        if label is not None:
            self.per_algorithm_rounds[label] = self.per_algorithm_rounds.get(label, 0) + other.rounds
        else:
            for k, v in other.per_algorithm_rounds.items():
                self.per_algorithm_rounds[k] = self.per_algorithm_rounds.get(k, 0) + v

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunStats":
        return cls(**json.loads(text))


@dataclass
class ProductRunStats(RunStats):
    logical_rounds: int = 0
    overhead_factor: float = 1.0
    states: int = 0
    max_links_per_edge: int = 0


def _views(comm: CommGraph, inputs: dict | None, bandwidth: int) -> dict:
    n = comm.n
    inputs = inputs or {}
    return {v: LocalView(v, frozenset(comm.adjacency[v]), n, bandwidth, inputs.get(v))
            for v in comm.vertices}


# ---------------------------------------------------------------------------
# plain execution


def run(comm: CommGraph, program: NodeProgram, inputs: dict | None = None, max_rounds: int = 10_000,
        bandwidth_factor: int = DEFAULT_BANDWIDTH_FACTOR, bandwidth: int | None = None) -> tuple:
    """Execute ``program`` on every vertex until all halt and nothing is in flight.

    ``rounds`` is the index of the last round in which a message was sent.
    ``bandwidth`` overrides the per-message bit budget, which is needed when
    ``comm`` is a piece of a larger network.
    """
    if max_rounds <= 0:
        raise ValueError("max_rounds must be positive")
    B = bandwidth if bandwidth is not None else bandwidth_bits(comm.n, bandwidth_factor)
    views = _views(comm, inputs, B)
    adj = comm.adjacency
    states = {v: program.init(views[v]) for v in comm.vertices}
    on_round = program.on_round
    stats = RunStats()
    active = set(comm.vertices)
    inbox: dict = {}
    step = 0
    max_bits = 0
    sent = 0
    while active:
        if step > max_rounds:
            raise RoundLimitExceeded(f"not all nodes halted within {max_rounds} rounds")
        step += 1
        new_inbox: dict = {}
        nxt = set()
        for v in active:
            st, out, halted = on_round(states[v], inbox.get(v, _EMPTY))
            states[v] = st
            if not halted:
                nxt.add(v)
            if out:
                nb = adj[v]
                for w, fields in out.items():
                    if w not in nb:
                        raise MisaddressedMessage(f"{v} -> {w} is not an edge")
                    b = 0
                    for x in fields:
                        b += 2 * (x + 1).bit_length() - 1
                    if b > B:
                        raise BandwidthExceeded(f"{b}-bit message exceeds {B} bits ({v} -> {w})")
                    if b > max_bits:
                        max_bits = b
                    box = new_inbox.get(w)
                    if box is None:
                        new_inbox[w] = box = {}
                    box[v] = fields
                    nxt.add(w)
                    sent += 1
        if new_inbox:
            stats.rounds = step
        inbox = new_inbox
        active = nxt
    stats.max_message_bits = max_bits
    stats.messages_sent = sent
    outputs = {v: program.output(states[v]) for v in comm.vertices}
    return outputs, stats


# ---------------------------------------------------------------------------
# multiplexed execution


class _Instance:
    __slots__ = ("label", "program", "comm", "states", "active", "inbox", "inflight",
                 "bandwidth", "last_round", "logical", "ready", "last_send_logical")

    def __init__(self, label, program, comm, inputs, bandwidth):
        self.label = label
        self.program = program
        self.comm = comm
        self.bandwidth = bandwidth
        views = _views(comm, inputs, bandwidth)
        self.states = {v: program.init(views[v]) for v in comm.vertices}
        self.active = set(comm.vertices)
        self.inbox: dict = {}
        self.inflight = 0
        self.last_round = 0
        self.logical = 0
        self.last_send_logical = 0
        self.ready = True


def _schedule(instances: list, route: Callable, phys_bandwidth: int, tag_bits: Callable,
              max_rounds: int, stats: RunStats) -> None:
    """Drive logical instances over shared physical links.

    Each instance advances one logical round once every message of its
    previous round has been delivered.  Every directed physical link carries
    at most one frame of at most ``phys_bandwidth`` bits per round, in FIFO
    order.  ``route(src, dst)`` returns the physical link or ``None`` for a
    delivery that stays inside one physical node.
    """
    queues: dict = {}
    busy: list = []
    phys = 0
    max_bits = stats.max_message_bits
    sent = 0
    live = [inst for inst in instances if inst.active]
    while live:
        if phys > max_rounds:
            raise RoundLimitExceeded(f"multiplexed run exceeded {max_rounds} rounds")
        phys += 1
        for idx, inst in enumerate(instances):
            if not inst.ready or (not inst.active and inst.inflight == 0):
                continue
            inst.ready = False
            inst.logical += 1
            adj = inst.comm.adjacency
            on_round = inst.program.on_round
            inbox, inst.inbox = inst.inbox, {}
            nxt = set()
            for v in inst.active:
                st, out, halted = on_round(inst.states[v], inbox.get(v, _EMPTY))
                inst.states[v] = st
                if not halted:
                    nxt.add(v)
                if not out:
                    continue
                nb = adj[v]
                inst.last_send_logical = inst.logical
                for w, fields in out.items():
                    if w not in nb:
                        raise MisaddressedMessage(f"{v} -> {w} is not an edge")
                    b = message_bits(fields)
                    if b > inst.bandwidth:
                        raise BandwidthExceeded(f"{b}-bit message exceeds {inst.bandwidth} bits")
                    if b > max_bits:
                        max_bits = b
                    nxt.add(w)
                    link = route(v, w)
                    if link is None:
                        box = inst.inbox.setdefault(w, {})
                        box[v] = fields
                        continue
                    frames = max(1, -(-(b + tag_bits(idx, v, w)) // phys_bandwidth))
                    q = queues.get(link)
                    if q is None:
                        queues[link] = q = deque()
                    if not q:
                        busy.append(link)
                    q.append((idx, v, w, fields, frames))
                    inst.inflight += 1
            inst.active = nxt
        # transmission
        still = []
        transmitted = False
        for link in busy:
            q = queues[link]
            idx, v, w, fields, frames = q[0]
            transmitted = True
            sent += 1
            if frames > 1:
                q[0] = (idx, v, w, fields, frames - 1)
            else:
                q.popleft()
                inst = instances[idx]
                box = inst.inbox.get(w)
                if box is None:
                    inst.inbox[w] = box = {}
                box[v] = fields
                inst.inflight -= 1
                inst.last_round = phys
            if q:
                still.append(link)
        busy = still
        if transmitted:
            stats.rounds = phys
        for inst in instances:
            if inst.inflight == 0 and (inst.active or inst.inbox):
                inst.active |= set(inst.inbox)
                inst.ready = True
        live = [inst for inst in instances if inst.active or inst.inflight]
    stats.max_message_bits = max_bits
    stats.messages_sent += sent
    for inst in instances:
        stats.per_algorithm_rounds[inst.label] = max(stats.per_algorithm_rounds.get(inst.label, 0),
                                                     inst.last_round)


def run_multiplexed(comm: CommGraph, instances: list, max_rounds: int = 100_000,
                    bandwidth_factor: int = DEFAULT_BANDWIDTH_FACTOR, bandwidth: int | None = None) -> tuple:
    """Run independent (label, program, inputs) instances over one network.

    Returns ({label: outputs}, stats).  Messages of different instances share
    links through per-link FIFO queues; when more than one instance runs,
    every frame carries the instance index.  An instance may carry a fourth
    element, a subgraph of ``comm`` it is confined to.
    """
    if max_rounds <= 0:
        raise ValueError("max_rounds must be positive")
    B = bandwidth if bandwidth is not None else bandwidth_bits(comm.n, bandwidth_factor)
    insts = [_Instance(spec[0], spec[1], spec[3] if len(spec) > 3 else comm, spec[2], B)
             for spec in instances]
    labels = [i.label for i in insts]
    if len(set(labels)) != len(labels):
        raise ValueError("instance labels must be unique")
    multi = len(insts) > 1
    stats = RunStats()
    _schedule(insts, lambda v, w: (v, w), B,
              (lambda idx, v, w: field_bits(idx)) if multi else (lambda idx, v, w: 0),
              max_rounds, stats)
    outputs = {inst.label: {v: inst.program.output(s) for v, s in inst.states.items()}
               for inst in insts}
    return outputs, stats


def run_hosted(pg, instances: list, max_rounds: int = 100_000,
               bandwidth_factor: int = DEFAULT_BANDWIDTH_FACTOR) -> tuple:
    """Run product-graph instances on the physical network hosting ``pg``.

    Every physical vertex hosts the product vertices (v, q) for all states q.
    Product messages between two hosts are queued on the physical link and
    sent one frame per round; each frame carries the two state indices (and
    the instance index when several instances share the links).  Messages
    between product vertices on the same host cost nothing.
    """
    B_phys = bandwidth_bits(pg.host_comm.n, bandwidth_factor)
    B_prod = bandwidth_bits(pg.comm.n, bandwidth_factor)
    insts = [_Instance(spec[0], spec[1], spec[3] if len(spec) > 3 and spec[3] is not None else pg.comm,
                       spec[2], B_prod) for spec in instances]
    host = pg.host
    qidx = pg.state_index
    multi = len(insts) > 1

    def route(p, p2):
        a, b = host[p], host[p2]
        return None if a == b else (a, b)

    def tag(idx, p, p2):
        extra = field_bits(idx) if multi else 0
        return extra + field_bits(qidx[p]) + field_bits(qidx[p2])

    stats = ProductRunStats()
    _schedule(insts, route, B_phys, tag, max_rounds, stats)
    logical = max((inst.last_send_logical for inst in insts), default=0)
    stats.logical_rounds = logical
    stats.overhead_factor = stats.rounds / logical if logical else 1.0
    stats.states = len(pg.states)
    stats.max_links_per_edge = pg.max_links_per_edge
    outputs = {inst.label: {p: inst.program.output(s) for p, s in inst.states.items()} for inst in insts}
    return outputs, stats


def run_on_product(g, constraint, program: NodeProgram, inputs: dict | None = None,
                   max_rounds: int = 100_000, bandwidth_factor: int = DEFAULT_BANDWIDTH_FACTOR) -> tuple:
    """Run a program written for the product graph G_C on the network of ``g``.

    Inputs and outputs are keyed by (vertex, state); see :func:`run_hosted`.
    """
    from .walks import build_product_graph

    pg = build_product_graph(g, constraint)
    by_id = {pg.index[key]: val for key, val in (inputs or {}).items()}
    outputs, stats = run_hosted(pg, [("product", program, by_id)], max_rounds, bandwidth_factor)
    stats.per_algorithm_rounds = {}
    return {pg.pair[p]: out for p, out in outputs["product"].items()}, stats
