"""Execution context shared by the distributed algorithms.

A :class:`Network` owns the communication graph, runs node programs on it
and accumulates round statistics across the phases of a larger algorithm.
"""

from __future__ import annotations

from . import sim
from .graph import CommGraph, MultiGraph, derive_comm_graph


class Network:
    def __init__(self, comm: CommGraph | MultiGraph, bandwidth_factor: int = sim.DEFAULT_BANDWIDTH_FACTOR,
                 max_rounds: int = 1_000_000):
        if isinstance(comm, MultiGraph):
            comm = derive_comm_graph(comm)
        self.comm = comm
        self.bandwidth_factor = bandwidth_factor
        self.max_rounds = max_rounds
        self.stats = sim.RunStats()
        self.bandwidth = sim.bandwidth_bits(comm.n, bandwidth_factor)

    @property
    def n(self) -> int:
        return self.comm.n

    def restrict(self, within) -> CommGraph:
        return self.comm if within is None else self.comm.subgraph(within)

    def run(self, label: str, program: sim.NodeProgram, inputs: dict | None = None, within=None) -> dict:
        """Run one program; ``within`` confines it to a vertex subset (others stay idle)."""
        outputs, st = sim.run(self.restrict(within), program, inputs, self.max_rounds,
                              self.bandwidth_factor, self.bandwidth)
        self.stats.absorb(st, label)
        return outputs

    def run_many(self, label: str, instances: list) -> dict:
        """Run (key, program, inputs[, within]) instances concurrently; returns {key: outputs}."""
        if not instances:
            return {}
        if len(instances) == 1:
            spec = instances[0]
            return {spec[0]: self.run(label, spec[1], spec[2], spec[3] if len(spec) > 3 else None)}
        specs = [(s[0], s[1], s[2], self.restrict(s[3] if len(s) > 3 else None)) for s in instances]
        outputs, st = sim.run_multiplexed(self.comm, specs, self.max_rounds, self.bandwidth_factor,
                                          self.bandwidth)
        st.per_algorithm_rounds = {}
        self.stats.absorb(st, label)
        return outputs

    def charge(self, label: str, rounds: int, messages: int = 0, bits: int = 0) -> None:
        """Record a phase whose cost is fixed by construction (e.g. one exchange round)."""
        st = sim.RunStats(rounds=rounds, messages_sent=messages, max_message_bits=bits)
        self.stats.absorb(st, label)


class ProductNetwork(Network):
    """Network whose vertices are product nodes hosted on physical vertices."""

    def __init__(self, pg, bandwidth_factor: int = sim.DEFAULT_BANDWIDTH_FACTOR,
                 max_rounds: int = 1_000_000):
        super().__init__(pg.comm, bandwidth_factor, max_rounds)
        self.pg = pg
        self.logical_rounds = 0

    def _exec(self, instances: list) -> tuple:
        specs = [(s[0], s[1], s[2], self.restrict(s[3] if len(s) > 3 else None)) for s in instances]
        return sim.run_hosted(self.pg, specs, self.max_rounds, self.bandwidth_factor)

    def run(self, label: str, program: sim.NodeProgram, inputs: dict | None = None, within=None) -> dict:
        outputs, st = self._exec([("p", program, inputs, within)])
        self.logical_rounds += st.logical_rounds
        st.per_algorithm_rounds = {}
        self.stats.absorb(st, label)
        return outputs["p"]

    def run_many(self, label: str, instances: list) -> dict:
        if not instances:
            return {}
        outputs, st = self._exec(instances)
        self.logical_rounds += st.logical_rounds
        st.per_algorithm_rounds = {}
        self.stats.absorb(st, label)
        return outputs
