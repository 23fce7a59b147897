"""Directed wave networks and the discrete-time FIFO propagation engine.

Every directed edge of integer length ``n`` is a pipeline of ``n + 1`` cells;
one engine step advances time by one length unit. A cell holds one
``sample_rate``-long block of samples, so packets keep enough resolution for
per-window DFTs. At time ``t`` the engine

1. pops the last cell of every pipeline (the block written at ``t - n``),
2. forms each node's input as the in-degree average (or plain sum) of its pops,
3. records the input of every halt node,
4. pushes each node's processed output into cell 0 of its outgoing pipelines.

The seed emits ``exp(2j*pi*seed_freq*t)`` for ``t < packet_len`` and is
otherwise silent. A ``seed_then_halt`` node records and absorbs what comes
back; it never re-emits.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

from wavenet.errors import InvalidNetwork, NotAChain
from wavenet.ops import (
    Branch,
    Delay,
    Identity,
    WaveOp,
    apply_chain,
    chain_to_text,
    is_memoryless,
    parse_chain,
)
from wavenet.signal import Signal, TimeGrid, exp_tone


class Role(str, enum.Enum):
    SEED = "seed"
    INTERMEDIATE = "intermediate"
    HALT = "halt"
    SEED_THEN_HALT = "seed_then_halt"

    @property
    def emits(self) -> bool:
        return self in (Role.SEED, Role.SEED_THEN_HALT)

    @property
    def halts(self) -> bool:
        return self in (Role.HALT, Role.SEED_THEN_HALT)


@dataclass(frozen=True)
class Node:
    id: int
    role: Role
    ops: tuple[WaveOp, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "role", Role(self.role))
        object.__setattr__(self, "ops", tuple(self.ops))


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    length: int
    ops: tuple[WaveOp, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "ops", tuple(self.ops))
        if int(self.length) != self.length or self.length < 0:
            raise InvalidNetwork(f"edge {self.src}->{self.dst}: length must be a nonnegative integer")


NORMS = ("indegree", "sum")


@dataclass(frozen=True)
class Network:
    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    input_norm: str = "indegree"

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))
        if self.input_norm not in NORMS:
            raise InvalidNetwork(f"input_norm must be one of {NORMS}")
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise InvalidNetwork("duplicate node ids")
        known = set(ids)
        roles = {n.id: n.role for n in self.nodes}
        for e in self.edges:
            if e.src not in known or e.dst not in known:
                raise InvalidNetwork(f"edge {e.src}->{e.dst} references an unknown node")
            if e.src == e.dst:
                raise InvalidNetwork(f"self-loop at node {e.src}")
            if roles[e.src] == Role.HALT:
                raise InvalidNetwork(f"halt node {e.src} has an outgoing edge")
            if roles[e.dst] == Role.SEED:
                raise InvalidNetwork(f"seed node {e.dst} has an incoming edge")
        seeds = [n for n in self.nodes if n.role.emits]
        if len(seeds) != 1:
            raise InvalidNetwork(f"exactly one seed required, found {len(seeds)}")
        if not any(n.role.halts for n in self.nodes):
            raise InvalidNetwork("no halt node")

    @property
    def seed(self) -> Node:
        return next(n for n in self.nodes if n.role.emits)

    @property
    def halt(self) -> Node:
        """The recorded halt node (lowest id among halting roles)."""
        return min((n for n in self.nodes if n.role.halts), key=lambda n: n.id)

    def node(self, node_id: int) -> Node:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    @cached_property
    def _indegrees(self) -> dict[int, int]:
        deg = {n.id: 0 for n in self.nodes}
        for e in self.edges:
            deg[e.dst] += 1
        return deg

    def indegree(self, node_id: int) -> int:
        return self._indegrees[node_id]

    def without_edges(self, pairs: Iterable[tuple[int, int]]) -> Network:
        """Copy with every edge between each unordered pair removed (both directions)."""
        drop = {frozenset(p) for p in pairs}
        kept = tuple(e for e in self.edges if frozenset((e.src, e.dst)) not in drop)
        return Network(self.nodes, kept, self.input_norm)

    def to_text(self) -> str:
        lines = [f"norm {self.input_norm}"]
        for n in self.nodes:
            lines.append(f"node {n.id} {n.role.value} {chain_to_text(n.ops)}")
        for e in self.edges:
            lines.append(f"edge {e.src} {e.dst} {e.length} {chain_to_text(e.ops)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> Network:
        nodes, edges, norm = [], [], "indegree"
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            kind = line.split(None, 1)[0]
            try:
                if kind == "norm":
                    norm = line.split()[1]
                elif kind == "node":
                    _, nid, role, *rest = line.split(None, 3)
                    nodes.append(Node(int(nid), Role(role), _ops(rest)))
                elif kind == "edge":
                    _, src, dst, length, *rest = line.split(None, 4)
                    edges.append(Edge(int(src), int(dst), int(length), _ops(rest)))
                else:
                    raise InvalidNetwork(f"unknown record {kind!r}")
            except (ValueError, InvalidNetwork) as exc:
                raise InvalidNetwork(f"line {lineno}: {exc}") from None
        return cls(tuple(nodes), tuple(edges), norm)


def _ops(rest: list[str]) -> tuple[WaveOp, ...]:
    if not rest:
        return ()
    ops = parse_chain(rest[0])
    return tuple(o for o in ops if not isinstance(o, Identity))


@dataclass(eq=False)
class Pipeline:
    """Ring buffer of ``n + 1`` blocks standing for the cells ``l = 0..n`` of one edge."""

    edge: Edge
    buf: np.ndarray

    @property
    def n(self) -> int:
        return self.edge.length

    def cells(self, t: int) -> np.ndarray:
        """Cells ``P(0..n)`` as they stand after the step at time ``t``."""
        rows = [(t - l) % (self.n + 1) for l in range(self.n + 1)]
        return self.buf[rows]


@dataclass(eq=False)
class EngineState:
    network: Network
    sample_rate: int
    seed_freq: float
    packet_len: int
    f_max: float = 0
    t: int = 0
    pipelines: list[Pipeline] = field(default_factory=list)
    halt_trace: list[np.ndarray] = field(default_factory=list)
    track_peak: bool = False
    peak_cell: float = 0.0

    def trace_signal(self) -> Signal:
        grid = TimeGrid(self.sample_rate, self.t, 0)
        if self.halt_trace:
            data = np.concatenate(self.halt_trace)
        else:
            data = np.zeros(0, dtype=np.complex128)
        return Signal(grid, data)

    def total_cells(self) -> int:
        return sum(p.n + 1 for p in self.pipelines)


def init(
    network: Network,
    seed_freq: float,
    packet_len: int = 1,
    sample_rate: int = 1,
    f_max: float = 0,
) -> EngineState:
    """Zero every pipeline and arm the seed emission for ``packet_len`` time units."""
    if packet_len < 1 or int(packet_len) != packet_len:
        raise InvalidNetwork("packet_len must be a positive integer number of time units")
    # validates sample_rate against f_max
    TimeGrid(sample_rate, 1, 0, f_max)
    pipes = []
    for e in network.edges:
        if e.length < 1:
            raise InvalidNetwork(f"edge {e.src}->{e.dst} has length 0; FIFO edges need length >= 1")
        if not all(is_memoryless(o) for o in e.ops):
            raise InvalidNetwork(f"edge {e.src}->{e.dst}: delays belong in the edge length")
        pipes.append(Pipeline(e, np.zeros((e.length + 1, sample_rate), dtype=np.complex128)))
    for n in network.nodes:
        if not all(is_memoryless(o) for o in n.ops):
            raise InvalidNetwork(f"node {n.id}: node operators cannot delay")
    return EngineState(
        network=network,
        sample_rate=sample_rate,
        seed_freq=seed_freq,
        packet_len=int(packet_len),
        f_max=f_max,
        pipelines=pipes,
    )


def step(state: EngineState) -> EngineState:
    net = state.network
    t, S = state.t, state.sample_rate
    grid = TimeGrid(S, 1, t)

    inputs: dict[int, np.ndarray] = {}
    for p in state.pipelines:
        popped = p.buf[(t + 1) % (p.n + 1)]
        acc = inputs.get(p.edge.dst)
        inputs[p.edge.dst] = popped.copy() if acc is None else acc + popped
    if net.input_norm == "indegree":
        for k, x in inputs.items():
            x /= net.indegree(k)

    halt_id = net.halt.id
    x_halt = inputs.get(halt_id)
    state.halt_trace.append(x_halt if x_halt is not None else np.zeros(S, dtype=np.complex128))

    outputs: dict[int, np.ndarray] = {}
    for node in net.nodes:
        if node.role.emits:
            if t < state.packet_len:
                emission = Signal(grid, exp_tone(grid, state.seed_freq))
                outputs[node.id] = apply_chain(node.ops, emission).samples
        elif node.role == Role.INTERMEDIATE:
            x = inputs.get(node.id)
            if x is not None and np.any(x):
                outputs[node.id] = apply_chain(node.ops, Signal(grid, x)).samples

    row = t
    for p in state.pipelines:
        r = row % (p.n + 1)
        out = outputs.get(p.edge.src)
        if out is None:
            p.buf[r] = 0
        elif p.edge.ops:
            p.buf[r] = apply_chain(p.edge.ops, Signal(grid, out)).samples
        else:
            p.buf[r] = out
        if state.track_peak and out is not None:
            state.peak_cell = max(state.peak_cell, float(np.max(np.abs(p.buf[r]))))
    state.t = t + 1
    return state


def run_until(
    state: EngineState,
    t_max: int,
    stop: Callable[[np.ndarray, int], bool] | None = None,
) -> Signal:
    """Step until ``state.t == t_max`` (or ``stop(block, t)`` fires on a halt block)."""
    if t_max < 0:
        raise ValueError("t_max must be nonnegative")
    while state.t < t_max:
        step(state)
        if stop is not None and stop(state.halt_trace[-1], state.t - 1):
            break
    return state.trace_signal()


# ---------------------------------------------------------------------------
# closed-form path for 1D chains


def chain_evaluate(ops: Sequence[WaveOp], seed: Signal) -> Signal:
    """Evaluate a linear operator chain on the seed signal in one pass."""
    return apply_chain(ops, seed)


def network_to_chain(network: Network) -> list[WaveOp]:
    """Flatten a seed-to-halt path network into an operator chain.

    Parallel edges between consecutive nodes become a :class:`Branch`; edge
    lengths become delays and node normalization becomes branch gains, so the
    chain reproduces the FIFO halt trace sample for sample.
    """
    net = network
    out_edges: dict[int, list[Edge]] = {}
    for e in net.edges:
        out_edges.setdefault(e.src, []).append(e)
    ops: list[WaveOp] = list(net.seed.ops)
    visited = {net.seed.id}
    cur = net.seed.id
    while True:
        outs = out_edges.get(cur, [])
        if not outs:
            break
        targets = {e.dst for e in outs}
        if len(targets) != 1:
            raise NotAChain(f"node {cur} fans out to {sorted(targets)}")
        nxt = targets.pop()
        if nxt in visited:
            raise NotAChain(f"cycle through node {nxt}")
        if net.indegree(nxt) != len(outs):
            raise NotAChain(f"node {nxt} has inputs from outside the chain")
        chains = [tuple(e.ops) + (Delay(e.length),) for e in outs]
        gain = 1.0 / len(outs) if net.input_norm == "indegree" else 1.0
        if len(chains) == 1:
            ops.extend(chains[0])
        else:
            ops.append(Branch(tuple(chains), tuple([gain] * len(chains))))
        node = net.node(nxt)
        visited.add(nxt)
        cur = nxt
        if node.role.halts:
            break
        ops.extend(node.ops)
    if cur != net.halt.id:
        raise NotAChain("path from the seed does not end at the halt node")
    if len(visited) != len(net.nodes):
        raise NotAChain("nodes off the seed-to-halt path")
    return ops
