"""Travelling salesman on a complete graph of frequency-shifting nodes.

City ``j`` shifts every passing packet by ``omega_j``; edge ``(j, k)`` delays it
by ``L_jk``. City 0 emits one unit packet at ``omega_0`` and then only
listens. A packet that returns along a Hamiltonian cycle carries exactly
``Omega_0 = sum(omega)``; the frequency plan makes every other closed walk
miss that stamp, so the first ``Omega_0`` arrival time is the optimal tour
length. The tour itself is recovered by deleting edges longest-first and
keeping those whose removal delays the ``Omega_0`` arrival.

Intermediate nodes also low-pass at ``Omega_0``: stamps only grow, so
anything above ``Omega_0`` can never come back down to it, and cutting it
keeps the sampled simulation free of aliasing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from wavenet import engine
from wavenet.engine import Edge, Network, Node, Role
from wavenet.errors import (
    DecodeInconsistent,
    EpochBudgetExceeded,
    InvalidFrequencyPlan,
    InvalidInstance,
    NoHamiltonianFound,
    WavenetError,
)
from wavenet.ops import Filter, Shift
from wavenet.signal import TimeFreqMap, TimeGrid, exp_tone, moving_dft

PACKET_LEN = 1
PLAN_KINDS = ("offset_binary", "powers")
SOLVER_PLAN = "offset_binary"
# sample rate is 4 * Omega_0 samples per time unit; past this the engine is hopeless
OMEGA_SUM_CAP = 1 << 16


@dataclass(frozen=True)
class TspInstance:
    dist: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        d = tuple(tuple(row) for row in self.dist)
        object.__setattr__(self, "dist", d)
        n = len(d)
        if n < 3:
            raise InvalidInstance(f"need N >= 3 cities, got {n}")
        for j, row in enumerate(d):
            if len(row) != n:
                raise InvalidInstance(f"dist row {j} has {len(row)} entries, expected {n}")
        for j in range(n):
            if d[j][j] != 0:
                raise InvalidInstance(f"nonzero diagonal dist[{j}][{j}]")
            for k in range(n):
                x = d[j][k]
                if int(x) != x:
                    raise InvalidInstance(f"non-integer dist[{j}][{k}]")
                if j != k and x < 1:
                    raise InvalidInstance(f"dist[{j}][{k}] = {x} must be >= 1")
                if d[k][j] != x:
                    raise InvalidInstance(f"asymmetric dist[{j}][{k}]")

    @property
    def n(self) -> int:
        return len(self.dist)

    def pairs(self) -> list[tuple[int, int]]:
        return list(combinations(range(self.n), 2))

    def min_edge(self) -> int:
        return min(self.dist[j][k] for j, k in self.pairs())


# ---------------------------------------------------------------------------
# frequency plans


@dataclass(frozen=True)
class FrequencyPlan:
    omegas: tuple[int, ...]
    omega_sum: int
    revisit_bound: int
    kind: str = "offset_binary"

    def __post_init__(self) -> None:
        if self.omega_sum != sum(self.omegas):
            raise InvalidFrequencyPlan("omega_sum must equal sum(omegas)")
        if any(w <= 0 for w in self.omegas):
            raise InvalidFrequencyPlan("frequencies must be positive")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "omegas": list(self.omegas),
            "omega_sum": self.omega_sum,
            "revisit_bound": self.revisit_bound,
        }


def stamp_representations(omegas: Sequence[int], target: int, max_mult: int | None = None) -> int:
    """Number of multiplicity vectors ``m`` (entries ``<= max_mult``) with ``m.omegas == target``.

    Counts saturate at 2, which is all the uniqueness check needs.
    """
    count = np.zeros(target + 1, dtype=np.uint8)
    count[0] = 1
    for w in omegas:
        top = target // w if max_mult is None else min(max_mult, target // w)
        acc = count.copy()
        for m in range(1, top + 1):
            acc[m * w:] += count[: target + 1 - m * w]
            np.minimum(acc, 2, out=acc)
        count = acc
    return int(count[target])


def validate_plan(omegas: Sequence[int], max_mult: int | None = None) -> None:
    """Raise unless "every frequency exactly once" is the only way to reach the sum."""
    target = sum(omegas)
    if stamp_representations(omegas, target, max_mult) != 1:
        raise InvalidFrequencyPlan(
            f"plan {list(omegas)} reaches its sum {target} with another multiplicity vector"
        )


def _offset_binary_base(n: int) -> int:
    # a multiset of size != n can't land on n*A + 2^n - 1 once A exceeds both bounds
    return max((n - 3) * 2 ** (n - 1) + 2, 2**n - n - 1, 1)


def allocate_frequencies(
    n: int, revisit_bound: int, kind: str = "powers", validate: bool = True
) -> FrequencyPlan:
    """Frequency plan for ``n`` cities.

    ``powers`` (default): ``omega_j = (M+1)^j``, unique as long as no city is
    visited more than ``M`` times. Its sum grows like ``M^(n-1)``, which
    makes it impractical past a handful of cities.

    ``offset_binary`` (what :func:`solve` uses): ``omega_j = A + 2^j``. A multiset of ``k``
    stamps sums to ``k*A`` plus at most ``k * 2^(n-1)``, so only ``k == n``
    can hit the target, and then the binary part forces each bit once. This
    holds for any multiplicities, so the plan does not grow with the
    revisit bound.
    """
    if n < 3 or revisit_bound < 1:
        raise InvalidFrequencyPlan("need n >= 3 and revisit bound >= 1")
    if kind == "offset_binary":
        a = _offset_binary_base(n)
        omegas = tuple(a + 2**j for j in range(n))
        max_mult = None
    elif kind == "powers":
        omegas = tuple((revisit_bound + 1) ** j for j in range(n))
        max_mult = revisit_bound
    else:
        raise InvalidFrequencyPlan(f"unknown plan kind {kind!r}")
    if validate:
        validate_plan(omegas, max_mult)
    return FrequencyPlan(omegas, sum(omegas), revisit_bound, kind)


def random_plan(n: int, revisit_bound: int, rng: np.random.Generator, attempts: int = 100) -> FrequencyPlan:
    """Randomized offset-binary plan: shuffled bits on a random base in ``[A, 2A]``."""
    a_min = _offset_binary_base(n)
    for _ in range(attempts):
        a = int(rng.integers(a_min, 2 * a_min + 1))
        bits = rng.permutation(n)
        omegas = tuple(a + 2 ** int(b) for b in bits)
        try:
            validate_plan(omegas)
        except InvalidFrequencyPlan:
            continue
        return FrequencyPlan(omegas, sum(omegas), revisit_bound, "random")
    raise InvalidFrequencyPlan("no valid random plan found")


# ---------------------------------------------------------------------------
# greedy bound


def nn_tour(instance: TspInstance) -> tuple[int, tuple[int, ...]]:
    """Nearest-neighbour tour from city 0, ties to the lowest index."""
    d = instance.dist
    tour, seen = [0], {0}
    while len(tour) < instance.n:
        cur = tour[-1]
        nxt = min((k for k in range(instance.n) if k not in seen), key=lambda k: (d[cur][k], k))
        tour.append(nxt)
        seen.add(nxt)
    tour.append(0)
    return sum(d[a][b] for a, b in zip(tour, tour[1:])), tuple(tour)


def nn_upper_bound(instance: TspInstance) -> int:
    return nn_tour(instance)[0]


def revisit_bound(instance: TspInstance, horizon: int | None = None) -> int:
    h = nn_upper_bound(instance) if horizon is None else horizon
    return math.ceil(h / instance.min_edge())


# ---------------------------------------------------------------------------
# wave runs


def build_network(instance: TspInstance, plan: FrequencyPlan, removed: Iterable[tuple[int, int]] = ()) -> Network:
    nodes = [Node(0, Role.SEED_THEN_HALT)]
    for j in range(1, instance.n):
        ops = (Shift(plan.omegas[j]), Filter("lowpass", 0, plan.omega_sum))
        nodes.append(Node(j, Role.INTERMEDIATE, ops))
    drop = {frozenset(p) for p in removed}
    edges = []
    for j, k in instance.pairs():
        if frozenset((j, k)) in drop:
            continue
        L = instance.dist[j][k]
        edges.append(Edge(j, k, L))
        edges.append(Edge(k, j, L))
    return Network(tuple(nodes), tuple(edges))


def peak_threshold(n: int) -> float:
    """Half the amplitude of one Hamiltonian return: ``N`` in-degree averages of ``1/(N-1)``."""
    return 0.5 * float(n - 1) ** (-n)


def _smooth_at_least(x: int) -> int:
    """Smallest ``2^a 3^b 5^c >= x``; FFT lengths with big prime factors are slow."""
    best = None
    p5 = 1
    while p5 < 2 * x:
        p35 = p5
        while p35 < 2 * x:
            p = p35
            while p < x:
                p *= 2
            best = p if best is None else min(best, p)
            p35 *= 3
        p5 *= 5
    return best


def default_sample_rate(plan: FrequencyPlan) -> int:
    """Nyquist margin of ``4 * Omega_0``, rounded up to an FFT-friendly length."""
    return _smooth_at_least(4 * plan.omega_sum)


@dataclass
class TspScan:
    """One engine run: hit times of the ``Omega_0`` stamp and the halt time-frequency map."""

    hits: list[int]
    timefreq: TimeFreqMap | None
    steps: int


def scan(
    instance: TspInstance,
    plan: FrequencyPlan,
    horizon: int,
    *,
    removed: Iterable[tuple[int, int]] = (),
    stop_at_first: bool = True,
    threshold: float | None = None,
    sample_rate: int | None = None,
    keep_timefreq: bool = False,
) -> TspScan:
    """Run the FIFO engine for frames ``0..horizon`` and report every ``Omega_0`` frame."""
    net = build_network(instance, plan, removed)
    sr = sample_rate or default_sample_rate(plan)
    thr = threshold if threshold is not None else peak_threshold(instance.n)
    state = engine.init(net, plan.omegas[0], PACKET_LEN, sr, f_max=plan.omega_sum)
    probe = np.conj(exp_tone(TimeGrid(sr, 1, 0), plan.omega_sum)) / sr
    hits: list[int] = []

    def stop(block: np.ndarray, t: int) -> bool:
        if abs(np.dot(block, probe)) >= thr:
            hits.append(t)
            return stop_at_first
        return False

    trace = engine.run_until(state, horizon + 1, stop)
    tfm = moving_dft(trace, 1, 1) if keep_timefreq else None
    return TspScan(hits=hits, timefreq=tfm, steps=state.t)


def omega_frames(tfm: TimeFreqMap, omega_sum: int, threshold: float) -> list[int]:
    """Frame starts whose spectrum holds the sum-frequency line."""
    return [int(fr.window_start) for fr in tfm.frames if abs(fr.bin(omega_sum)) >= threshold]


def shortest_cycle_length(
    instance: TspInstance,
    plan: FrequencyPlan | None = None,
    *,
    horizon: int | None = None,
    threshold: float | None = None,
    sample_rate: int | None = None,
) -> tuple[int, int]:
    """``(d_opt, t_0)``: first sum-frequency return; equal because the wave speed is 1."""
    h = nn_upper_bound(instance) if horizon is None else horizon
    if plan is None:
        plan = allocate_frequencies(instance.n, revisit_bound(instance, h), SOLVER_PLAN)
    res = scan(instance, plan, h, threshold=threshold, sample_rate=sample_rate, keep_timefreq=True)
    frames = omega_frames(res.timefreq, plan.omega_sum, threshold or peak_threshold(instance.n))
    if not frames:
        raise NoHamiltonianFound(f"no sum-frequency return by t = {h}")
    return frames[0], frames[0]


# ---------------------------------------------------------------------------
# decoding


@dataclass(frozen=True)
class TspEpoch:
    edge: tuple[int, int]
    length: int
    hit: bool | None
    removed: bool


@dataclass
class TspSolution:
    d_opt: int
    cycle: tuple[int, ...]
    epochs: list[TspEpoch] = field(default_factory=list)
    runs: int = 0


def _cycle_from_edges(n: int, edges: Iterable[tuple[int, int]]) -> tuple[int, ...]:
    adj: dict[int, list[int]] = {j: [] for j in range(n)}
    for j, k in edges:
        adj[j].append(k)
        adj[k].append(j)
    if any(len(v) != 2 for v in adj.values()):
        raise DecodeInconsistent("remaining edges are not 2-regular")
    cycle, prev, cur = [0], None, 0
    nxt = min(adj[0])
    while True:
        prev, cur = cur, nxt
        if cur == 0:
            break
        cycle.append(cur)
        a, b = adj[cur]
        nxt = b if a == prev else a
        if len(cycle) > n:
            break
    cycle.append(0)
    if len(cycle) != n + 1 or len(set(cycle[:-1])) != n:
        raise DecodeInconsistent("remaining edges do not form one Hamiltonian cycle")
    return tuple(cycle)


def decode_cycle(
    instance: TspInstance,
    d_opt: int,
    plan: FrequencyPlan,
    *,
    threshold: float | None = None,
    sample_rate: int | None = None,
) -> TspSolution:
    """Edge-removal epochs, longest edge first.

    An edge whose removal still lets the sum-frequency arrive by ``t_0`` is
    dropped for good; otherwise it is restored as a tour edge. Edges at a
    city already down to two neighbours are kept without a run, and the loop
    stops once ``N`` edges remain.
    """
    n = instance.n
    d = instance.dist
    order = sorted(instance.pairs(), key=lambda p: (-d[p[0]][p[1]], p))
    alive = set(order)
    degree = {j: n - 1 for j in range(n)}
    removed: list[tuple[int, int]] = []
    sol = TspSolution(d_opt=d_opt, cycle=())
    for j, k in order:
        if len(alive) == n:
            break
        if degree[j] <= 2 or degree[k] <= 2:
            sol.epochs.append(TspEpoch((j, k), d[j][k], None, False))
            continue
        try:
            res = scan(
                instance, plan, d_opt, removed=removed + [(j, k)],
                threshold=threshold, sample_rate=sample_rate,
            )
        except WavenetError as exc:
            exc.epoch = len(sol.epochs) + 1
            raise
        sol.runs += 1
        hit = bool(res.hits) and res.hits[0] <= d_opt
        if hit:
            removed.append((j, k))
            alive.discard((j, k))
            degree[j] -= 1
            degree[k] -= 1
        sol.epochs.append(TspEpoch((j, k), d[j][k], hit, hit))
    cycle = _cycle_from_edges(n, alive)
    length = sum(d[a][b] for a, b in zip(cycle, cycle[1:]))
    if length != d_opt:
        raise DecodeInconsistent(f"decoded cycle has length {length}, expected {d_opt}")
    sol.cycle = cycle
    return sol


def perturbed(instance: TspInstance) -> tuple[TspInstance, int]:
    """Tie-break lengths ``L' = L*K + rank(j,k)`` with ``K = N * #pairs``.

    ``K`` exceeds any sum of ``N`` ranks, so distinct tour lengths keep
    their order and ``L = L' // K`` recovers the original length.
    """
    pairs = instance.pairs()
    scale = instance.n * len(pairs)
    d = [list(r) for r in instance.dist]
    for rank, (j, k) in enumerate(pairs):
        d[j][k] = d[k][j] = instance.dist[j][k] * scale + rank
    return TspInstance(tuple(tuple(r) for r in d)), scale


@dataclass
class TspRun:
    solution: TspSolution
    plan: FrequencyPlan
    horizon: int
    t_0: int
    timefreq: TimeFreqMap
    threshold: float
    cross_check: list[dict] = field(default_factory=list)
    perturbed: bool = False


def solve(
    instance: TspInstance,
    *,
    plan_kind: str = SOLVER_PLAN,
    cross_check: bool = False,
    seed: int = 0,
    threshold: float | None = None,
    sample_rate: int | None = None,
    force_perturb: bool = False,
) -> TspRun:
    h = nn_upper_bound(instance)
    plan = allocate_frequencies(instance.n, revisit_bound(instance, h), plan_kind)
    if plan.omega_sum > OMEGA_SUM_CAP:
        raise InvalidFrequencyPlan(f"sum frequency {plan.omega_sum} exceeds cap {OMEGA_SUM_CAP}")
    thr = threshold if threshold is not None else peak_threshold(instance.n)
    first = scan(instance, plan, h, threshold=threshold, sample_rate=sample_rate, keep_timefreq=True)
    frames = omega_frames(first.timefreq, plan.omega_sum, thr)
    if not frames:
        raise NoHamiltonianFound(f"no sum-frequency return by t = {h}")
    t_0 = frames[0]

    checks = []
    if cross_check:
        rng = np.random.default_rng(seed)
        for _ in range(2):
            alt = random_plan(instance.n, plan.revisit_bound, rng)
            res = scan(instance, alt, h, threshold=threshold)
            t_alt = res.hits[0] if res.hits else None
            checks.append({"plan": alt.to_dict(), "t_0": t_alt, "agrees": t_alt == t_0})
            if t_alt != t_0:
                raise InvalidFrequencyPlan(f"cross-check plan disagrees: {t_alt} vs {t_0}")

    was_perturbed = False
    try:
        if force_perturb:
            raise DecodeInconsistent("perturbation forced")
        sol = decode_cycle(instance, t_0, plan, threshold=threshold, sample_rate=sample_rate)
    except DecodeInconsistent:
        was_perturbed = True
        sol = _decode_perturbed(instance, t_0, threshold)
    sol.runs += 1
    budget = instance.n * (instance.n - 1) // 2 + 1
    if not was_perturbed and sol.runs > budget:
        raise EpochBudgetExceeded(f"TSP used {sol.runs} runs, budget {budget}")
    return TspRun(
        solution=sol, plan=plan, horizon=h, t_0=t_0, timefreq=first.timefreq,
        threshold=thr, cross_check=checks, perturbed=was_perturbed,
    )


def _decode_perturbed(instance: TspInstance, d_opt: int, threshold: float | None) -> TspSolution:
    pinst, scale = perturbed(instance)
    h = nn_upper_bound(pinst)
    pplan = allocate_frequencies(pinst.n, revisit_bound(pinst, h), SOLVER_PLAN)
    res = scan(pinst, pplan, h, threshold=threshold)
    if not res.hits:
        raise NoHamiltonianFound("perturbed instance has no sum-frequency return")
    psol = decode_cycle(pinst, res.hits[0], pplan, threshold=threshold)
    length = sum(instance.dist[a][b] for a, b in zip(psol.cycle, psol.cycle[1:]))
    if length != d_opt or res.hits[0] // scale != d_opt:
        raise DecodeInconsistent(f"perturbed decode gave length {length}, expected {d_opt}")
    return TspSolution(d_opt=d_opt, cycle=psol.cycle, epochs=psol.epochs, runs=psol.runs + 1)
