"""0/1 knapsack on a chain of two-branch edges.

Edge ``j`` sums a pass-through branch and a branch that shifts (or mixes) by
the value ``v_j`` and delays by ``2 * w_j`` time units. A unit packet at
frequency 0 entering the chain leaves as ``2^N`` packets, one per item subset,
at frequency ``x.v`` arriving at time ``2 * x.w``. The best value is the
highest frequency among packets that arrive with ``x.w <= W``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from wavenet.errors import DecodeInconsistent, EpochBudgetExceeded, InvalidInstance, WavenetError
from wavenet.ops import Branch, Delay, Identity, Mix, Shift, WaveOp, apply_chain
from wavenet.signal import Signal, TimeFreqMap, TimeGrid, detect_peaks, moving_dft

# time units per weight unit (1/c); packets of length 1 never overlap at 2
TIME_PER_WEIGHT = 2
PACKET_LEN = 1
VALUE_SUM_CAP = 4096
MODES = ("shift", "mix")


@dataclass(frozen=True)
class KpInstance:
    weights: tuple[int, ...]
    values: tuple[int, ...]
    capacity: int
    cap: int = VALUE_SUM_CAP

    def __post_init__(self) -> None:
        w, v = tuple(self.weights), tuple(self.values)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "values", v)
        if len(w) != len(v):
            raise InvalidInstance(f"{len(w)} weights but {len(v)} values")
        for name, seq in (("weights", w), ("values", v)):
            for j, x in enumerate(seq):
                if int(x) != x or x < 1:
                    raise InvalidInstance(f"{name}[{j}] = {x} must be a positive integer")
        if int(self.capacity) != self.capacity or self.capacity < 0:
            raise InvalidInstance(f"capacity {self.capacity} must be a nonnegative integer")
        if sum(v) > self.cap:
            raise InvalidInstance(f"sum of values {sum(v)} exceeds cap {self.cap}")

    @property
    def n(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class KpEpoch:
    item: int
    hit: bool
    included: bool


@dataclass
class KpSolution:
    """``arrival`` is in time units, i.e. ``TIME_PER_WEIGHT * items.weights``."""

    v_max: int
    items: tuple[int, ...]
    arrival: int
    epochs: list[KpEpoch] = field(default_factory=list)
    runs: int = 0


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def build_kp_chain(instance: KpInstance, mode: str = "shift", skip: Iterable[int] = ()) -> list[WaveOp]:
    """One two-branch edge per item; skipped items get a plain pass-through edge."""
    _check_mode(mode)
    skipped = set(skip)
    tone = Shift if mode == "shift" else Mix
    ops: list[WaveOp] = []
    for j, (w, v) in enumerate(zip(instance.weights, instance.values)):
        if j in skipped:
            ops.append(Identity())
        else:
            ops.append(Branch(((Identity(),), (tone(v), Delay(TIME_PER_WEIGHT * w)))))
    return ops


def make_grid(instance: KpInstance, sample_rate: int | None = None) -> TimeGrid:
    f_max = max(sum(instance.values), 1)
    duration = TIME_PER_WEIGHT * sum(instance.weights) + PACKET_LEN
    return TimeGrid(sample_rate or 4 * f_max, duration, 0, f_max)


def peak_threshold(mode: str, n_active: int) -> float:
    """Half the weakest packet: 1 in shift mode, ``2^-n`` after ``n`` cosine mixers."""
    _check_mode(mode)
    return 0.5 if mode == "shift" else 0.5 * 2.0 ** (-n_active)


def run_chain(
    instance: KpInstance, mode: str = "shift", skip: Iterable[int] = (), sample_rate: int | None = None
) -> TimeFreqMap:
    grid = make_grid(instance, sample_rate)
    seed = Signal.packet(grid, 0, 0, PACKET_LEN)
    halt = apply_chain(build_kp_chain(instance, mode, skip), seed)
    return moving_dft(halt, window_len=PACKET_LEN, stride=TIME_PER_WEIGHT)


def packets(tfm: TimeFreqMap, threshold: float) -> list[tuple[int, int]]:
    """Detected ``(frequency, arrival_time)`` pairs, ascending."""
    return sorted((int(p.freq), int(p.window_start)) for p in tfm.peaks(threshold))


def _readout(tfm: TimeFreqMap, capacity: int, threshold: float) -> tuple[int, int]:
    best, arrival = 0, 0
    for frame in tfm.frames:
        if frame.window_start > TIME_PER_WEIGHT * capacity:
            break
        for p in detect_peaks(frame, threshold):
            if p.freq > best:
                best, arrival = int(p.freq), int(p.window_start)
    return best, arrival


def _hits(tfm: TimeFreqMap, capacity: int, target: int, threshold: float) -> bool:
    for frame in tfm.frames:
        if frame.window_start > TIME_PER_WEIGHT * capacity:
            return False
        if abs(frame.bin(target)) >= threshold:
            return True
    return False


def max_value(
    instance: KpInstance,
    mode: str = "shift",
    threshold: float | None = None,
    sample_rate: int | None = None,
) -> tuple[int, int]:
    """``(v_max, c*t)``: the best value and its earliest arrival in weight units."""
    tfm = run_chain(instance, mode, sample_rate=sample_rate)
    thr = threshold if threshold is not None else peak_threshold(mode, instance.n)
    v, arrival = _readout(tfm, instance.capacity, thr)
    return v, arrival // TIME_PER_WEIGHT


def decode_items(
    instance: KpInstance,
    v_max: int,
    mode: str = "shift",
    threshold: float | None = None,
    sample_rate: int | None = None,
) -> KpSolution:
    """Skip items one at a time; an item whose absence kills the ``v_max`` hit is taken."""
    excluded: set[int] = set()
    sol = KpSolution(v_max=v_max, items=(), arrival=0)
    for j in range(instance.n):
        skip = excluded | {j}
        try:
            tfm = run_chain(instance, mode, skip, sample_rate)
        except WavenetError as exc:
            exc.epoch = j + 1
            raise
        sol.runs += 1
        thr = threshold if threshold is not None else peak_threshold(mode, instance.n - len(skip))
        hit = _hits(tfm, instance.capacity, v_max, thr)
        if hit:
            excluded.add(j)
        sol.epochs.append(KpEpoch(item=j, hit=hit, included=not hit))
    items = tuple(0 if j in excluded else 1 for j in range(instance.n))
    value = sum(x * v for x, v in zip(items, instance.values))
    weight = sum(x * w for x, w in zip(items, instance.weights))
    if weight > instance.capacity or value != v_max:
        raise DecodeInconsistent(
            f"decoded items {items} have value {value} / weight {weight}, "
            f"expected value {v_max} within capacity {instance.capacity}"
        )
    sol.items = items
    sol.arrival = TIME_PER_WEIGHT * weight
    return sol


@dataclass
class KpRun:
    solution: KpSolution
    timefreq: TimeFreqMap
    threshold: float
    ct: int


def solve(
    instance: KpInstance,
    mode: str = "shift",
    threshold: float | None = None,
    sample_rate: int | None = None,
) -> KpRun:
    tfm = run_chain(instance, mode, sample_rate=sample_rate)
    thr = threshold if threshold is not None else peak_threshold(mode, instance.n)
    v_max, arrival = _readout(tfm, instance.capacity, thr)
    sol = decode_items(instance, v_max, mode, threshold, sample_rate)
    sol.runs += 1
    if sol.runs > instance.n + 1:
        raise EpochBudgetExceeded(f"KP used {sol.runs} runs, budget {instance.n + 1}")
    return KpRun(solution=sol, timefreq=tfm, threshold=thr, ct=arrival // TIME_PER_WEIGHT)
