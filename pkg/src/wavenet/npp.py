"""Number partitioning on a 1D chain of frequency mixers.

The seed emits ``cos(2*pi*w_0*t)`` and node ``j`` multiplies by
``cos(2*pi*w_j*t)``. The halt node therefore sees ``prod_j cos(2*pi*w_j*t)``,
whose spectrum has a line at ``|s.w|`` for every sign vector ``s``. The
lowest nonnegative line is the minimum discrepancy; the partition itself is
recovered by merging nodes into the seed one epoch at a time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from wavenet.errors import DecodeInconsistent, EpochBudgetExceeded, InvalidInstance, WavenetError
from wavenet.ops import Mix, apply_chain
from wavenet.signal import Signal, Spectrum, TimeFreqMap, TimeGrid, detect_peaks, dft, lowest_nonneg_peak

WINDOW = 4
WEIGHT_SUM_CAP = 4096


@dataclass(frozen=True)
class NppInstance:
    weights: tuple[int, ...]
    cap: int = WEIGHT_SUM_CAP

    def __post_init__(self) -> None:
        w = tuple(self.weights)
        object.__setattr__(self, "weights", w)
        if len(w) < 2:
            raise InvalidInstance(f"need N >= 2 weights, got {len(w)}")
        for j, x in enumerate(w):
            if int(x) != x or x < 1:
                raise InvalidInstance(f"weights[{j}] = {x} violates w_j >= 1 (positive integer)")
        if sum(w) > self.cap:
            raise InvalidInstance(f"sum of weights {sum(w)} exceeds cap {self.cap}")

    @property
    def n(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class NppEpoch:
    node: int
    merged_weight: int
    peak_present: bool
    sign: int


@dataclass
class NppSolution:
    d_min: int
    signs: tuple[int, ...]
    epochs: list[NppEpoch] = field(default_factory=list)
    runs: int = 0

    def subsets(self, weights: Sequence[int]) -> tuple[list[int], list[int]]:
        a = [w for w, s in zip(weights, self.signs) if s > 0]
        b = [w for w, s in zip(weights, self.signs) if s < 0]
        return a, b


def build_chain(instance: NppInstance) -> tuple[int, list[Mix]]:
    """Seed tone frequency and the mixer chain for nodes ``1..N-1``."""
    return instance.weights[0], [Mix(w) for w in instance.weights[1:]]


def make_grid(instance: NppInstance, sample_rate: int | None = None) -> TimeGrid:
    f_max = sum(instance.weights)
    return TimeGrid(sample_rate or 4 * f_max, WINDOW, 0, f_max)


def peak_threshold(n_tones: int, seed_amplitude: float = 1.0) -> float:
    """Half the smallest line a product of ``n_tones`` unit cosines can carry."""
    return 0.5 * seed_amplitude * 2.0 ** (-n_tones)


def chain_spectrum(seed_freq: int, mixers: Sequence[Mix], grid: TimeGrid) -> Spectrum:
    # cos(0) == 1, so a fully cancelled merged seed is the DC constant
    seed = Signal.cosine(grid, abs(seed_freq))
    return dft(apply_chain(mixers, seed))


def spectrum(instance: NppInstance, sample_rate: int | None = None) -> Spectrum:
    seed, mixers = build_chain(instance)
    return chain_spectrum(seed, mixers, make_grid(instance, sample_rate))


def min_discrepancy(
    instance: NppInstance, threshold: float | None = None, sample_rate: int | None = None
) -> int:
    spec = spectrum(instance, sample_rate)
    thr = threshold if threshold is not None else peak_threshold(instance.n)
    return lowest_nonneg_peak(detect_peaks(spec, thr))


def decode_partition(
    instance: NppInstance,
    d_min: int,
    *,
    paranoid: bool = False,
    threshold: float | None = None,
    sample_rate: int | None = None,
) -> NppSolution:
    """Recover one optimal sign vector by merging nodes ``1..N-1`` into the seed.

    At epoch ``j`` the seed carries the signed sum of everything merged so
    far. Adding ``w_j`` keeps the line at ``d_min`` alive iff some completion
    with ``s_j = +1`` is optimal; otherwise ``s_j = -1``.
    """
    w = instance.weights
    grid = make_grid(instance, sample_rate)
    merged = w[0]
    signs = [1]
    sol = NppSolution(d_min=d_min, signs=())
    for j in range(1, instance.n):
        rest = [Mix(x) for x in w[j + 1:]]
        thr = threshold if threshold is not None else peak_threshold(len(rest) + 1)
        trial = merged + w[j]
        try:
            spec = chain_spectrum(trial, rest, grid)
        except WavenetError as exc:
            exc.epoch = j
            raise
        sol.runs += 1
        present = abs(spec.bin(d_min)) >= thr
        if present:
            sign = 1
        else:
            sign = -1
            if paranoid:
                check = chain_spectrum(merged - w[j], rest, grid)
                sol.runs += 1
                if abs(check.bin(d_min)) < thr:
                    exc = DecodeInconsistent(f"line at {d_min} missing for both signs of w_{j}")
                    exc.epoch = j
                    raise exc
        merged += sign * w[j]
        signs.append(sign)
        sol.epochs.append(NppEpoch(node=j, merged_weight=abs(trial), peak_present=present, sign=sign))
    sol.signs = tuple(signs)
    achieved = abs(sum(s * x for s, x in zip(signs, w)))
    if achieved != d_min:
        raise DecodeInconsistent(f"decoded signs give |s.w| = {achieved}, expected {d_min}")
    return sol


@dataclass
class NppRun:
    solution: NppSolution
    timefreq: TimeFreqMap
    threshold: float


def solve(
    instance: NppInstance,
    *,
    paranoid: bool = False,
    threshold: float | None = None,
    sample_rate: int | None = None,
) -> NppRun:
    """Initial run plus ``N - 1`` merge epochs (``2N - 1`` runs at most when paranoid)."""
    spec = spectrum(instance, sample_rate)
    thr = threshold if threshold is not None else peak_threshold(instance.n)
    d_min = lowest_nonneg_peak(detect_peaks(spec, thr))
    sol = decode_partition(
        instance, d_min, paranoid=paranoid, threshold=threshold, sample_rate=sample_rate
    )
    sol.runs += 1
    budget = 2 * instance.n - 1 if paranoid else instance.n
    if sol.runs > budget:
        raise EpochBudgetExceeded(f"NPP used {sol.runs} runs, budget {budget}")
    tfm = TimeFreqMap(frames=(spec,), stride=WINDOW, window_len=WINDOW)
    return NppRun(solution=sol, timefreq=tfm, threshold=thr)
