"""Sampled signals, exact-bin DFTs, moving Fourier transforms and peak readout.

Frequencies are integers in abstract frequency-units and internal tones are
``cos(2*pi*f*t)`` / ``exp(2j*pi*f*t)``. With an integer-length rectangular
window every integer frequency falls on exactly one DFT bin, so spectra of
the simulated networks are leakage-free and peak identity is testable.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
import numpy.typing as npt

from wavenet.errors import InvalidSignal, NoPeakFound, WindowOutOfRange

# Off-integer slack when mapping a time or frequency onto the sample lattice.
_LATTICE_TOL = 1e-9


def fft_freqs(n: int, sample_rate: int) -> np.ndarray:
    """``np.fft.fftfreq`` ordering, but as ``k * sample_rate / n`` so integer bins stay exact."""
    k = np.arange(n, dtype=np.int64)
    k[(n + 1) // 2:] -= n
    return (k * sample_rate) / n


@dataclass(frozen=True)
class TimeGrid:
    """Uniform sample lattice ``origin + n / sample_rate`` for ``n < sample_count``.

    ``f_max`` is the largest frequency the caller intends to put on the grid;
    the constructor rejects sample rates below ``4 * f_max``.
    """

    sample_rate: int
    duration: int
    origin: int = 0
    f_max: float = 0

    def __post_init__(self) -> None:
        if int(self.sample_rate) != self.sample_rate or self.sample_rate < 1:
            raise ValueError(f"sample_rate must be a positive integer, got {self.sample_rate}")
        if int(self.duration) != self.duration or self.duration < 0:
            raise ValueError(f"duration must be a nonnegative integer, got {self.duration}")
        if int(self.origin) != self.origin:
            raise ValueError(f"origin must be an integer, got {self.origin}")
        if self.f_max < 0:
            raise ValueError("f_max must be nonnegative")
        if self.sample_rate < 4 * self.f_max:
            raise ValueError(
                f"sample_rate {self.sample_rate} below 4 x f_max = {4 * self.f_max}"
            )

    @property
    def sample_count(self) -> int:
        return self.sample_rate * self.duration

    @property
    def end(self) -> int:
        return self.origin + self.duration

    def times(self) -> npt.NDArray[np.float64]:
        return self.origin + np.arange(self.sample_count) / self.sample_rate

    def index_of(self, t: float) -> int:
        """Sample index of absolute time ``t``; ``t`` must sit on the lattice."""
        x = (t - self.origin) * self.sample_rate
        k = round(x)
        if abs(x - k) > _LATTICE_TOL:
            raise WindowOutOfRange(f"time {t} is not on the sample lattice")
        return int(k)


def tone_phase(grid: TimeGrid, freq: float) -> npt.NDArray[np.float64]:
    """Phase ``2*pi*freq*t_n`` reduced mod 2*pi, exact for integer ``freq``.

    Integer frequencies use integer arithmetic on absolute sample numbers so
    phases do not drift over long grids.
    """
    n_abs = grid.origin * grid.sample_rate + np.arange(grid.sample_count, dtype=np.int64)
    if float(freq).is_integer():
        cycles = (int(freq) * n_abs) % grid.sample_rate
        return 2 * np.pi * cycles / grid.sample_rate
    return 2 * np.pi * np.mod(freq * n_abs / grid.sample_rate, 1.0)


_TONE_CACHE_MAX = 1 << 16


@lru_cache(maxsize=256)
def _block_tone(sample_rate: int, count: int, freq: int) -> np.ndarray:
    # integer tone on a grid starting at an integer time: origin drops out
    cycles = (freq * np.arange(count, dtype=np.int64)) % sample_rate
    out = np.exp(2j * np.pi * cycles / sample_rate)
    out.flags.writeable = False
    return out


def exp_tone(grid: TimeGrid, freq: float) -> npt.NDArray[np.complex128]:
    if float(freq).is_integer() and grid.sample_count <= _TONE_CACHE_MAX:
        return _block_tone(grid.sample_rate, grid.sample_count, int(freq))
    return np.exp(1j * tone_phase(grid, freq))


def cos_tone(grid: TimeGrid, freq: float) -> npt.NDArray[np.float64]:
    return np.cos(tone_phase(grid, freq))


def modulate(grid: TimeGrid, samples: np.ndarray, freq: float, kind: str = "exp") -> np.ndarray:
    """``samples * tone`` without materializing the tone on long grids.

    An integer tone repeats every ``sample_rate`` samples, so one period is
    broadcast over the grid's whole time units.
    """
    if float(freq).is_integer() and grid.duration > 1:
        period = TimeGrid(grid.sample_rate, 1, 0)
        tone = exp_tone(period, freq) if kind == "exp" else cos_tone(period, freq)
        rows = samples.reshape(grid.duration, grid.sample_rate)
        return (rows * tone).reshape(-1)
    tone = exp_tone(grid, freq) if kind == "exp" else cos_tone(grid, freq)
    return samples * tone


@dataclass(frozen=True, eq=False)
class Signal:
    """Immutable sampled signal. Real samples stay real; anything else is complex128."""

    grid: TimeGrid
    samples: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.samples)
        # arrays that are already frozen are owned by another Signal and safe to share
        owned = not arr.flags.writeable
        if np.iscomplexobj(arr):
            arr = arr.astype(np.complex128, copy=not owned)
        else:
            arr = arr.astype(np.float64, copy=not owned)
        if arr.ndim != 1 or arr.shape[0] != self.grid.sample_count:
            raise InvalidSignal(
                f"expected {self.grid.sample_count} samples, got shape {arr.shape}"
            )
        # a single non-finite sample poisons the sum
        if not np.isfinite(arr.sum()) and not np.all(np.isfinite(arr)):
            raise InvalidSignal("signal contains NaN or Inf samples")
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    @classmethod
    def wrap(cls, grid: TimeGrid, samples: np.ndarray) -> Signal:
        """Adopt a freshly computed array without copying; the caller must drop its reference."""
        samples.flags.writeable = False
        return cls(grid, samples)

    @classmethod
    def zeros(cls, grid: TimeGrid, complex_: bool = True) -> Signal:
        return cls(grid, np.zeros(grid.sample_count, dtype=np.complex128 if complex_ else float))

    @classmethod
    def constant(cls, grid: TimeGrid, value: float = 1.0) -> Signal:
        return cls(grid, np.full(grid.sample_count, value))

    @classmethod
    def cosine(cls, grid: TimeGrid, freq: float, amplitude: float = 1.0) -> Signal:
        return cls(grid, amplitude * cos_tone(grid, freq))

    @classmethod
    def exponential(cls, grid: TimeGrid, freq: float, amplitude: complex = 1.0) -> Signal:
        return cls(grid, amplitude * exp_tone(grid, freq))

    @classmethod
    def packet(
        cls, grid: TimeGrid, freq: float, start: float, length: float, amplitude: complex = 1.0
    ) -> Signal:
        """Rectangular complex packet ``amplitude * exp(2j*pi*freq*t)`` on ``[start, start+length)``."""
        i0, i1 = grid.index_of(start), grid.index_of(start + length)
        if i0 < 0 or i1 > grid.sample_count:
            raise WindowOutOfRange(f"packet [{start}, {start + length}) outside grid")
        x = np.zeros(grid.sample_count, dtype=np.complex128)
        x[i0:i1] = amplitude * exp_tone(grid, freq)[i0:i1]
        return cls(grid, x)

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.samples)

    def __len__(self) -> int:
        return self.samples.shape[0]

    def _check_grid(self, other: Signal) -> None:
        if other.grid != self.grid:
            raise InvalidSignal("signals live on different grids")

    def __add__(self, other: Signal) -> Signal:
        self._check_grid(other)
        return Signal(self.grid, self.samples + other.samples)

    def __sub__(self, other: Signal) -> Signal:
        self._check_grid(other)
        return Signal(self.grid, self.samples - other.samples)

    def scale(self, factor: complex) -> Signal:
        return Signal(self.grid, self.samples * factor)

    def energy(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2))


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Normalized DFT of one rectangular window.

    ``freqs`` ascend over ``[-sample_rate/2, sample_rate/2)`` in steps of
    ``1/window_len``; a unit complex tone on an integer window has ``|amp| == 1``.
    """

    freqs: np.ndarray
    amps: np.ndarray
    window_start: float
    window_len: float

    def magnitudes(self) -> npt.NDArray[np.float64]:
        return np.abs(self.amps)

    def bin(self, freq: float) -> complex:
        """Amplitude of the bin at ``freq`` (zero when ``freq`` is off-lattice or out of band)."""
        k = int(np.searchsorted(self.freqs, freq - _LATTICE_TOL))
        if k < len(self.freqs) and abs(self.freqs[k] - freq) <= _LATTICE_TOL:
            return complex(self.amps[k])
        return 0j

    def as_dict(self, threshold: float = 0.0) -> dict[float, complex]:
        mags = self.magnitudes()
        keep = mags > threshold if threshold > 0 else np.ones_like(mags, dtype=bool)
        return {_clean(f): complex(a) for f, a in zip(self.freqs[keep], self.amps[keep])}


@dataclass(frozen=True)
class Peak:
    freq: float
    magnitude: float
    window_start: float


@dataclass(frozen=True, eq=False)
class TimeFreqMap:
    frames: tuple[Spectrum, ...]
    stride: float
    window_len: float

    def __post_init__(self) -> None:
        starts = [fr.window_start for fr in self.frames]
        for a, b in zip(starts, starts[1:]):
            if abs((b - a) - self.stride) > _LATTICE_TOL:
                raise ValueError("frames must advance by exactly one stride")

    def __len__(self) -> int:
        return len(self.frames)

    def starts(self) -> list[float]:
        return [fr.window_start for fr in self.frames]

    def peaks(self, threshold: float) -> list[Peak]:
        out: list[Peak] = []
        for fr in self.frames:
            out.extend(detect_peaks(fr, threshold))
        return out


def _clean(x: float) -> float:
    """Collapse lattice-integral floats to int so frequencies print and hash cleanly."""
    r = round(float(x))
    return r if abs(x - r) <= _LATTICE_TOL else float(x)


def _spectrum_of(samples: np.ndarray, sample_rate: int, start: float, length: float) -> Spectrum:
    n = samples.shape[-1]
    amps = np.fft.fftshift(np.fft.fft(samples) / n)
    freqs = np.fft.fftshift(fft_freqs(n, sample_rate))
    return Spectrum(freqs=freqs, amps=amps, window_start=_clean(start), window_len=length)


def dft(signal: Signal) -> Spectrum:
    if len(signal) == 0:
        raise InvalidSignal("cannot transform an empty signal")
    g = signal.grid
    return _spectrum_of(signal.samples, g.sample_rate, g.origin, g.duration)


def _window_slice(signal: Signal, window_start: float, window_len: float) -> tuple[int, int]:
    g = signal.grid
    if window_len <= 0:
        raise WindowOutOfRange(f"window length must be positive, got {window_len}")
    i0 = g.index_of(window_start)
    i1 = g.index_of(window_start + window_len)
    if i0 < 0 or i1 > g.sample_count:
        raise WindowOutOfRange(
            f"window [{window_start}, {window_start + window_len}] outside grid "
            f"[{g.origin}, {g.end}]"
        )
    return i0, i1


def windowed_dft(signal: Signal, window_start: float, window_len: float) -> Spectrum:
    i0, i1 = _window_slice(signal, window_start, window_len)
    return _spectrum_of(signal.samples[i0:i1], signal.grid.sample_rate, window_start, window_len)


def moving_dft(signal: Signal, window_len: float, stride: float) -> TimeFreqMap:
    """Rectangular-window spectra at starts ``origin, origin+stride, ...`` that fit the grid."""
    if stride <= 0 or window_len <= 0:
        raise WindowOutOfRange("stride and window_len must be positive")
    g = signal.grid
    starts: list[float] = []
    s = g.origin
    while s + window_len <= g.end + _LATTICE_TOL:
        starts.append(s)
        s += stride
    if not starts:
        return TimeFreqMap(frames=(), stride=stride, window_len=window_len)
    _window_slice(signal, starts[-1], window_len)
    w = g.index_of(g.origin + window_len)
    step = g.index_of(g.origin + stride)
    views = np.lib.stride_tricks.sliding_window_view(signal.samples, w)[::step][: len(starts)]
    amps = np.fft.fftshift(np.fft.fft(views, axis=-1) / w, axes=-1)
    freqs = np.fft.fftshift(fft_freqs(w, g.sample_rate))
    frames = tuple(
        Spectrum(freqs=freqs, amps=amps[i], window_start=_clean(st), window_len=window_len)
        for i, st in enumerate(starts)
    )
    return TimeFreqMap(frames=frames, stride=stride, window_len=window_len)


def detect_peaks(spectrum: Spectrum, threshold: float) -> list[Peak]:
    """All bins with magnitude >= ``threshold``, ascending by frequency."""
    if threshold <= 0:
        raise ValueError("peak threshold must be positive")
    mags = spectrum.magnitudes()
    idx = np.flatnonzero(mags >= threshold)
    return [
        Peak(freq=_clean(spectrum.freqs[i]), magnitude=float(mags[i]), window_start=spectrum.window_start)
        for i in idx
    ]


def lowest_nonneg_peak(peaks: Sequence[Peak]) -> int:
    candidates = [p.freq for p in peaks if p.freq >= -_LATTICE_TOL]
    if not candidates:
        raise NoPeakFound("no peak at a nonnegative frequency; threshold too high?")
    f = min(candidates)
    return int(round(f))


def timefreq_rows(tfm: TimeFreqMap, threshold: float) -> list[tuple[float, float, float]]:
    """``(window_start, freq, magnitude)`` for every bin at or above ``threshold``."""
    rows = [(p.window_start, p.freq, p.magnitude) for p in tfm.peaks(threshold)]
    rows.sort(key=lambda r: (r[0], r[1]))
    return rows


def _fmt(x: float) -> str:
    if isinstance(x, int) or float(x).is_integer():
        return str(int(x))
    return repr(float(x))


def format_timefreq_csv(rows: Iterable[Sequence[float]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["window_start", "freq", "magnitude"])
    for start, freq, mag in sorted(rows, key=lambda r: (r[0], r[1])):
        writer.writerow([_fmt(start), _fmt(freq), f"{mag:.9g}"])
    return buf.getvalue()
