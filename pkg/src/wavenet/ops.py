"""Wave operators: mixing, shifting, filtering, delay, and branch-and-sum.

Each operator is a small frozen dataclass; :func:`apply` dispatches on the
variant. Operators also have a canonical text form used in network files::

    mix(5)
    shift(4)|delay(2)
    branch(id; shift(4)|delay(2))
    bandpass(2,8)
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from wavenet.errors import GridOverflow, InvalidFilter, InvalidOp
from wavenet.signal import Signal, fft_freqs, modulate


@dataclass(frozen=True)
class Identity:
    pass


@dataclass(frozen=True)
class Mix:
    """Multiply by ``cos(2*pi*freq*t)``: every spectral line at nu splits to nu +/- freq."""

    freq: int

    def __post_init__(self) -> None:
        if self.freq < 0:
            raise InvalidOp(f"mix frequency must be >= 0, got {self.freq}")


@dataclass(frozen=True)
class Shift:
    """Multiply by ``exp(2j*pi*freq*t)``: translate the whole spectrum by ``freq``."""

    freq: int


FILTER_KINDS = ("lowpass", "highpass", "bandpass")


@dataclass(frozen=True)
class Filter:
    """Heaviside mask on ``|nu|``; boundaries are inclusive.

    ``lowpass`` keeps ``|nu| <= high``, ``highpass`` keeps ``|nu| >= low``,
    ``bandpass`` keeps ``low <= |nu| <= high``.
    """

    kind: str
    low: float = 0
    high: float = 0

    def __post_init__(self) -> None:
        if self.kind not in FILTER_KINDS:
            raise InvalidFilter(f"unknown filter kind {self.kind!r}")
        if self.kind == "bandpass" and not self.low < self.high:
            raise InvalidFilter(f"bandpass needs low < high, got ({self.low}, {self.high})")
        if self.low < 0 or self.high < 0:
            raise InvalidFilter("filter edges must be nonnegative")

    def mask(self, freqs: np.ndarray) -> np.ndarray:
        a = np.abs(freqs)
        if self.kind == "lowpass":
            return a <= self.high
        if self.kind == "highpass":
            return a >= self.low
        return (a >= self.low) & (a <= self.high)

    @property
    def edge(self) -> float:
        return self.low if self.kind == "highpass" else self.high


@dataclass(frozen=True)
class Delay:
    tau: float

    def __post_init__(self) -> None:
        if self.tau < 0:
            raise InvalidOp(f"delay must be >= 0, got {self.tau}")


@dataclass(frozen=True)
class Branch:
    """Parallel sub-chains whose outputs are summed (unit gain unless ``gains`` given)."""

    chains: tuple[tuple["WaveOp", ...], ...]
    gains: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        chains = tuple(tuple(c) for c in self.chains)
        object.__setattr__(self, "chains", chains)
        if len(chains) < 2:
            raise InvalidOp("branch needs at least two sub-chains")
        if self.gains is not None:
            gains = tuple(float(g) for g in self.gains)
            if len(gains) != len(chains):
                raise InvalidOp("one gain per branch required")
            object.__setattr__(self, "gains", gains)

    def gain(self, i: int) -> float:
        return 1.0 if self.gains is None else self.gains[i]


WaveOp = Union[Identity, Mix, Shift, Filter, Delay, Branch]


def _filter(op: Filter, x: Signal) -> Signal:
    g = x.grid
    if op.edge > g.sample_rate / 2:
        raise InvalidFilter(f"filter edge {op.edge} beyond Nyquist {g.sample_rate / 2}")
    spec = np.fft.fft(x.samples)
    freqs = fft_freqs(len(x), g.sample_rate)
    y = np.fft.ifft(spec * op.mask(freqs))
    # symmetric mask keeps real input Hermitian
    return Signal.wrap(g, np.ascontiguousarray(y.real) if x.is_real else y)


def _delay(op: Delay, x: Signal) -> Signal:
    sr = x.grid.sample_rate
    k = round(op.tau * sr)
    if abs(op.tau * sr - k) > 1e-9:
        raise InvalidOp(f"delay {op.tau} is not a whole number of samples at rate {sr}")
    n = len(x)
    if k == 0:
        return x
    if k >= n:
        tail = x.samples
    else:
        tail = x.samples[n - k:]
    if np.any(tail != 0):
        raise GridOverflow(f"delay {op.tau} pushes nonzero samples past the grid end")
    y = np.zeros_like(x.samples)
    if k < n:
        y[k:] = x.samples[: n - k]
    return Signal.wrap(x.grid, y)


def apply(op: WaveOp, x: Signal) -> Signal:
    if isinstance(op, Identity):
        return x
    if isinstance(op, Mix):
        return Signal.wrap(x.grid, modulate(x.grid, x.samples, op.freq, "cos"))
    if isinstance(op, Shift):
        return Signal.wrap(x.grid, modulate(x.grid, x.samples, op.freq, "exp"))
    if isinstance(op, Filter):
        return _filter(op, x)
    if isinstance(op, Delay):
        return _delay(op, x)
    if isinstance(op, Branch):
        total = None
        for i, chain in enumerate(op.chains):
            y = apply_chain(chain, x).samples
            g = op.gain(i)
            term = y if g == 1.0 else g * y
            if total is None:
                total = np.array(term, dtype=np.result_type(term, np.float64))
            elif np.iscomplexobj(term) and not np.iscomplexobj(total):
                total = total + term
            else:
                total += term
        return Signal.wrap(x.grid, total)
    raise InvalidOp(f"not a wave operator: {op!r}")


def apply_chain(ops: Sequence[WaveOp], x: Signal) -> Signal:
    for op in ops:
        x = apply(op, x)
    return x


def is_memoryless(op: WaveOp) -> bool:
    """True when the operator acts sample-by-sample or per window (no time translation)."""
    if isinstance(op, Delay):
        return op.tau == 0
    if isinstance(op, Branch):
        return all(is_memoryless(o) for c in op.chains for o in c)
    return True


# ---------------------------------------------------------------------------
# canonical text form


def _num(x: float) -> str:
    x = float(x)
    return str(int(x)) if x.is_integer() else repr(x)


def op_to_text(op: WaveOp) -> str:
    if isinstance(op, Identity):
        return "id"
    if isinstance(op, Mix):
        return f"mix({_num(op.freq)})"
    if isinstance(op, Shift):
        return f"shift({_num(op.freq)})"
    if isinstance(op, Delay):
        return f"delay({_num(op.tau)})"
    if isinstance(op, Filter):
        if op.kind == "lowpass":
            return f"lowpass({_num(op.high)})"
        if op.kind == "highpass":
            return f"highpass({_num(op.low)})"
        return f"bandpass({_num(op.low)},{_num(op.high)})"
    if isinstance(op, Branch):
        parts = [chain_to_text(c) for c in op.chains]
        if op.gains is not None:
            parts.append("gains=" + ",".join(_num(g) for g in op.gains))
        return "branch(" + "; ".join(parts) + ")"
    raise InvalidOp(f"not a wave operator: {op!r}")


def chain_to_text(ops: Sequence[WaveOp]) -> str:
    if not ops:
        return "id"
    return "|".join(op_to_text(o) for o in ops)


_TOKEN = re.compile(r"\s*([A-Za-z_]+|-?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?|[()|;,=])")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks: list[str] = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if m is None:
                raise InvalidOp(f"bad operator text at column {pos}: {text!r}")
            self.toks.append(m.group(1))
            pos = m.end()
        self.i = 0

    def peek(self) -> str | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expect: str | None = None) -> str:
        tok = self.peek()
        if tok is None or (expect is not None and tok != expect):
            raise InvalidOp(f"expected {expect or 'token'} in {self.text!r}, got {tok!r}")
        self.i += 1
        return tok

    def number(self) -> float:
        tok = self.take()
        try:
            v = float(tok)
        except ValueError:
            raise InvalidOp(f"expected a number in {self.text!r}, got {tok!r}") from None
        return int(v) if v.is_integer() else v

    def chain(self) -> tuple[WaveOp, ...]:
        ops = [self.op()]
        while self.peek() == "|":
            self.take("|")
            ops.append(self.op())
        return tuple(ops)

    def op(self) -> WaveOp:
        name = self.take().lower()
        if name in ("id", "identity"):
            return Identity()
        self.take("(")
        if name == "branch":
            chains = [self.chain()]
            gains = None
            while self.peek() == ";":
                self.take(";")
                if self.peek() == "gains":
                    self.take("gains")
                    self.take("=")
                    gains = [self.number()]
                    while self.peek() == ",":
                        self.take(",")
                        gains.append(self.number())
                else:
                    chains.append(self.chain())
            self.take(")")
            return Branch(tuple(chains), None if gains is None else tuple(gains))
        a = self.number()
        b = None
        if self.peek() == ",":
            self.take(",")
            b = self.number()
        self.take(")")
        if name == "mix":
            return Mix(a)
        if name == "shift":
            return Shift(a)
        if name == "delay":
            return Delay(a)
        if name == "lowpass":
            return Filter("lowpass", 0, a)
        if name == "highpass":
            return Filter("highpass", a, 0)
        if name == "bandpass":
            if b is None:
                raise InvalidOp("bandpass takes two edges")
            return Filter("bandpass", a, b)
        raise InvalidOp(f"unknown operator {name!r}")


def parse_chain(text: str) -> tuple[WaveOp, ...]:
    p = _Parser(text)
    ops = p.chain()
    if p.peek() is not None:
        raise InvalidOp(f"trailing input in {text!r}: {p.peek()!r}")
    return ops


def parse_op(text: str) -> WaveOp:
    p = _Parser(text)
    op = p.op()
    if p.peek() is not None:
        raise InvalidOp(f"trailing input in {text!r}")
    return op
