"""Exception hierarchy shared by all wavenet modules."""

from __future__ import annotations


class WavenetError(Exception):
    """Base class for every error raised by wavenet.

    Solvers set ``epoch`` when the failure happened inside a decode epoch.
    """

    epoch: int | None = None


class InvalidSignal(WavenetError):
    pass


class WindowOutOfRange(WavenetError):
    pass


class NoPeakFound(WavenetError):
    pass


class GridOverflow(WavenetError):
    pass


class InvalidFilter(WavenetError):
    pass


class InvalidOp(WavenetError):
    pass


class InvalidNetwork(WavenetError):
    pass


class NotAChain(WavenetError):
    pass


class InvalidInstance(WavenetError):
    pass


class InvalidFrequencyPlan(WavenetError):
    pass


class NoHamiltonianFound(WavenetError):
    pass


class DecodeInconsistent(WavenetError):
    pass


class EpochBudgetExceeded(WavenetError):
    pass


class OracleTooLarge(WavenetError):
    pass
