"""Wave computing on dynamical networks: signal simulation and NP-hard solvers."""

from wavenet.errors import WavenetError
from wavenet.signal import (
    Peak,
    Signal,
    Spectrum,
    TimeFreqMap,
    TimeGrid,
    detect_peaks,
    dft,
    lowest_nonneg_peak,
    moving_dft,
    windowed_dft,
)

__all__ = [
    "Peak",
    "Signal",
    "Spectrum",
    "TimeFreqMap",
    "TimeGrid",
    "WavenetError",
    "detect_peaks",
    "dft",
    "lowest_nonneg_peak",
    "moving_dft",
    "windowed_dft",
]

__version__ = "0.1.0"
