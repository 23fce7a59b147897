import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wavenet.errors import InvalidSignal, NoPeakFound, WindowOutOfRange
from wavenet.signal import (
    Peak,
    Signal,
    Spectrum,
    TimeFreqMap,
    TimeGrid,
    detect_peaks,
    dft,
    format_timefreq_csv,
    lowest_nonneg_peak,
    moving_dft,
    timefreq_rows,
    windowed_dft,
)


def grid(sr=64, dur=1, f_max=0):
    return TimeGrid(sr, dur, 0, f_max)


def nonzero(spec, tol=1e-9):
    return {f: m for f, m in zip(spec.freqs, spec.magnitudes()) if m > tol}


def test_grid_counts_and_nyquist_guard():
    g = TimeGrid(40, 3, 0, 10)
    assert g.sample_count == 120
    assert g.end == 3
    with pytest.raises(ValueError):
        TimeGrid(39, 1, 0, 10)


def test_signal_rejects_bad_samples():
    g = grid(8)
    with pytest.raises(InvalidSignal):
        Signal(g, np.zeros(7))
    bad = np.zeros(8)
    bad[3] = np.nan
    with pytest.raises(InvalidSignal):
        Signal(g, bad)


def test_signal_is_immutable():
    s = Signal.cosine(grid(), 3)
    with pytest.raises(ValueError):
        s.samples[0] = 2.0


def test_dft_cosine():
    spec = dft(Signal.cosine(grid(), 3))
    peaks = nonzero(spec, 1e-12)
    assert set(peaks) == {-3, 3}
    assert all(abs(m - 0.5) < 1e-12 for m in peaks.values())


def test_dft_cosine_product():
    g = grid()
    x = Signal(g, Signal.cosine(g, 3).samples * Signal.cosine(g, 5).samples)
    peaks = nonzero(dft(x))
    assert set(peaks) == {-8, -2, 2, 8}
    assert all(abs(m - 0.25) < 1e-12 for m in peaks.values())


def test_dft_npp_three_weights():
    g = grid(80)
    x = np.ones(g.sample_count)
    for w in (3, 5, 9):
        x = x * Signal.cosine(g, w).samples
    assert set(nonzero(dft(Signal(g, x)))) == {-17, -11, -7, -1, 1, 7, 11, 17}


def test_dft_empty_signal():
    with pytest.raises(InvalidSignal):
        dft(Signal(TimeGrid(8, 0), np.zeros(0)))


def test_windowed_dft_examples():
    g = TimeGrid(32, 8)
    assert detect_peaks(windowed_dft(Signal.zeros(g), 3, 1), 1e-6) == []
    p4 = Signal.packet(g, 4, 2, 1)
    spec = windowed_dft(p4, 2, 1)
    assert set(nonzero(spec)) == {4}
    assert abs(abs(spec.bin(4)) - 1) < 1e-12
    both = p4 + Signal.packet(g, 7, 6, 1)
    assert set(nonzero(windowed_dft(both, 6, 1))) == {7}
    with pytest.raises(WindowOutOfRange):
        windowed_dft(both, 7.5, 1)


def test_windowed_full_grid_equals_dft():
    g = TimeGrid(16, 3)
    x = Signal.exponential(g, 2) + Signal.cosine(g, 5)
    a, b = dft(x), windowed_dft(x, 0, 3)
    assert np.array_equal(a.amps, b.amps)
    assert np.array_equal(a.freqs, b.freqs)


def test_moving_dft_examples():
    g = TimeGrid(16, 4)
    tfm = moving_dft(Signal.zeros(g), 1, 1)
    assert len(tfm) == 4
    assert tfm.peaks(1e-6) == []
    tfm = moving_dft(Signal.packet(g, 5, 2, 1), 1, 1)
    assert [(p.freq, p.window_start) for p in tfm.peaks(0.5)] == [(5, 2)]
    with pytest.raises(WindowOutOfRange):
        moving_dft(Signal.zeros(g), 1, 0)


def test_timefreqmap_stride_checked():
    g = TimeGrid(8, 4)
    x = Signal.zeros(g)
    a, b = windowed_dft(x, 0, 1), windowed_dft(x, 2, 1)
    with pytest.raises(ValueError):
        TimeFreqMap((a, b), 1, 1)


def _spectrum(bins):
    freqs = np.arange(-8, 8, dtype=float)
    amps = np.zeros(16, dtype=complex)
    for f, a in bins.items():
        amps[f + 8] = a
    return Spectrum(freqs, amps, 0, 1)


def test_detect_peaks_examples():
    assert [p.freq for p in detect_peaks(_spectrum({3: 0.5, 7: 1e-9}), 1e-4)] == [3]
    assert [p.freq for p in detect_peaks(_spectrum({0: 0.2, 2: 0.2}), 0.1)] == [0, 2]
    with pytest.raises(ValueError):
        detect_peaks(_spectrum({}), 0)


def test_lowest_nonneg_peak():
    mk = lambda fs: [Peak(f, 1.0, 0) for f in fs]
    assert lowest_nonneg_peak(mk([-7, -1, 1, 7])) == 1
    assert lowest_nonneg_peak(mk([0, 2, 8])) == 0
    with pytest.raises(NoPeakFound):
        lowest_nonneg_peak(mk([-3]))
    with pytest.raises(NoPeakFound):
        lowest_nonneg_peak([])


def test_csv_format():
    g = TimeGrid(16, 2)
    tfm = moving_dft(Signal.packet(g, 3, 1, 1, 0.123456789123), 1, 1)
    text = format_timefreq_csv(timefreq_rows(tfm, 0.01))
    assert text == "window_start,freq,magnitude\n1,3,0.123456789\n"
    assert format_timefreq_csv([]) == "window_start,freq,magnitude\n"


tones = st.lists(
    st.tuples(st.integers(-15, 15), st.floats(0.1, 2.0), st.floats(0, 6.28)),
    min_size=1,
    max_size=5,
    unique_by=lambda t: t[0],
)


@given(tones, st.integers(1, 3))
def test_leakage_free(components, window):
    g = TimeGrid(64, window)
    x = np.zeros(g.sample_count, dtype=complex)
    for f, a, ph in components:
        x += a * np.exp(1j * ph) * Signal.exponential(g, f).samples
    spec = dft(Signal(g, x))
    amp = {f: a for f, a, _ in components}
    top = max(amp.values())
    for f, m in zip(spec.freqs, spec.magnitudes()):
        if f in amp:
            assert abs(m - amp[f]) < 1e-9
        else:
            assert m < 1e-9 * top


@given(tones, tones, st.complex_numbers(max_magnitude=3), st.complex_numbers(max_magnitude=3))
def test_linearity(c1, c2, a, b):
    g = TimeGrid(64, 1)
    mk = lambda cs: Signal(g, sum(m * Signal.exponential(g, f).samples for f, m, _ in cs))
    x, y = mk(c1), mk(c2)
    lhs = dft(Signal(g, a * x.samples + b * y.samples)).amps
    rhs = a * dft(x).amps + b * dft(y).amps
    scale = max(1.0, np.abs(rhs).max())
    assert np.abs(lhs - rhs).max() <= 1e-12 * scale


@given(st.lists(st.tuples(st.integers(0, 15), st.floats(0.1, 2.0)), min_size=1, max_size=4))
def test_real_spectrum_symmetric(cs):
    g = TimeGrid(64, 2)
    x = Signal(g, sum(a * Signal.cosine(g, f).samples for f, a in cs))
    spec = dft(x)
    for f in range(1, 31):
        assert abs(abs(spec.bin(f)) - abs(spec.bin(-f))) < 1e-12
