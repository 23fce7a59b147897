import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wavenet import npp, oracles
from wavenet.errors import InvalidInstance
from wavenet.ops import Mix
from wavenet.signal import detect_peaks

N20 = (3, 5, 9, 10, 12, 16, 20, 26, 27, 29, 38, 42, 43, 54, 55, 59, 63, 93, 98, 100)


def test_instance_validation():
    with pytest.raises(InvalidInstance, match="w_j >= 1"):
        npp.NppInstance((3, 0))
    with pytest.raises(InvalidInstance):
        npp.NppInstance((3,))
    with pytest.raises(InvalidInstance):
        npp.NppInstance((3000, 3000))
    assert npp.NppInstance((3000, 3000), cap=6000).n == 2


def test_build_chain():
    assert npp.build_chain(npp.NppInstance((3, 5))) == (3, [Mix(5)])
    assert npp.build_chain(npp.NppInstance((3, 5, 9))) == (3, [Mix(5), Mix(9)])
    seed, ops = npp.build_chain(npp.NppInstance(N20))
    assert seed == 3 and len(ops) == 19


def test_min_discrepancy_examples():
    assert npp.min_discrepancy(npp.NppInstance((3, 5))) == 2
    assert npp.min_discrepancy(npp.NppInstance((2, 2))) == 0


def test_decode_examples():
    inst = npp.NppInstance((3, 5))
    assert npp.decode_partition(inst, 2).signs == (1, -1)
    assert npp.decode_partition(npp.NppInstance((2, 2)), 0).signs == (1, -1)


def test_n20_instance():
    run = npp.solve(npp.NppInstance(N20))
    sol = run.solution
    a, b = sol.subsets(N20)
    assert sol.d_min == 0
    assert sum(a) == sum(b) == 401
    assert sorted(a) == [3, 5, 9, 10, 12, 16, 20, 26, 27, 29, 38, 43, 63, 100]
    assert sol.runs == 20
    # merged seed after the first and eleventh epochs
    assert sol.epochs[0].merged_weight == 8
    assert sol.epochs[10].merged_weight == 237


def test_paranoid_budget():
    inst = npp.NppInstance((4, 7, 9, 12, 15))
    sol = npp.solve(inst, paranoid=True).solution
    assert sol.runs <= 2 * inst.n - 1
    assert abs(sum(s * w for s, w in zip(sol.signs, inst.weights))) == sol.d_min


weights = st.lists(st.integers(1, 60), min_size=2, max_size=10)


@given(weights)
def test_spectrum_matches_sign_enumeration(ws):
    inst = npp.NppInstance(tuple(ws))
    spec = npp.spectrum(inst)
    got = {p.freq for p in detect_peaks(spec, npp.peak_threshold(inst.n)) if p.freq >= 0}
    assert got == oracles.npp_spectrum_set(ws)


@given(weights)
def test_parity(ws):
    inst = npp.NppInstance(tuple(ws))
    for p in detect_peaks(npp.spectrum(inst), npp.peak_threshold(inst.n)):
        assert (int(p.freq) - sum(ws)) % 2 == 0


@given(weights)
def test_solve_valid(ws):
    inst = npp.NppInstance(tuple(ws))
    sol = npp.solve(inst).solution
    assert sol.d_min == oracles.npp_bruteforce(ws).optimum
    assert sol.signs[0] == 1
    assert abs(sum(s * w for s, w in zip(sol.signs, ws))) == sol.d_min
    assert sol.runs <= inst.n


def test_threshold_is_half_the_weakest_line():
    inst = npp.NppInstance((1, 2, 4, 8))
    mags = npp.spectrum(inst).magnitudes()
    weakest = mags[mags > 1e-9].min()
    assert npp.peak_threshold(inst.n) == pytest.approx(0.5 * weakest)
