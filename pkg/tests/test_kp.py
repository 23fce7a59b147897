import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wavenet import kp, oracles
from wavenet.errors import InvalidInstance
from wavenet.ops import Branch, Delay, Identity, Mix, Shift

TOY = kp.KpInstance((1, 2), (4, 7), 2)


def test_instance_validation():
    with pytest.raises(InvalidInstance):
        kp.KpInstance((1, 2), (4,), 2)
    with pytest.raises(InvalidInstance):
        kp.KpInstance((0, 2), (4, 7), 2)
    with pytest.raises(InvalidInstance):
        kp.KpInstance((1,), (5000,), 2)
    with pytest.raises(InvalidInstance):
        kp.KpInstance((1,), (5,), -1)


def test_build_chain():
    ops = kp.build_kp_chain(TOY)
    assert ops[1] == Branch(((Identity(),), (Shift(7), Delay(4))))
    assert kp.build_kp_chain(TOY, "mix")[0] == Branch(((Identity(),), (Mix(4), Delay(2))))
    assert kp.build_kp_chain(TOY, skip=[0])[0] == Identity()
    with pytest.raises(ValueError):
        kp.build_kp_chain(TOY, "warp")


def test_toy_packets():
    tfm = kp.run_chain(TOY)
    assert kp.packets(tfm, 0.5) == [(0, 0), (4, 2), (7, 4), (11, 6)]


def test_toy_solution():
    assert kp.max_value(TOY) == (7, 2)
    run = kp.solve(TOY)
    assert run.solution.items == (0, 1)
    assert run.solution.arrival == 4
    assert run.solution.runs <= TOY.n + 1


def test_single_item():
    inst = kp.KpInstance((3,), (5,), 3)
    assert kp.solve(inst).solution.items == (1,)
    assert kp.solve(kp.KpInstance((3,), (5,), 2)).solution.items == (0,)


items = st.lists(st.tuples(st.integers(1, 8), st.integers(1, 12)), min_size=1, max_size=7)


@given(items)
def test_packet_bijection(its):
    w = tuple(a for a, _ in its)
    v = tuple(b for _, b in its)
    inst = kp.KpInstance(w, v, sum(w))
    got = set(kp.packets(kp.run_chain(inst), 0.5))
    want = {
        (sum(x * b for x, b in zip(xs, v)), 2 * sum(x * a for x, a in zip(xs, w)))
        for xs in itertools.product((0, 1), repeat=len(w))
    }
    assert got == want
    assert all(t % 2 == 0 for _, t in got)


@given(items, st.floats(0.25, 0.5), st.sampled_from(kp.MODES))
def test_matches_dp_in_both_modes(its, frac, mode):
    w = tuple(a for a, _ in its)
    v = tuple(b for _, b in its)
    inst = kp.KpInstance(w, v, int(sum(w) * frac))
    run = kp.solve(inst, mode)
    sol = run.solution
    assert sol.v_max == oracles.kp_dp(w, v, inst.capacity).optimum
    assert sum(x * a for x, a in zip(sol.items, w)) <= inst.capacity
    assert sum(x * b for x, b in zip(sol.items, v)) == sol.v_max


@given(items)
def test_mix_extra_peaks_lie_below(its):
    w = tuple(a for a, _ in its)
    v = tuple(b for _, b in its)
    inst = kp.KpInstance(w, v, sum(w))
    shift = kp.packets(kp.run_chain(inst, "shift"), 0.5)
    mix = kp.packets(kp.run_chain(inst, "mix"), kp.peak_threshold("mix", inst.n))
    top = {}
    for f, t in shift:
        top[t] = max(top.get(t, 0), f)
    for f, t in mix:
        assert f <= top[t]
