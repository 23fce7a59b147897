import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from wavenet import oracles
from wavenet.errors import OracleTooLarge
from wavenet.oracles import Method

N20 = [3, 5, 9, 10, 12, 16, 20, 26, 27, 29, 38, 42, 43, 54, 55, 59, 63, 93, 98, 100]


def test_npp_examples():
    r = oracles.npp_bruteforce([3, 5])
    assert (r.optimum, r.witness, r.method) == (2, (1, -1), Method.BRUTE_FORCE)
    assert oracles.npp_bruteforce([1, 1, 1]).optimum == 1
    assert oracles.npp_bruteforce(N20).optimum == 0


def test_npp_size_guard():
    with pytest.raises(OracleTooLarge):
        oracles.npp_bruteforce([1] * 27)
    with pytest.raises(OracleTooLarge):
        oracles.npp_spectrum_set([1] * 23)


def test_spectrum_set_examples():
    assert oracles.npp_spectrum_set([3, 5]) == {2, 8}
    assert oracles.npp_spectrum_set([3, 5, 9]) == {1, 7, 11, 17}
    assert oracles.npp_spectrum_set([2, 2]) == {0, 4}


@given(st.lists(st.integers(1, 50), min_size=2, max_size=10))
def test_npp_witness_and_min(ws):
    r = oracles.npp_bruteforce(ws)
    assert r.witness[0] == 1
    assert abs(sum(s * w for s, w in zip(r.witness, ws))) == r.optimum
    assert r.optimum == min(oracles.npp_spectrum_set(ws))


def test_kp_examples():
    r = oracles.kp_dp([1, 2], [4, 7], 2)
    assert (r.optimum, r.witness) == (7, (0, 1))
    assert oracles.kp_dp([3, 4], [5, 6], 0) == oracles.OracleResult(0, (0, 0), Method.DYNAMIC_PROGRAMMING)
    assert oracles.kp_dp([3, 4], [5, 6], 7).witness == (1, 1)
    with pytest.raises(OracleTooLarge):
        oracles.kp_dp([1] * 100, [1] * 100, 10**7)


@given(st.lists(st.tuples(st.integers(1, 12), st.integers(1, 20)), min_size=1, max_size=8), st.integers(0, 40))
def test_kp_matches_enumeration(items, cap):
    w, v = [a for a, _ in items], [b for _, b in items]
    r = oracles.kp_dp(w, v, cap)
    best = max(
        (sum(x * b for x, b in zip(xs, v)), tuple(-x for x in xs))
        for xs in itertools.product((0, 1), repeat=len(w))
        if sum(x * a for x, a in zip(xs, w)) <= cap
    )
    assert r.optimum == best[0]
    # lexicographically smallest optimum
    assert r.witness == min(
        xs for xs in itertools.product((0, 1), repeat=len(w))
        if sum(x * a for x, a in zip(xs, w)) <= cap and sum(x * b for x, b in zip(xs, v)) == best[0]
    )


def test_tsp_examples():
    assert oracles.tsp_held_karp([[0, 5, 5], [5, 0, 5], [5, 5, 0]]).optimum == 15
    square = [[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]]
    r = oracles.tsp_held_karp(square)
    assert (r.optimum, r.witness) == (4, (0, 1, 2, 3, 0))
    with pytest.raises(OracleTooLarge):
        oracles.tsp_held_karp([[0] * 17] * 17)


def _sym(draw_vals, n):
    d = [[0] * n for _ in range(n)]
    it = iter(draw_vals)
    for j in range(n):
        for k in range(j + 1, n):
            d[j][k] = d[k][j] = next(it)
    return d


@given(st.integers(3, 7).flatmap(lambda n: st.tuples(st.just(n), st.lists(st.integers(1, 20), min_size=n * (n - 1) // 2, max_size=n * (n - 1) // 2))))
def test_held_karp_matches_enumeration(case):
    n, vals = case
    d = _sym(vals, n)
    r = oracles.tsp_held_karp(d)
    lengths = oracles.hamiltonian_cycle_lengths(d)
    assert r.optimum == min(lengths)
    assert oracles.tour_length(d, r.witness) == r.optimum
    assert sorted(r.witness[:-1]) == list(range(n))
    assert r == oracles.tsp_held_karp(d)


def test_cycle_lengths_count():
    d = [[0, 5, 5, 5], [5, 0, 5, 5], [5, 5, 0, 5], [5, 5, 5, 0]]
    assert oracles.hamiltonian_cycle_lengths(d) == {20: 6}


def test_closed_walks_small():
    d = [[0, 1, 1], [1, 0, 1], [1, 1, 0]]
    walks = oracles.closed_walk_frequencies(d, (0, 1, 2), horizon=3)
    assert walks == {(2, 1): 1, (2, 2): 1, (3, 3): 2}
