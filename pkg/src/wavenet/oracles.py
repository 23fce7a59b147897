"""Classical reference solvers used to check every wave-simulation result.

Nothing here touches the signal machinery: these are plain integer
algorithms (enumeration, dynamic programming, Held-Karp).
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from wavenet.errors import OracleTooLarge


class Method(str, enum.Enum):
    BRUTE_FORCE = "brute_force"
    DYNAMIC_PROGRAMMING = "dynamic_programming"
    HELD_KARP = "held_karp"
    SYMBOLIC_SPECTRUM = "symbolic_spectrum"


@dataclass(frozen=True)
class OracleResult:
    optimum: int
    witness: tuple[int, ...]
    method: Method


# ---------------------------------------------------------------------------
# number partitioning


def npp_bruteforce(weights: Sequence[int]) -> OracleResult:
    """Exhaustive min |s.w| over the 2^(N-1) sign vectors with s_0 = +1."""
    w = [int(x) for x in weights]
    n = len(w)
    if n > 26:
        raise OracleTooLarge(f"npp brute force limited to N <= 26, got {n}")
    if n == 0:
        return OracleResult(0, (), Method.BRUTE_FORCE)
    rest = np.asarray(w[1:], dtype=np.int64)
    best, best_mask = None, 0
    chunk = 1 << 20
    total = 1 << (n - 1)
    bits = np.arange(n - 1, dtype=np.int64)
    for lo in range(0, total, chunk):
        masks = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
        # bit j set means s_{j+1} = -1
        neg = (masks[:, None] >> bits) & 1
        sums = w[0] + ((1 - 2 * neg) * rest).sum(axis=1)
        d = np.abs(sums)
        i = int(np.argmin(d))
        if best is None or d[i] < best:
            best, best_mask = int(d[i]), int(masks[i])
    signs = (1,) + tuple(-1 if (best_mask >> j) & 1 else 1 for j in range(n - 1))
    assert abs(sum(s * x for s, x in zip(signs, w))) == best
    return OracleResult(best, signs, Method.BRUTE_FORCE)


def npp_spectrum_set(weights: Sequence[int]) -> set[int]:
    """Exact set {|s.w|} over all sign vectors, built as an iterated sumset."""
    if len(weights) > 22:
        raise OracleTooLarge(f"spectrum set limited to N <= 22, got {len(weights)}")
    sums = {0}
    for x in weights:
        sums = {s + x for s in sums} | {s - x for s in sums}
    return {abs(s) for s in sums}


# ---------------------------------------------------------------------------
# 0/1 knapsack


def kp_dp(weights: Sequence[int], values: Sequence[int], capacity: int) -> OracleResult:
    """O(N*W) dynamic program; witness is the lexicographically smallest optimal vector."""
    w = [int(x) for x in weights]
    v = [int(x) for x in values]
    n, cap = len(w), max(int(capacity), 0)
    if n * max(cap, 1) > 10**8:
        raise OracleTooLarge(f"knapsack DP limited to N*W <= 1e8, got {n * cap}")
    # best[j][c]: max value from items j..n-1 with capacity c
    best = [[0] * (cap + 1) for _ in range(n + 1)]
    for j in range(n - 1, -1, -1):
        nxt, row = best[j + 1], best[j]
        for c in range(cap + 1):
            row[c] = nxt[c]
            if w[j] <= c and nxt[c - w[j]] + v[j] > row[c]:
                row[c] = nxt[c - w[j]] + v[j]
    x, c = [], cap
    for j in range(n):
        if best[j][c] == best[j + 1][c]:
            x.append(0)
        else:
            x.append(1)
            c -= w[j]
    opt = best[0][cap]
    assert sum(a * b for a, b in zip(x, v)) == opt
    assert sum(a * b for a, b in zip(x, w)) <= cap
    return OracleResult(opt, tuple(x), Method.DYNAMIC_PROGRAMMING)


# ---------------------------------------------------------------------------
# travelling salesman


def tour_length(dist: Sequence[Sequence[int]], cycle: Sequence[int]) -> int:
    return sum(int(dist[a][b]) for a, b in zip(cycle, cycle[1:]))


def tsp_held_karp(dist: Sequence[Sequence[int]]) -> OracleResult:
    """Exact shortest Hamiltonian cycle from city 0.

    Runs the subset DP backwards (cost to finish from ``j`` having visited
    ``mask``) so the lexicographically smallest optimal tour can be read off
    greedily.
    """
    n = len(dist)
    if n > 16:
        raise OracleTooLarge(f"Held-Karp limited to N <= 16, got {n}")
    if n == 1:
        return OracleResult(0, (0, 0), Method.HELD_KARP)
    L = [[int(x) for x in row] for row in dist]
    full = (1 << n) - 1
    INF = float("inf")
    # finish[mask][j]: shortest path from j through all cities outside mask, back to 0
    finish: list[list[float]] = [[INF] * n for _ in range(1 << n)]
    for j in range(n):
        finish[full][j] = L[j][0]
    for mask in range(full - 1, 0, -1):
        if not mask & 1:
            continue
        todo = [k for k in range(n) if not (mask >> k) & 1]
        for j in range(n):
            if not (mask >> j) & 1:
                continue
            finish[mask][j] = min(L[j][k] + finish[mask | (1 << k)][k] for k in todo)
    opt = finish[1][0]
    tour, mask, cur = [0], 1, 0
    while mask != full:
        for k in range(n):
            if (mask >> k) & 1:
                continue
            if L[cur][k] + finish[mask | (1 << k)][k] == finish[mask][cur]:
                tour.append(k)
                mask |= 1 << k
                cur = k
                break
    tour.append(0)
    assert tour_length(L, tour) == opt
    return OracleResult(int(opt), tuple(tour), Method.HELD_KARP)


def hamiltonian_cycle_lengths(dist: Sequence[Sequence[int]]) -> dict[int, int]:
    """Length -> number of directed Hamiltonian cycles from city 0, by enumeration."""
    n = len(dist)
    if n > 10:
        raise OracleTooLarge(f"cycle enumeration limited to N <= 10, got {n}")
    counts: dict[int, int] = {}
    for perm in itertools.permutations(range(1, n)):
        d = tour_length(dist, (0, *perm, 0))
        counts[d] = counts.get(d, 0) + 1
    return counts


def closed_walk_frequencies(
    dist: Sequence[Sequence[int]], omegas: Sequence[int], horizon: int, cap: int | None = None
) -> dict[tuple[int, int], int]:
    """Count first-return walks 0 -> ... -> 0 by (length, frequency stamp).

    The stamp of a walk is ``omegas[0]`` plus ``omegas[j]`` for every visit to
    an intermediate city ``j``. Stamps above ``cap`` are dropped; since stamps
    only grow along a walk, counts at or below ``cap`` stay exact.
    """
    n = len(dist)
    done: dict[tuple[int, int], int] = {}
    by_len: dict[int, dict[tuple[int, int], int]] = {0: {(0, int(omegas[0])): 1}}
    for length in range(horizon + 1):
        layer = by_len.pop(length, {})
        for (node, freq), count in layer.items():
            for k in range(n):
                if k == node:
                    continue
                nl = length + int(dist[node][k])
                if nl > horizon:
                    continue
                if k == 0:
                    key = (nl, freq)
                    done[key] = done.get(key, 0) + count
                    continue
                nf = freq + int(omegas[k])
                if cap is not None and nf > cap:
                    continue
                bucket = by_len.setdefault(nl, {})
                bucket[(k, nf)] = bucket.get((k, nf), 0) + count
    return done
