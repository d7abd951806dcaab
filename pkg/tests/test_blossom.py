"""Blossom matcher against a DP oracle and its own dual certificate."""

import numpy as np
import pytest

from surfband.blossom import min_weight_perfect_matching, solve_with_certificate


def oracle_weight(W):
    """Minimum perfect-matching weight by bitmask DP."""
    n = W.shape[0]
    full = (1 << n) - 1
    INF = float("inf")
    dp = [INF] * (full + 1)
    dp[0] = 0
    for mask in range(full + 1):
        if dp[mask] is INF:
            continue
        try:
            u = next(i for i in range(n) if not mask >> i & 1)
        except StopIteration:
            continue
        for v in range(u + 1, n):
            if mask >> v & 1:
                continue
            m2 = mask | 1 << u | 1 << v
            cand = dp[mask] + W[u, v]
            if cand < dp[m2]:
                dp[m2] = cand
    return dp[full]


def total(W, mate):
    assert all(mate[mate[v]] == v and mate[v] != v for v in range(len(mate)))
    return sum(int(W[v, mate[v]]) for v in range(len(mate))) // 2


def random_weights(rng, n, hi=100):
    W = rng.integers(0, hi, size=(n, n))
    W = np.triu(W, 1)
    return (W + W.T).astype(np.int64)


def test_two_vertices():
    W = np.array([[0, 7], [7, 0]], dtype=np.int64)
    mate = min_weight_perfect_matching(W)
    assert list(mate) == [1, 0]


def test_square_prefers_cheap_pairing():
    W = np.array([[0, 1, 9, 9],
                  [1, 0, 9, 9],
                  [9, 9, 0, 1],
                  [9, 1, 1, 0]], dtype=np.int64)
    W = np.minimum(W, W.T)
    W = ((W + W.T) // 2).astype(np.int64)
    mate = min_weight_perfect_matching(W)
    assert total(W, mate) == oracle_weight(W)


def test_forced_blossom():
    # odd cycle 0-1-2 cheap, far vertex 3; optimum must break the triangle
    W = np.array([[0, 1, 1, 10],
                  [1, 0, 1, 50],
                  [1, 1, 0, 50],
                  [10, 50, 50, 0]], dtype=np.int64)
    mate = min_weight_perfect_matching(W)
    assert total(W, mate) == oracle_weight(W) == 11


def test_zero_vertices():
    mate = min_weight_perfect_matching(np.zeros((0, 0), dtype=np.int64))
    assert len(mate) == 0


def test_odd_count_raises():
    with pytest.raises(ValueError):
        min_weight_perfect_matching(np.zeros((3, 3), dtype=np.int64))


def test_asymmetric_raises():
    W = np.array([[0, 1], [2, 0]], dtype=np.int64)
    with pytest.raises(ValueError):
        min_weight_perfect_matching(W)


@pytest.mark.parametrize("n", [4, 6, 8, 10, 12])
def test_matches_oracle(n):
    rng = np.random.default_rng(n)
    for _ in range(25):
        W = random_weights(rng, n)
        mate = min_weight_perfect_matching(W)
        assert total(W, mate) == oracle_weight(W)


def test_equal_weights():
    for n in (4, 8):
        W = np.full((n, n), 5, dtype=np.int64)
        np.fill_diagonal(W, 0)
        mate = min_weight_perfect_matching(W)
        assert total(W, mate) == 5 * n // 2


def test_large_weights_no_overflow():
    rng = np.random.default_rng(99)
    W = random_weights(rng, 8, hi=10 ** 9)
    mate = min_weight_perfect_matching(W)
    assert total(W, mate) == oracle_weight(W)


def test_dual_certificate_proves_optimality():
    # LP duality for the transformed maximisation: for every matching M,
    # sum_{uv in M} W2[u,v] <= sum_v y2[v] + sum_B z2[B] * (|B|//2),
    # met with equality by the returned matching.
    rng = np.random.default_rng(7)
    for _ in range(20):
        n = int(rng.choice([4, 6, 8, 10]))
        W = random_weights(rng, n)
        mate, (W2, y2, blossoms) = solve_with_certificate(W)
        bound = int(y2.sum()) + sum(z * (len(mem) // 2) for mem, z in blossoms)
        val = sum(int(W2[v, mate[v]]) for v in range(n)) // 2
        assert val == bound
        # feasibility: every edge slack nonnegative
        for u in range(n):
            for v in range(u + 1, n):
                sl = int(y2[u]) + int(y2[v]) - int(W2[u, v])
                sl += sum(z for mem, z in blossoms if u in mem and v in mem)
                assert sl >= 0
