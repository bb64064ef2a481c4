import math
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

from ifl.combinatorics import (subset_count_dp, slope_residue, class_of_residue,
                               alpha_table, beta_table, gamma4_table,
                               brute_force_table, partition_function,
                               binom_identity, residue_weights,
                               residue_weights_onesided, is_prime)
from ifl.core import HeightConfig


def test_subset_count_example():
    assert subset_count_dp(6, 3, 3) == [8, 6, 6]
    # a_0 - 2 = a_1 = a_2 pattern for p = 3
    c = subset_count_dp(6, 3, 3)
    assert c[0] - 2 == c[1] == c[2]
    assert subset_count_dp(4, 4, 5) == [1, 0, 0, 0, 0]


def test_subset_count_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(10):
        n = int(rng.integers(4, 10))
        size = int(rng.integers(0, n + 1))
        m = int(rng.integers(2, 7))
        fin = tuple(rng.choice(np.arange(1, n + 1), rng.integers(0, 3), replace=False))
        rest = [x for x in range(1, n + 1) if x not in fin]
        fout = tuple(rng.choice(rest, rng.integers(0, 2), replace=False)) if rest else ()
        got = subset_count_dp(n, size, m, fin, fout)
        want = [0] * m
        for sub in combinations(range(1, n + 1), size):
            ss = set(sub)
            if set(fin) <= ss and not (set(fout) & ss):
                want[sum(sub) % m] += 1
        assert got == want


def test_subset_count_validation():
    with pytest.raises(ValueError, match="overlap"):
        subset_count_dp(6, 3, 3, (1,), (1,))
    with pytest.raises(ValueError):
        subset_count_dp(6, 3, 3, (9,), ())
    with pytest.raises(ValueError):
        subset_count_dp(6, 8, 3)


def test_residue_mapping_round_trip():
    for n in (3, 5, 7, 9):
        ks = [class_of_residue(n, r) for r in range(n)]
        assert sorted(ks) == list(range(1, 2 * n, 2)) if n % 2 == 1 else True
        for r in range(n):
            assert slope_residue(n, class_of_residue(n, r)) == r


def test_residue_matches_height_integral():
    # the centralized mapping agrees with directly built configurations
    for N in (6, 10):
        n = N // 2
        for ones in combinations(range(1, N + 1), n):
            bits = np.zeros(N, dtype=np.int8)
            for i in ones:
                bits[i - 1] = 1
            k = HeightConfig.from_slopes(0, bits).Y % N
            assert slope_residue(n, k) == sum(ones) % n


def test_alpha_table_p3():
    t = alpha_table(3)
    assert t.counts[(1, None)] == 6
    assert t.counts[(3, None)] == 8
    assert t.counts[(5, None)] == 6


def test_alpha_brute_force_and_symmetry():
    for p in (3, 5, 7):
        tab = alpha_table(p)
        bf = brute_force_table(p)
        for k in tab.classes():
            assert tab.counts[(k, None)] == bf[k]
            assert tab.counts[(k, None)] == tab.counts[((2 * p - k) % (2 * p), None)]
        assert sum(bf.values()) == math.comb(2 * p, p)


def test_alpha_bounds_primes():
    for p in (3, 5, 7, 11, 13, 17, 19):
        tab = alpha_table(p)
        assert all(ok for *_, ok in tab.check_bounds()), p
        assert tab.max_deviation() <= 2


def test_beta_gamma_row_sums_and_bounds():
    for p in (3, 5):
        bt = beta_table(p, 1, 2)
        for j in range(3):
            assert sum(bt.counts[(k, j)] for k in bt.classes()) == math.comb(2 * p - 2, p - j)
        assert all(ok for *_, ok in bt.check_bounds())
    gt = gamma4_table(5, 1, 2, 3, 4)
    for j in range(5):
        assert sum(gt.counts[(k, j)] for k in gt.classes()) == math.comb(6, 5 - j)
    assert all(ok for *_, ok in gt.check_bounds())
    assert gt.max_deviation() <= 125


def test_beta_gamma_brute_force():
    for p, sites in [(3, (1, 2)), (5, (2, 7)), (7, (1, 9))]:
        bt = beta_table(p, *sites)
        for j, pattern in [(0, (0, 0)), (1, (1, 0)), (2, (1, 1))]:
            bf = brute_force_table(p, sites, pattern)
            assert all(bf[k] == bt.counts[(k, j)] for k in bt.classes()), (p, j)
    gt = gamma4_table(5, 1, 4, 6, 9)
    for j in range(5):
        pattern = tuple(1 if i < j else 0 for i in range(4))
        bf = brute_force_table(5, (1, 4, 6, 9), pattern)
        assert all(bf[k] == gt.counts[(k, j)] for k in gt.classes()), j


def test_duplicate_sites_rejected():
    with pytest.raises(ValueError, match="distinct"):
        beta_table(5, 3, 3)
    with pytest.raises(ValueError, match="distinct"):
        gamma4_table(5, 1, 2, 3, 3)


def test_residue_weights_closed_form():
    N, gamma = 10, 1.2
    tau = N ** gamma
    w = residue_weights(N, gamma)
    for k in range(N):
        brute = sum(math.exp(-abs(k + a * N) / tau) for a in range(-500, 501))
        assert w[k] == pytest.approx(brute, rel=1e-13)
    w3 = residue_weights_onesided(N, gamma, 3)
    for k in range(N):
        brute = sum(math.exp(-j / tau) for j in range(3, 4000) if j % N == k)
        assert w3[k] == pytest.approx(brute, rel=1e-13)


def test_partition_function_oracle():
    # brute force over words x truncated anchor window
    for p, gamma in [(3, 1.0), (5, 0.9)]:
        N = 2 * p
        tau = N ** gamma
        z = 0.0
        for ones in combinations(range(1, N + 1), p):
            y0 = p * (2 * p + 1) - 2 * sum(ones)
            for a in range(-400, 401):
                z += math.exp(-abs(y0 + a * N) / tau)
        pd = partition_function(N, gamma)
        assert pd.z == pytest.approx(z, rel=1e-12)
        assert pd.log_z == pytest.approx(math.log(z), rel=1e-12)


def test_partition_normalized_sequence():
    vals = {}
    for p in (3, 5, 7, 11, 13, 101):
        vals[p] = partition_function(2 * p, 1.0).normalized
    assert abs(vals[101] - 1) <= 0.05
    devs = [abs(vals[p] - 1) for p in (7, 11, 13, 101)]
    assert all(b <= a for a, b in zip(devs, devs[1:]))
    # inverse-z bound, gamma = 1
    for p in (13, 17, 101):
        pd = partition_function(2 * p, 1.0)
        assert 1.0 / pd.z <= 2.0 / math.comb(2 * p, p)


def test_binom_identity():
    lhs, rhs = binom_identity(2, 1)
    assert lhs == rhs == Fraction(-1, 3)
    for NN in (1, 5, 17, 30):
        lhs, rhs = binom_identity(NN, NN)
        assert lhs == rhs == Fraction((-1) ** NN)
    for NN in range(1, 31):
        for m in range(1, NN + 1):
            lhs, rhs = binom_identity(NN, m)
            assert lhs == rhs
    with pytest.raises(ValueError):
        binom_identity(5, 6)


def test_is_prime():
    assert [q for q in range(2, 20) if is_prime(q)] == [2, 3, 5, 7, 11, 13, 17, 19]
