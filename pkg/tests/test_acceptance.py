"""Acceptance suite: one test per criterion, at the stated tolerances.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one pass/fail line
per criterion.  The statistical criteria (12, 13, 14) run the full-size
experiments and take a few minutes combined.
"""

import math
import time
from itertools import combinations

import numpy as np
import pytest

from ifl.core import HeightConfig, TestFunction
from ifl.combinatorics import (alpha_table, beta_table, gamma4_table,
                               brute_force_table, binom_identity,
                               partition_function, is_prime)
from ifl.harness import (ExperimentConfig, run_hydro, run_fluct,
                         run_martingale_report, run_sample_check)
from ifl.measures import balance_check, exact_measure
from ifl.oracle import (MomentQuery, moment, restricted_moment,
                        fluct_variance_exact, dirichlet_identity,
                        two_point_function, _enum_signed_counts,
                        _dp_signed_counts)
from ifl.pde import solve_coupled, heat_reference

SEED = 20240801
_lines = []


def report(num, desc, ok, detail=""):
    line = f"ACCEPTANCE {num:>2}: {desc:<58} {'PASS' if ok else 'FAIL'}  {detail}"
    _lines.append(line)
    print("\n" + line)
    assert ok, line


def all_balanced_words(N):
    for ones in combinations(range(N), N // 2):
        bits = np.zeros(N, dtype=np.int8)
        bits[list(ones)] = 1
        yield bits


# -- 1: pointwise stationarity balance --------------------------------------

def test_c01_stationarity_balance():
    t0 = time.time()
    worst = 0.0
    for N in (6, 10):
        for gamma in (0.9, 1.0, 1.5):
            tau = float(N) ** gamma
            C = math.comb(N, N // 2)
            z = partition_function(N, gamma).z
            q2 = 1 - math.exp(-2 / tau)
            # anchor window: total mass outside |Y| <= J below 1e-12 of Z
            J = int(math.ceil(tau * math.log(2 * C / (q2 * 1e-12 * z)))) + 1
            for bits in all_balanced_words(N):
                y0 = HeightConfig.from_slopes(0, bits).Y
                a_lo = int(math.floor((-J - y0) / N))
                a_hi = int(math.ceil((J - y0) / N))
                for a in range(a_lo, a_hi + 1):
                    cfg = HeightConfig.from_slopes(a, bits)
                    if abs(cfg.Y) > J:
                        continue
                    for x in range(N):
                        worst = max(worst, balance_check(N, gamma, cfg, x))
    elapsed = time.time() - t0
    report(1, "stationarity balance (N=6,10; gamma=0.9,1,1.5)",
           worst <= 1e-12 and elapsed < 60,
           f"max rel residual {worst:.2e}, {elapsed:.1f}s")


# -- 2: Dirichlet form = carre du champ --------------------------------------

def test_c02_dirichlet_identity():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(20):
        table = {}

        def f(cfg, table=table, rng=rng):
            key = tuple(cfg.xi)
            if key not in table:
                table[key] = float(rng.choice([-1.0, 1.0]))
            return table[key]

        D, G = dirichlet_identity(6, 1.0, f)
        worst = max(worst, abs(D - G) / max(abs(D), 1e-30))
    report(2, "Dirichlet identity (N=6, 20 random slope functions)",
           worst <= 1e-10, f"max rel gap {worst:.2e}")


# -- 3: alpha-count uniformity ------------------------------------------------

def test_c03_alpha_counts():
    t0 = time.time()
    ok = True
    for p in (3, 5, 7, 11, 13, 17, 19):
        tab = alpha_table(p)
        ok = ok and all(passed for *_, passed in tab.check_bounds())
        if p <= 7:
            bf = brute_force_table(p)
            ok = ok and all(bf[k] == tab.counts[(k, None)] for k in tab.classes())
    elapsed = time.time() - t0
    report(3, "alpha-count bounds p<=19 + brute force p<=7",
           ok and elapsed < 10, f"{elapsed:.1f}s")


# -- 4: pair/quadruple count bounds ------------------------------------------

def test_c04_beta_gamma_counts():
    ok = True
    for p in (3, 5, 7, 11, 13):
        n = 2 * p
        pair_tuples = [(1, 2), (1, p + 1), (2, n - 1)]
        quad_tuples = [(1, 2, 3, 4), (1, 3, 5, min(7, n)), (2, 4, n - 1, n)]
        for sites in pair_tuples:
            bt = beta_table(p, *sites)
            ok = ok and all(passed for *_, passed in bt.check_bounds())
            if p <= 7:
                for j in range(3):
                    pat = tuple(1 if i < j else 0 for i in range(2))
                    bf = brute_force_table(p, sites, pat)
                    ok = ok and all(bf[k] == bt.counts[(k, j)] for k in bt.classes())
        for sites in quad_tuples:
            if len(set(sites)) < 4:
                continue
            gt = gamma4_table(p, *sites)
            ok = ok and all(passed for *_, passed in gt.check_bounds())
            if p <= 7:
                for j in range(5):
                    pat = tuple(1 if i < j else 0 for i in range(4))
                    bf = brute_force_table(p, sites, pat)
                    ok = ok and all(bf[k] == gt.counts[(k, j)] for k in gt.classes())
    report(4, "pair/quadruple count bounds p<=13 + brute force p<=7", ok)


# -- 5: binomial identity -----------------------------------------------------

def test_c05_binomial_identity():
    ok = all(binom_identity(N, m)[0] == binom_identity(N, m)[1]
             for N in range(1, 31) for m in range(1, N + 1))
    report(5, "alternating binomial identity, 1<=m<=N<=30 exact", ok)


# -- 6: partition-function normalisation --------------------------------------

def test_c06_partition_normalisation():
    primes = [q for q in range(3, 102) if is_prime(q)]
    vals = {q: partition_function(2 * q, 1.0) for q in primes}
    devs = [abs(vals[q].normalized - 1.0) for q in primes]
    i7 = primes.index(7)
    mono = all(b <= a + 1e-15 for a, b in zip(devs[i7:], devs[i7 + 1:]))
    final = devs[-1] <= 0.05
    zbound = all(1.0 / vals[q].z <= 2.0 / math.comb(2 * q, q)
                 for q in primes if q >= 13)
    report(6, "partition normalisation -> 1 over primes to 101",
           mono and final and zbound,
           f"|v-1| at 101: {devs[-1]:.2e}, monotone beyond 7: {mono}")


# -- 7: two-point limit -------------------------------------------------------

def test_c07_two_point_limit():
    devs = []
    dual_ok = True
    for p in (5, 7, 11, 13):
        N = 2 * p
        c = two_point_function(N, 1.0)   # moment() cross-checks both routes
        devs.append(float(np.abs(N * c[1:] + 0.25).max()))
        for d in (1, N // 2):
            de = _enum_signed_counts(N, (0, d))
            dd = _dp_signed_counts(N, (0, d))
            dual_ok = dual_ok and [int(v) for v in de] == [int(v) for v in dd]
    mono = all(b <= a for a, b in zip(devs, devs[1:]))
    report(7, "N E[xx] -> -1/4 (p=5..13, all distances)",
           mono and devs[-1] <= 0.05 and dual_ok,
           f"max dev at p=13: {devs[-1]:.4f}")


# -- 8: scaled-moment boundedness ----------------------------------------------

def test_c08_scaled_moment_bounds():
    gamma = 1.0
    ok = True
    details = []
    for m, sites in ((1, (0, 1)), (2, (0, 1, 2, 3))):
        for restriction, power in (("all", m), ("Y=+1", m + gamma),
                                   ("Y=-1", m + gamma), ("Y>1", m), ("Y<-1", m)):
            vals = []
            for p in (5, 7, 11, 13):
                N = 2 * p
                q = MomentQuery(N, gamma, sites, restriction)
                v = moment(q) if restriction == "all" else restricted_moment(q)
                vals.append(abs(v) * N ** power)
            good = vals[-1] <= 1.2 * max(vals[:-1])
            ok = ok and good
            details.append(f"m={m},{restriction}:{vals[-1]:.3f}")
    report(8, "scaled restricted moments bounded over p=5..13", ok)


# -- 9: exact fluctuation variance ---------------------------------------------

def test_c09_fluct_variance():
    ok = True
    worst = 0.0
    for N in (6, 10, 14, 18, 22, 26):
        for phase in ("cos", "sin"):
            phi = TestFunction.fourier(1, phase, math.sqrt(2))
            v = fluct_variance_exact(N, 1.0, phi)
            vals = phi.values_on(N)
            theory = 0.25 * (float(np.mean(vals ** 2)) - float(np.mean(vals)) ** 2)
            dev = abs(v - theory)
            worst = max(worst, dev * N / 3)
            ok = ok and dev <= 3.0 / N
    const0 = abs(fluct_variance_exact(10, 1.0, TestFunction.constant(1.0)))
    ok = ok and const0 <= 1e-13
    report(9, "exact Var(U(phi)) vs quarter-variance (N<=26)",
           ok, f"worst dev/(3/N) = {worst:.3f}, const -> {const0:.1e}")


# -- 10: sampler correctness -----------------------------------------------------

def test_c10_sampler_correctness():
    cfg = ExperimentConfig(kind="sample", out_dir="out/acceptance", seed=SEED,
                           workers=2)
    cfg.options = {"sample.N": "10", "sample.gamma": "1", "sample.draws": "100000",
                   "sample.burnin_replicas": "10000", "sample.burnin_T": "5"}
    s = run_sample_check(cfg)
    report(10, "exact sampler chi-square + dynamics-equilibrated agreement",
           s["pass"],
           f"p-values {s['chi2_pvalue_exact_sampler']:.3f}/"
           f"{s['chi2_pvalue_dynamics']:.3f}")


# -- 11: PDE solver -----------------------------------------------------------

def test_c11_pde():
    M = 256
    tr = solve_coupled(np.full(M, 0.5), 1.0, 2.2, M,
                       time_grid=np.linspace(0, 2.2, 45))
    a_ok = (np.abs(tr.Y - np.maximum(1 - tr.times / 2, 0)).max() <= 1e-6
            and abs(tr.tau0 - 2.0) <= 1e-4)
    errs = {}
    for MM in (128, 256, 512):
        u = np.arange(MM) / MM
        t2 = solve_coupled(0.5 + 0.3 * np.cos(2 * np.pi * u), 0.0, 0.1, MM,
                           time_grid=np.array([0.0, 0.1]))
        exact = heat_reference([(0, 0.5, 0), (1, 0.3, 0)], 0.1, MM)
        errs[MM] = float(np.sqrt(np.mean((t2.rho[-1] - exact) ** 2)))
    b_ok = (3.2 <= errs[128] / errs[256] <= 4.8
            and 3.2 <= errs[256] / errs[512] <= 4.8)
    u = np.arange(M) / M
    t3 = solve_coupled(0.5 + 0.3 * np.cos(2 * np.pi * u), 0.5, 1.0, M,
                       time_grid=np.linspace(0, 1, 11))
    mass = t3.rho.mean(axis=1)
    c_ok = np.abs(mass - mass[0]).max() <= 1e-10
    report(11, "PDE: linear Y + tau0, 2nd-order heat, mass conservation",
           a_ok and b_ok and c_ok,
           f"|tau0-2|={abs(tr.tau0-2):.1e}, ratios {errs[128]/errs[256]:.2f}/"
           f"{errs[256]/errs[512]:.2f}, drift {np.abs(mass-mass[0]).max():.1e}")


# -- 12: hydrodynamic limit ------------------------------------------------------

def test_c12_hydrodynamic_limit():
    cfg = ExperimentConfig(kind="hydro", out_dir="out/acceptance", seed=SEED,
                           workers=2)
    s = run_hydro(cfg)
    ok = s["pass"] and s["max_err_largest_N"] <= 0.05
    report(12, "hydrodynamic limit: error decay over N=126,250,502",
           ok, f"max err at N=502: {s['max_err_largest_N']:.4f}")


# -- 13: equilibrium fluctuations -------------------------------------------------

def test_c13_equilibrium_fluctuations():
    cfg = ExperimentConfig(kind="fluct", out_dir="out/acceptance", seed=SEED,
                           workers=2)
    s = run_fluct(cfg)
    stats = {r["name"].split("[")[0]: r for r in s["stats"]}
    det = (f"Var(U)={stats['var_U']['value']:.4f}, "
           f"QV={stats['mean_QV']['value']:.3f} vs {stats['mean_QV']['theory']:.3f}")
    report(13, "equilibrium fluctuations at N=202 (200 replicas)",
           s["pass"], det)


# -- 14: integral-process martingale ----------------------------------------------

def test_c14_integral_martingale():
    cfg = ExperimentConfig(kind="mart", out_dir="out/acceptance", seed=SEED,
                           workers=2)
    s = run_martingale_report(cfg)
    stats = {r["name"]: r for r in s["stats"]}
    vx = stats["var_X_vs_meanQVX"]
    mx = stats["mean_X"]
    ok = vx["pass"] and mx["pass"]
    report(14, "integral-process martingale at N=102 (200 replicas)",
           ok, f"Var(X)={vx['value']:.5f} vs QV {vx['theory']:.5f}")


def test_zz_summary():
    print("\n" + "=" * 100)
    for line in _lines:
        print(line)
    print("=" * 100)
