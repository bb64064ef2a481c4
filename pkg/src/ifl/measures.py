"""Stationary measure machinery: exact small-N representations and samplers.

The stationary weight of a configuration is e^{-|Y|/N^gamma}.  Because the
weight depends on the slopes only through the residue class of Y mod N, the
infinite anchor sum for a fixed slope word collapses into two geometric
series, one per sign of Y:

    W_plus(b)  = e^{-y/ N^gamma} / (1 - e^{-N/N^gamma}),   y = Y0(b) mod N in (0, N)
    W_minus(b) = e^{-(N-y)/N^gamma} / (1 - e^{-N/N^gamma})

(plus a unit weight on Y = 0 when the parity allows it).  ExactMeasure
materialises every balanced word for N <= 26 together with these closed
forms, so expectations, marginals and the Y-law are exact up to float
rounding, with no anchor truncation.

Sampling the stationary measure is a two-stage exact procedure: first the
integral value j is drawn from its law alpha_{j mod N} e^{-|j|/N^gamma}/Z
(tail truncated below 1e-15 of the mass), then a slope word is drawn
uniformly from the residue class of j, either by sequential conditional
sampling from big-integer suffix counts (integer draws, no float bias) or,
for large N where that table would be bulky, by uniform-word rejection on
the class, which is exactly uniform as well.  The anchor is then the unique
integer putting the integral at j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import HeightConfig, ValidationError, apply_flip
from .combinatorics import (subset_count_dp, slope_residue, class_of_residue,
                            residue_weights)
from .dynamics import RateParams
from .rng import RngStream

__all__ = [
    "ExactMeasure", "exact_measure", "ProfileMeasureSpec",
    "balance_check", "sample_invariant", "sample_profile",
    "ENUMERATION_CAP",
]

ENUMERATION_CAP = 26

_DP_SAMPLER_CAP = 64  # suffix counts fit in exact uint64-range integer draws


# ---------------------------------------------------------------------------
# Enumeration of balanced words
# ---------------------------------------------------------------------------

def _site_bit(N: int, x: int) -> int:
    """Bit index (position-1) of torus site x in the slope word."""
    return (x - 1) % N


def balanced_word_codes(N: int) -> np.ndarray:
    """All C(N, N/2) balanced words as uint32 codes (bit i = position i+1)."""
    if N > 32:
        raise ValidationError(f"word enumeration needs N <= 32, got {N}")
    chunk = 1 << 22
    parts = []
    for start in range(0, 1 << N, chunk):
        v = np.arange(start, min(start + chunk, 1 << N), dtype=np.uint32)
        parts.append(v[np.bitwise_count(v) == N // 2])
    return np.concatenate(parts)


def word_integral_base(N: int, codes: np.ndarray) -> np.ndarray:
    """Y0 = anchor-zero height integral of each word: n(2n+1) - 2 sum(one positions)."""
    n = N // 2
    s = np.zeros(codes.shape, dtype=np.int64)
    for i in range(N):
        s += ((codes >> np.uint32(i)) & np.uint32(1)).astype(np.int64) * (i + 1)
    return n * (2 * n + 1) - 2 * s


class ExactMeasure:
    """Fully materialised stationary measure at small N.

    Arrays are aligned: codes[i] is a balanced word, y0[i] its anchor-zero
    integral, kclass[i] = y0 mod N its residue class.  w_class[k] carries the
    anchor-summed weight of class k, and z is the partition function.
    """

    def __init__(self, N: int, gamma: float):
        if N % 2 != 0 or N < 4:
            raise ValidationError(f"N must be even and >= 4, got {N}")
        if N > ENUMERATION_CAP:
            raise ValidationError(
                f"N={N} exceeds the enumeration cap {ENUMERATION_CAP}; "
                "use sample_invariant for larger N")
        if gamma <= 0:
            raise ValidationError(f"gamma must be positive, got {gamma}")
        self.N = N
        self.gamma = gamma
        self.tau = float(N) ** gamma
        self.codes = balanced_word_codes(N)
        self.y0 = word_integral_base(N, self.codes)
        self.kclass = (self.y0 % N).astype(np.int64)
        self.w_class = residue_weights(N, gamma)
        self.word_weight = self.w_class[self.kclass]
        self.z = float(self.word_weight.sum())
        self.alpha = np.bincount(self.kclass, minlength=N)

    # -- per-word sign-split weights ----------------------------------------

    def sign_weights(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(W_plus, W_minus, W_zero) per word, closed-form anchor sums."""
        N, tau = self.N, self.tau
        q = math.exp(-N / tau)
        k = self.kclass
        wp = np.where(k > 0, np.exp(-k.astype(float) / tau), q) / (1.0 - q)
        wm = np.where(k > 0, np.exp(-(N - k).astype(float) / tau), q) / (1.0 - q)
        w0 = np.where(k == 0, 1.0, 0.0)
        return wp, wm, w0

    # -- marginals and laws ---------------------------------------------------

    def site_mean(self, x: int) -> float:
        bit = _site_bit(self.N, x)
        occ = ((self.codes >> np.uint32(bit)) & np.uint32(1)).astype(float)
        return float(occ @ self.word_weight) / self.z

    def slope_expectation(self, values: np.ndarray) -> float:
        """E of a slope functional given as values aligned with codes."""
        return float(np.asarray(values, dtype=float) @ self.word_weight) / self.z

    def y_law(self, tail_mass: float = 1e-15) -> list:
        """[(j, P(Y=j))] over exact integral values, tails below tail_mass dropped."""
        out = []
        j = self._parity_start()
        while True:
            for jj in (j, -j) if j != 0 else (0,):
                pr = self.alpha[jj % self.N] * math.exp(-abs(jj) / self.tau) / self.z
                if pr > 0:
                    out.append((jj, pr))
            if self._tail_bound(j + 2) < tail_mass:
                break
            j += 2
        return sorted(out)

    def _parity_start(self) -> int:
        return 1 if (self.N // 2) % 2 == 1 else 0

    def _tail_bound(self, jmin: int) -> float:
        amax = int(self.alpha.max())
        return 2 * amax * math.exp(-jmin / self.tau) / (1 - math.exp(-2 / self.tau)) / self.z

    def probabilities(self) -> np.ndarray:
        """Slope-marginal probabilities aligned with codes."""
        return self.word_weight / self.z

    def export_summary(self) -> dict:
        return {"N": self.N, "gamma": self.gamma, "Z": self.z,
                "y_law": [[int(j), float(p)] for j, p in self.y_law()]}


def exact_measure(N: int, gamma: float) -> ExactMeasure:
    return ExactMeasure(N, gamma)


# ---------------------------------------------------------------------------
# Pointwise stationarity balance
# ---------------------------------------------------------------------------

def balance_check(N: int, gamma: float, config: HeightConfig, x: int) -> float:
    """Relative residual of the pointwise balance relation at the bond (x, x+1).

    For the active jump across the bond of h (particle hops off the richer
    site), the relation p(jump back at h^swap) mu(h^swap) = p(jump at h) mu(h)
    must hold exactly, with unnormalised weights e^{-|Y|/N^gamma}.  Bonds with
    equal occupations return exactly 0.
    """
    pars = RateParams(N, gamma)
    tau = float(N) ** gamma
    xp = (x + 1) % N
    if config.xi[x] == config.xi[xp]:
        return 0.0
    swapped = config.copy()
    apply_flip(swapped, x)
    w_h = math.exp(-abs(config.Y) / tau)
    w_s = math.exp(-abs(swapped.Y) / tau)
    if config.xi[x] == 1:  # particle at x jumps right at rate p_down(h)
        lhs = pars.p_up(swapped.sign()) * w_s
        rhs = pars.p_down(config.sign()) * w_h
    else:                  # particle at x+1 jumps left at rate p_up(h)
        lhs = pars.p_down(swapped.sign()) * w_s
        rhs = pars.p_up(config.sign()) * w_h
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)


# ---------------------------------------------------------------------------
# Exact stationary sampler
# ---------------------------------------------------------------------------

@lru_cache(maxsize=32)
def _class_counts(N: int) -> tuple:
    """alpha_k for k = 0..N-1 (exact big integers)."""
    n = N // 2
    by_res = subset_count_dp(N, n, n)
    alpha = [0] * N
    for r in range(n):
        alpha[class_of_residue(n, r)] = by_res[r]
    return tuple(alpha)


@lru_cache(maxsize=8)
def _suffix_counts(N: int) -> list:
    """T[i][c][r] = #ways to choose c one-positions in {i..N} with sum = r (mod n).

    Used by the sequential conditional sampler; only built for N <= 64 where
    every count fits comfortably in an exact integer draw.
    """
    n = N // 2
    T = [None] * (N + 2)
    T[N + 1] = [[0] * n for _ in range(n + 1)]
    T[N + 1][0][0] = 1
    for i in range(N, 0, -1):
        nxt = T[i + 1]
        cur = [row[:] for row in nxt]
        r0 = i % n
        for c in range(1, n + 1):
            prev = nxt[c - 1]
            rot = prev[-r0:] + prev[:-r0] if r0 else prev
            row = cur[c]
            cur[c] = [a + b for a, b in zip(row, rot)]
        T[i] = cur
    return T


def _draw_word_dp(N: int, r_target: int, gen: np.random.Generator) -> np.ndarray:
    """Uniform balanced word in residue class r_target via exact integer draws."""
    n = N // 2
    T = _suffix_counts(N)
    bits = np.zeros(N, dtype=np.int8)
    c, r = n, r_target
    for i in range(1, N + 1):
        n1 = T[i + 1][c - 1][(r - i) % n] if c >= 1 else 0
        n0 = T[i + 1][c][r]
        total = n0 + n1
        pick_one = int(gen.integers(total)) < n1
        if pick_one:
            bits[i - 1] = 1
            c -= 1
            r = (r - i) % n
    return bits


def _draw_word_rejection(N: int, r_target: int, gen: np.random.Generator) -> np.ndarray:
    """Uniform balanced word conditioned on its class, by exact rejection."""
    n = N // 2
    while True:
        bits = np.zeros(N, dtype=np.int8)
        bits[gen.choice(N, n, replace=False)] = 1
        s = int((np.nonzero(bits)[0] + 1).sum())  # one-positions are 1-indexed
        if s % n == r_target:
            return bits


def _integral_law(N: int, gamma: float, tail: float = 1e-15):
    """Support and probabilities of the integral value under the measure."""
    tau = float(N) ** gamma
    alpha = _class_counts(N)
    parity = (N // 2) % 2
    amax = max(alpha)
    zs, js = [], []
    j = parity if parity == 1 else 0
    total_guess = sum(float(a) * w for a, w in zip(alpha, residue_weights(N, gamma)))
    while True:
        for jj in ((j, -j) if j != 0 else (0,)):
            wgt = float(alpha[jj % N]) * math.exp(-abs(jj) / tau)
            if wgt > 0.0:
                js.append(jj)
                zs.append(wgt)
        tail_bound = 2 * amax * math.exp(-(j + 2) / tau) / (1 - math.exp(-2 / tau))
        if tail_bound < tail * total_guess:
            break
        j += 2
    order = np.argsort(js)
    js = np.asarray(js, dtype=np.int64)[order]
    ps = np.asarray(zs, dtype=float)[order]
    return js, ps / ps.sum()


def sample_invariant(N: int, gamma: float, rng: RngStream | np.random.Generator) -> HeightConfig:
    """Exact draw from the stationary measure.

    Stage 1 draws the integral value j from alpha_{j mod N} e^{-|j|/N^gamma};
    stage 2 draws a uniform word in j's residue class; stage 3 sets the
    anchor to (j - Y0)/N, which is integral by construction.
    """
    if gamma <= 0:
        raise ValidationError(f"gamma must be positive, got {gamma}")
    if N % 2 != 0 or N < 4:
        raise ValidationError(f"N must be even and >= 4, got {N}")
    gen = rng.numpy_gen() if isinstance(rng, RngStream) else rng
    js, ps = _integral_law(N, gamma)
    idx = min(int(np.searchsorted(np.cumsum(ps), gen.random(), side="right")), len(js) - 1)
    j = int(js[idx])
    n = N // 2
    r = slope_residue(n, j % N)
    if N <= _DP_SAMPLER_CAP:
        bits = _draw_word_dp(N, r, gen)
    else:
        bits = _draw_word_rejection(N, r, gen)
    anchor = (j - _word_integral_base(bits)) // N
    cfg = HeightConfig.from_slopes(anchor, bits)
    assert cfg.Y == j
    return cfg


def _word_integral_base(bits: np.ndarray) -> int:
    N = len(bits)
    n = N // 2
    s = int((np.nonzero(bits)[0] + 1).sum())
    return n * (2 * n + 1) - 2 * s


# ---------------------------------------------------------------------------
# Initial profile measures
# ---------------------------------------------------------------------------

@dataclass
class ProfileMeasureSpec:
    """Slope-Bernoulli profile conditioned on balance, with geometric anchor.

    rho0 is a density profile on [0,1) with integral 1/2 (checked by
    periodic midpoint quadrature to 1e-9); h00 is the target for the scaled
    anchor h(0)/N.
    """
    rho0: object            # callable u -> density in [0, 1]
    h00: float
    N: int
    _quad_points: int = 1 << 14

    def site_probs(self) -> np.ndarray:
        p = np.asarray(self.rho0(np.arange(self.N) / self.N), dtype=float)
        if (p < 0).any() or (p > 1).any():
            raise ValidationError("rho0 must take values in [0, 1]")
        return p

    def validate(self):
        u = (np.arange(self._quad_points) + 0.5) / self._quad_points
        mass = float(np.mean(np.asarray(self.rho0(u), dtype=float)))
        if abs(mass - 0.5) > 1e-9:
            raise ValidationError(
                f"rho0 must integrate to 1/2 (got {mass}); balanced words need it")


REJECTION_CAP = 10_000


def sample_profile(spec: ProfileMeasureSpec, rng: RngStream | np.random.Generator) -> HeightConfig:
    """Draw from the profile measure: conditioned Bernoulli slopes, geometric anchor."""
    spec.validate()
    gen = rng.numpy_gen() if isinstance(rng, RngStream) else rng
    N = spec.N
    probs = spec.site_probs()
    half = N // 2
    xi = None
    for _ in range(REJECTION_CAP):
        draw = (gen.random(N) < probs).astype(np.int8)
        if int(draw.sum()) == half:
            xi = draw
            break
    if xi is None:
        xi = _conditioned_bernoulli(probs, half, gen)
    # two-sided geometric anchor around N * h00
    center = N * spec.h00
    lo = math.floor(center) - 45
    js = np.arange(lo, math.ceil(center) + 46)
    wts = np.exp(-np.abs(js - center))
    cdf = np.cumsum(wts / wts.sum())
    anchor = int(js[min(np.searchsorted(cdf, gen.random(), side="right"), len(js) - 1)])
    return HeightConfig(anchor, xi)


def _conditioned_bernoulli(probs: np.ndarray, half: int, gen: np.random.Generator) -> np.ndarray:
    """Sequential exact draw of Bernoulli(probs) conditioned on sum == half.

    F[i][c] = P(remaining sites i..N-1 contribute c ones) via the
    Poisson-binomial recursion; the conditional bit law follows.
    """
    N = len(probs)
    F = np.zeros((N + 1, half + 2))
    F[N, 0] = 1.0
    for i in range(N - 1, -1, -1):
        F[i, : half + 1] = F[i + 1, : half + 1] * (1 - probs[i])
        F[i, 1: half + 2] += F[i + 1, : half + 1] * probs[i]
    if F[0, half] <= 0:
        raise ValidationError("profile cannot produce a balanced word")
    xi = np.zeros(N, dtype=np.int8)
    c = half
    for i in range(N):
        p1 = probs[i] * F[i + 1, c - 1] if c >= 1 else 0.0
        p0 = (1 - probs[i]) * F[i + 1, c]
        if gen.random() * (p0 + p1) < p1:
            xi[i] = 1
            c -= 1
    return xi
