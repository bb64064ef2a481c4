"""Exact expectations under the stationary measure at small N.

Moments of the centred slopes xi_bar = xi - 1/2 are computed along two
independent routes and cross-checked:

  (a) full enumeration of balanced words with the closed-form anchor-class
      weights (no truncation), accumulating exact signed integer counts
      per integral class;

  (b) the cardinality tables: signed inclusion-exclusion over the forced
      slope patterns at the marked sites, each pattern counted by the
      subset-sum dynamic programme.

Both routes produce the same per-class integers D_k, and the expectation is

    E[prod_i xi_bar(x_i)] = 4^{-m} (sum_k w(k) D_k) / Z,

so the dual-path agreement is exact at the integer level.  Restrictions to
fixed or one-sided integral values only change the class weights w(k),
again in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import HeightConfig, TestFunction, ValidationError, apply_flip
from .combinatorics import (subset_count_dp, slope_residue, residue_weights,
                            residue_weights_onesided)
from .dynamics import RateParams
from .measures import (ExactMeasure, ENUMERATION_CAP, balanced_word_codes,
                       word_integral_base, _site_bit)

__all__ = [
    "MomentQuery", "moment", "restricted_moment", "fluct_variance_exact",
    "dirichlet_identity", "two_point_function",
]

RESTRICTIONS = ("all", "Y=+1", "Y=-1", "Y>1", "Y<-1", "Y=0")


@dataclass(frozen=True)
class MomentQuery:
    N: int
    gamma: float
    sites: tuple = ()
    restriction: str = "all"

    def __post_init__(self):
        if self.N % 2 != 0 or self.N < 4:
            raise ValidationError(f"N must be even and >= 4, got {self.N}")
        if self.N > ENUMERATION_CAP:
            raise ValidationError(
                f"N={self.N} exceeds the enumeration cap {ENUMERATION_CAP}")
        if len(set(self.sites)) != len(self.sites):
            raise ValidationError(f"sites must be pairwise distinct: {self.sites}")
        if len(self.sites) > self.N:
            raise ValidationError("more sites than torus points")
        if self.restriction not in RESTRICTIONS:
            raise ValidationError(f"unknown restriction {self.restriction!r}")


# ---------------------------------------------------------------------------
# Signed class counts, two ways
# ---------------------------------------------------------------------------

@lru_cache(maxsize=8)
def _word_arrays(N: int):
    codes = balanced_word_codes(N)
    kclass = (word_integral_base(N, codes) % N).astype(np.int64)
    return codes, kclass


def _enum_signed_counts(N: int, sites: tuple) -> np.ndarray:
    """D_k = sum over class-k words of prod_i (2 xi(x_i) - 1), by enumeration."""
    codes, kclass = _word_arrays(N)
    prod = np.ones(codes.shape, dtype=np.int8)
    for x in sites:
        bit = np.uint32(_site_bit(N, x))
        prod *= (2 * ((codes >> bit) & np.uint32(1)).astype(np.int8) - 1)
    pos = np.bincount(kclass[prod > 0], minlength=N)
    neg = np.bincount(kclass[prod < 0], minlength=N)
    return pos - neg


def _dp_signed_counts(N: int, sites: tuple) -> np.ndarray:
    """Same D_k by inclusion-exclusion over the cardinality-table patterns."""
    n = N // 2
    positions = tuple(_site_bit(N, x) + 1 for x in sites)
    D = [0] * N
    for mask in range(1 << len(sites)):
        fin = tuple(p for i, p in enumerate(positions) if mask >> i & 1)
        fout = tuple(p for i, p in enumerate(positions) if not mask >> i & 1)
        sign = (-1) ** (len(sites) - len(fin))
        counts = subset_count_dp(N, n, n, fin, fout)
        for r in range(n):
            k = (n - 2 * r) % N
            D[k] += sign * counts[r]
    return np.array(D, dtype=object)


def _restriction_weights(N: int, gamma: float, restriction: str) -> np.ndarray:
    if restriction == "all":
        return residue_weights(N, gamma)
    tau = float(N) ** gamma
    w = np.zeros(N)
    if restriction == "Y=+1":
        w[1 % N] = math.exp(-1.0 / tau)
    elif restriction == "Y=-1":
        w[(N - 1) % N] = math.exp(-1.0 / tau)
    elif restriction == "Y=0":
        w[0] = 1.0
    elif restriction == "Y>1":
        w = residue_weights_onesided(N, gamma, 2)
    elif restriction == "Y<-1":
        ge = residue_weights_onesided(N, gamma, 2)
        w = ge[(-np.arange(N)) % N]
    return w


def _combine(N: int, gamma: float, D, restriction: str, m2: int) -> float:
    w = _restriction_weights(N, gamma, restriction)
    z = _partition_value(N, gamma)
    num = 0.0
    for k in range(N):
        dk = float(D[k])
        if dk != 0.0:
            num += w[k] * dk
    return 0.5 ** m2 * num / z


@lru_cache(maxsize=64)
def _partition_value(N: int, gamma: float) -> float:
    codes, kclass = _word_arrays(N)
    alpha = np.bincount(kclass, minlength=N)
    w = residue_weights(N, gamma)
    return float(alpha.astype(float) @ w)


# ---------------------------------------------------------------------------
# Public moment interface
# ---------------------------------------------------------------------------

def moment(q: MomentQuery) -> float:
    """E[prod_i xi_bar(x_i)] under the stationary measure, dual-path checked.

    The enumeration route and the cardinality route must agree to 1e-12
    relative (they agree exactly at the integer level; the float combination
    is shared), otherwise this raises.
    """
    if q.restriction != "all":
        raise ValidationError("moment() handles restriction='all'; "
                              "use restricted_moment otherwise")
    m2 = len(q.sites)
    d_enum = _enum_signed_counts(q.N, q.sites)
    d_dp = _dp_signed_counts(q.N, q.sites)
    v_enum = _combine(q.N, q.gamma, d_enum, "all", m2)
    v_dp = _combine(q.N, q.gamma, d_dp, "all", m2)
    rel = abs(v_enum - v_dp) / max(abs(v_enum), abs(v_dp), 1e-300)
    if v_enum != v_dp and rel > 1e-12:
        raise AssertionError(
            f"dual-path moment mismatch at {q}: {v_enum} vs {v_dp} (rel {rel})")
    return v_enum


def restricted_moment(q: MomentQuery) -> float:
    """E[1_restriction prod_i xi_bar(x_i)], restriction on the exact integral."""
    d_enum = _enum_signed_counts(q.N, q.sites)
    return _combine(q.N, q.gamma, d_enum, q.restriction, len(q.sites))


@lru_cache(maxsize=32)
def two_point_function(N: int, gamma: float) -> np.ndarray:
    """c[d] = E[xi_bar(0) xi_bar(d)] for d = 0..N-1 (c[0] = 1/4), exact."""
    c = np.empty(N)
    c[0] = 0.25
    for d in range(1, N):
        c[d] = moment(MomentQuery(N, gamma, (0, d)))
    return c


def fluct_variance_exact(N: int, gamma: float, phi: TestFunction) -> float:
    """Var of the centred field U(phi) assembled from exact 1- and 2-point data.

    Var U(phi) = (1/N) sum_x phi(x/N)^2 / 4
               + (1/N) sum_{x != y} E[xi_bar xi_bar](y-x) phi(x/N) phi(y/N);
    E[U(phi)] = 0 exactly, so this is also the second moment.
    """
    c = two_point_function(N, gamma)
    v = phi.values_on(N)
    out = c[0] * float(v @ v) / N
    for d in range(1, N):
        out += c[d] * float(v @ np.roll(v, -d)) / N
    return out


# ---------------------------------------------------------------------------
# Dirichlet form vs carre du champ
# ---------------------------------------------------------------------------

def dirichlet_identity(N: int, gamma: float, f) -> tuple[float, float]:
    """(Dirichlet form, carre du champ) of a slope-only f; they agree exactly.

    f maps a HeightConfig to a float and must not inspect the anchor: it is
    evaluated at two anchors per word and rejected if the values differ.
    With anchor-free f, both forms reduce to finite sums over slope words
    weighted by the sign-split anchor masses W+, W-, W0:

        D = -<L f, f>,    G = (1/2) sum_x Int q_{x,x+1} [f(h^x) - f(h)]^2,

    and D = G is the bilinear shadow of stationarity.
    """
    if N > 10:
        raise ValidationError("dirichlet_identity enumerates words; needs N <= 10")
    em = ExactMeasure(N, gamma)
    pars = RateParams(N, gamma)
    codes = em.codes
    idx_of = {int(c): i for i, c in enumerate(codes)}
    nwords = len(codes)

    configs = []
    fvals = np.empty(nwords)
    for i, code in enumerate(codes):
        bits = np.array([(int(code) >> b) & 1 for b in range(N)], dtype=np.int8)
        cfg = HeightConfig.from_slopes(0, bits)
        configs.append(cfg)
        fvals[i] = f(cfg)
        shifted = HeightConfig.from_slopes(1, bits)
        if f(shifted) != fvals[i]:
            raise ValidationError("f inspects the anchor; the identity needs "
                                  "slope-only functions")

    # flip adjacency: word index and corner kind per (word, corner site)
    wp, wm, w0 = em.sign_weights()
    weights = [(1, wp), (-1, wm), (0, w0)]
    dform = 0.0
    carre = 0.0
    for i, cfg in enumerate(configs):
        corners = [(x, "down") for x in cfg.maxima] + [(x, "up") for x in cfg.minima]
        for sgn, wvec in weights:
            wi = wvec[i]
            if wi == 0.0:
                continue
            pd, pu = pars.p_down(sgn), pars.p_up(sgn)
            lf = 0.0
            gsum = 0.0
            for x, kind in corners:
                nb = cfg.copy()
                apply_flip(nb, x)
                jdx = idx_of[_code_of(nb)]
                rate = pd if kind == "down" else pu
                diff = fvals[jdx] - fvals[i]
                lf += rate * diff
                gsum += rate * diff * diff
            dform += -wi * fvals[i] * lf
            carre += 0.5 * wi * gsum
    return dform / em.z, carre / em.z


def _code_of(cfg: HeightConfig) -> int:
    bits = cfg.slopes()
    return int(sum(int(b) << i for i, b in enumerate(bits)))
