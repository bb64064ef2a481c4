"""Exact counting of balanced slope words by integral residue class.

A balanced word of length N = 2n is a 0/1 sequence with exactly n ones,
indexed by positions 1..N (position i is the slope of the edge [i-1, i)).
With anchor h(0) = a the height integral is

    Y(a, b) = a N + n(2n+1) - 2 S(b),     S(b) = sum of the one-positions,

so Y mod N is determined by the word alone and the odd residue classes
k in {1, 3, ..., N-1} (for n odd) partition the words.  Counting words in a
class therefore reduces to counting n-element subsets of {1..N} by their
element-sum modulo n, which the rolling dynamic programme below does with
exact big integers (counts reach ~1e59 at n = 101).

The closed-form class weights

    w(k) = sum_{j = k mod N} e^{-|j|/N^gamma}

collapse the infinite anchor sum into two geometric series split at the
sign change of Y, which removes all truncation error from the partition
function and from the exact expectations built on these tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

__all__ = [
    "subset_count_dp", "slope_residue", "class_of_residue", "is_prime",
    "CardinalityTable", "alpha_table", "beta_table", "gamma4_table",
    "brute_force_table", "residue_weights", "residue_weights_onesided",
    "PartitionData", "partition_function", "binom_identity",
]


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


# ---------------------------------------------------------------------------
# Residue bookkeeping (the likeliest bug site, so it lives in one place)
# ---------------------------------------------------------------------------

def slope_residue(n: int, k: int) -> int:
    """Subset-sum residue r (mod n) of the integral class Y = k (mod 2n).

    From Y = aN + n(2n+1) - 2S:  k = n - 2S (mod 2n), i.e. S = (n-k)/2 (mod n).
    Requires k = n (mod 2), which is the parity every height integral has.
    """
    if (n - k) % 2 != 0:
        raise ValueError(f"class {k} has impossible parity for n={n}")
    return ((n - k) // 2) % n


def class_of_residue(n: int, r: int) -> int:
    """Inverse of slope_residue: the class k in {0..2n-1} with k = n (mod 2)."""
    return (n - 2 * r) % (2 * n)


# ---------------------------------------------------------------------------
# Subset-sum dynamic programme
# ---------------------------------------------------------------------------

def subset_count_dp(n: int, size: int, modulus: int,
                    fixed_in=(), fixed_out=()) -> list:
    """Exact counts of size-element subsets of {1..n} by element-sum mod modulus.

    ``fixed_in`` positions are forced into the subset, ``fixed_out`` ones are
    excluded.  Returns a list c with c[r] = #{subsets : sum = r (mod modulus)},
    as Python big integers.
    """
    fixed_in = set(int(x) for x in fixed_in)
    fixed_out = set(int(x) for x in fixed_out)
    if fixed_in & fixed_out:
        raise ValueError(f"fixed sets overlap: {sorted(fixed_in & fixed_out)}")
    for x in fixed_in | fixed_out:
        if not 1 <= x <= n:
            raise ValueError(f"fixed position {x} outside 1..{n}")
    if not 0 <= size <= n:
        raise ValueError(f"subset size {size} outside 0..{n}")
    m = int(modulus)
    if m < 1:
        raise ValueError("modulus must be >= 1")
    need = size - len(fixed_in)
    if need < 0:
        return [0] * m
    free = [x for x in range(1, n + 1) if x not in fixed_in and x not in fixed_out]
    if need > len(free):
        return [0] * m
    base = sum(fixed_in) % m
    # dp[c][r] = ways to pick c free positions with sum = r (mod m)
    dp = [[0] * m for _ in range(need + 1)]
    dp[0][0] = 1
    placed = 0
    for pos in free:
        r0 = pos % m
        top = min(placed + 1, need)
        for c in range(top, 0, -1):
            prev = dp[c - 1]
            rot = prev[-r0:] + prev[:-r0] if r0 else prev
            row = dp[c]
            dp[c] = [a + b for a, b in zip(row, rot)]
        placed += 1
    out = dp[need]
    if base:
        out = out[-base:] + out[:-base]
    return out


# ---------------------------------------------------------------------------
# Cardinality tables
# ---------------------------------------------------------------------------

@dataclass
class CardinalityTable:
    """Counts of balanced words by odd integral class, optionally with
    fixed slope values at distinguished positions.

    counts[(k, j)] with k in {1, 3, ..., 2p-1}; j is None for the plain
    table, the number of forced ones for the site-constrained tables.
    """
    p: int
    kind: str                       # "alpha" | "beta" | "gamma4"
    sites: tuple
    counts: dict
    prime: bool

    def classes(self):
        return range(1, 2 * self.p, 2)

    def js(self):
        if self.kind == "alpha":
            return (None,)
        return tuple(range(3)) if self.kind == "beta" else tuple(range(5))

    def row_total(self, j) -> int:
        p = self.p
        if self.kind == "alpha":
            return math.comb(2 * p, p)
        if self.kind == "beta":
            return math.comb(2 * p - 2, p - j) if p - j >= 0 else 0
        return math.comb(2 * p - 4, p - j) if p - j >= 0 else 0

    def reference(self, j) -> Fraction:
        return Fraction(self.row_total(j), self.p)

    def bound(self) -> int:
        return {"alpha": 2, "beta": self.p, "gamma4": self.p ** 3}[self.kind]

    def check_bounds(self):
        """[(k, j, count, reference, bound, pass)] — asserted only for prime p."""
        out = []
        b = self.bound()
        for j in self.js():
            ref = self.reference(j)
            for k in self.classes():
                cnt = self.counts[(k, j)]
                ok = abs(Fraction(cnt) - ref) <= b
                out.append((k, j, cnt, ref, b, ok))
        return out

    def max_deviation(self) -> Fraction:
        dev = Fraction(0)
        for j in self.js():
            ref = self.reference(j)
            for k in self.classes():
                dev = max(dev, abs(Fraction(self.counts[(k, j)]) - ref))
        return dev


def _classify(p: int, residue_counts: list) -> dict:
    return {class_of_residue(p, r): residue_counts[r] for r in range(p)}


def alpha_table(p: int) -> CardinalityTable:
    """Counts alpha_k of balanced words with integral class k, all odd k."""
    if p % 2 == 0:
        raise ValueError(f"p must be odd, got {p}")
    by_class = _classify(p, subset_count_dp(2 * p, p, p))
    counts = {(k, None): by_class[k] for k in range(1, 2 * p, 2)}
    return CardinalityTable(p, "alpha", (), counts, is_prime(p))


def beta_table(p: int, x1: int, x2: int) -> CardinalityTable:
    """beta_k^j for the pair (x1, x2): the first j of the pair carry a one."""
    _check_sites(p, (x1, x2))
    counts = {}
    for j in range(3):
        fin = (x1, x2)[:j]
        fout = (x1, x2)[j:]
        by_class = _classify(p, subset_count_dp(2 * p, p, p, fin, fout))
        for k in range(1, 2 * p, 2):
            counts[(k, j)] = by_class[k]
    return CardinalityTable(p, "beta", (x1, x2), counts, is_prime(p))


def gamma4_table(p: int, x1: int, x2: int, x3: int, x4: int) -> CardinalityTable:
    """gamma_k^j for the quadruple: the first j of the sites carry a one."""
    sites = (x1, x2, x3, x4)
    _check_sites(p, sites)
    counts = {}
    for j in range(5):
        by_class = _classify(p, subset_count_dp(2 * p, p, p, sites[:j], sites[j:]))
        for k in range(1, 2 * p, 2):
            counts[(k, j)] = by_class[k]
    return CardinalityTable(p, "gamma4", sites, counts, is_prime(p))


def _check_sites(p, sites):
    if len(set(sites)) != len(sites):
        raise ValueError(f"sites must be pairwise distinct, got {sites}")
    for x in sites:
        if not 1 <= x <= 2 * p:
            raise ValueError(f"site {x} outside 1..{2 * p}")


def brute_force_table(p: int, sites=(), pattern=()) -> dict:
    """Direct enumeration oracle: counts by odd class k of balanced words
    with word[x-1] == bit for (x, bit) in zip(sites, pattern).  O(C(2p,p))."""
    n = 2 * p
    want = dict(zip(sites, pattern))
    out = {k: 0 for k in range(1, n, 2)}
    for ones in combinations(range(1, n + 1), p):
        ones_set = set(ones)
        if any((x in ones_set) != bool(b) for x, b in want.items()):
            continue
        k = (p * (2 * p + 1) - 2 * sum(ones)) % n
        out[k] += 1
    return out


# ---------------------------------------------------------------------------
# Class weights and the partition function
# ---------------------------------------------------------------------------

def residue_weights(N: int, gamma: float) -> np.ndarray:
    """w[k] = sum over integers j = k (mod N) of e^{-|j|/N^gamma}, k = 0..N-1.

    Two geometric series split at the sign change of j; classes of the wrong
    parity are left at their (unused) value.
    """
    tau = float(N) ** gamma
    q = math.exp(-N / tau)
    w = np.empty(N)
    w[0] = (1.0 + q) / (1.0 - q)
    for k in range(1, N):
        w[k] = (math.exp(-k / tau) + math.exp(-(N - k) / tau)) / (1.0 - q)
    return w


def residue_weights_onesided(N: int, gamma: float, jmin: int) -> np.ndarray:
    """w[k] = sum over j = k (mod N), j >= jmin, of e^{-j/N^gamma}."""
    tau = float(N) ** gamma
    q = math.exp(-N / tau)
    w = np.empty(N)
    for k in range(N):
        j0 = k + ((jmin - k + N - 1) // N) * N  # smallest j >= jmin with j = k (mod N)
        w[k] = math.exp(-j0 / tau) / (1.0 - q)
    return w


@dataclass(frozen=True)
class PartitionData:
    z: float
    log_z: float
    normalized: float   # N^{1-gamma} C(N, N/2)^{-1} * (positive-integral half of z)


def partition_function(N: int, gamma: float) -> PartitionData:
    """Normalising constant of the stationary weight e^{-|Y|/N^gamma}.

    z sums the closed-form class weights against the exact class counts
    (all anchors, all balanced words); any even N is accepted.  The reported
    ``normalized`` value is the positive-integral half of that sum scaled by
    N^{1-gamma}/C(N, N/2); the classes come in +/- pairs of equal count, and
    this is the sequence whose large-N limit is 1.
    """
    if N % 2 != 0:
        raise ValueError(f"N must be even, got {N}")
    n = N // 2
    by_res = subset_count_dp(N, n, n)
    w = residue_weights(N, gamma)
    z = 0.0
    for r in range(n):
        z += float(by_res[r]) * w[class_of_residue(n, r)]
    log_z = math.log(z)
    norm = N ** (1.0 - gamma) * (z / 2.0) / float(math.comb(N, n))
    return PartitionData(z=z, log_z=log_z, normalized=norm)


# ---------------------------------------------------------------------------
# The binomial identity behind the 2m-point bounds
# ---------------------------------------------------------------------------

def binom_identity(N: int, m: int) -> tuple[Fraction, Fraction]:
    """Exact rational evaluation of both sides of the alternating identity

        sum_j C(2m,j) C(2N-2m,N-j) (-1)^j / C(2N,N)  =  (-1)^m C(N,m) / C(2N,2m).
    """
    if not 1 <= m <= N:
        raise ValueError(f"need 1 <= m <= N, got m={m}, N={N}")
    num = sum(math.comb(2 * m, j) * math.comb(2 * N - 2 * m, N - j) * (-1) ** j
              for j in range(0, 2 * m + 1) if N - j >= 0)
    lhs = Fraction(num, math.comb(2 * N, N))
    rhs = Fraction((-1) ** m * math.comb(N, m), math.comb(2 * N, 2 * m))
    return lhs, rhs
