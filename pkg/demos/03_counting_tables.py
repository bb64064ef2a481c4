"""Exact counting of balanced words by integral class.

The number of balanced slope words whose height integral lies in a given
class mod N is remarkably uniform when N/2 is prime: the alpha counts differ
from C(2p, p)/p by at most 2, the pair-constrained beta counts by at most p,
and the quadruple-constrained counts by at most p^3.  These uniformity
bounds are what make the stationary measure asymptotically indistinguishable
from the uniform balanced law, and they drive the correlation estimates.

Run:  python3 demos/03_counting_tables.py
"""

import math
from fractions import Fraction

from ifl.combinatorics import (alpha_table, beta_table, gamma4_table,
                               partition_function, binom_identity)

p = 13
tab = alpha_table(p)
ref = Fraction(math.comb(2 * p, p), p)
print(f"alpha counts at p={p} (reference C(2p,p)/p = {float(ref):.1f}):")
for k in list(tab.classes())[:5]:
    cnt = tab.counts[(k, None)]
    print(f"  class {k:>2}: {cnt}  (deviation {float(cnt - ref):+.3f})")
print(f"  max deviation over all classes: {float(tab.max_deviation()):.3f} <= 2")

bt = beta_table(p, 1, 2)
print(f"\nbeta max deviation (sites 1,2): {float(bt.max_deviation()):.2f} <= {p}")
gt = gamma4_table(p, 1, 2, 3, 4)
print(f"gamma4 max deviation (sites 1..4): {float(gt.max_deviation()):.2f} <= {p ** 3}")

print("\npartition-function normalisation (positive-integral half, gamma=1):")
for q in (3, 7, 13, 31, 61, 101):
    pd = partition_function(2 * q, 1.0)
    print(f"  p={q:>3}: {pd.normalized:.6f}")

print("\nalternating binomial identity, exact rationals:")
for NN, m in ((2, 1), (10, 4), (30, 15)):
    lhs, rhs = binom_identity(NN, m)
    print(f"  N={NN:>2}, m={m:>2}: {lhs} == {rhs}  ({lhs == rhs})")
