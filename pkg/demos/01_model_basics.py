"""Tour of the height-configuration model: slopes, corners, flips, pairings.

Run:  python3 demos/01_model_basics.py
"""

import numpy as np

from ifl import (HeightConfig, TestFunction, apply_flip, pairing_density,
                 pairing_fluctuation, block_average, format_config, parse_config)

# The zigzag profile 101010... is the "most corners" configuration.
c = HeightConfig.from_slopes(0, "101010")
print("configuration:", format_config(c))
print("heights      :", c.heights())
print("integral Y   :", c.Y)
print("maxima/minima:", sorted(c.maxima), sorted(c.minima))

# A down-flip at a maximum lowers the integral by exactly 2 and is an
# involution with the subsequent up-flip at the same site.
ev = apply_flip(c, 1)
print(f"\nflip at 1 -> {ev.direction}, deltaY = {ev.deltaY}, Y now {c.Y}")
apply_flip(c, 1)
print("flip again -> restored:", format_config(c))

# Pairing the particle field with test functions: the constant function
# always gives exactly 1/2 (half filling), and kills the fluctuation field.
phi_const = TestFunction.constant(1.0)
phi_cos = TestFunction.fourier(1, "cos")
print("\n<pi, 1>      =", pairing_density(c, phi_const))
print("<pi, cos>    =", pairing_density(c, phi_cos))
print("U(1)         =", pairing_fluctuation(c, phi_const), "(identically zero)")
print("U(cos)       =", pairing_fluctuation(c, phi_cos))

# Block averages: local empirical densities left/right of a site.
print("\nright block of length 2 at 0:", block_average(c, 0, 2, "right"))
print("left  block of length 3 at 0:", block_average(c, 0, 3, "left"))

# The textual format round-trips.
line = format_config(c)
assert parse_config(line) == c
print("\nround-trip OK:", line)

# Discrete calculus: grad_N and lap_N are exact difference quotients.
N = 12
g = phi_cos.grad_n(N)
l = phi_cos.lap_n(N)
print("\ndiscrete gradient at x=0..3:", np.round(g[:4], 4))
print("discrete Laplacian at x=0..3:", np.round(l[:4], 2))
print("(compare -4 pi^2 cos:", np.round(-4 * np.pi ** 2 *
      np.cos(2 * np.pi * np.arange(4) / N), 2), ")")
