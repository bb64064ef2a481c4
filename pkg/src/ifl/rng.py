"""Reproducible random streams for the event engine and the samplers.

A stream is addressed by (master seed, stream id).  Two generators are
derived deterministically from that pair:

  * a numpy ``Generator`` (PCG64 via ``SeedSequence(seed, spawn_key=(id,))``)
    for vectorised sampling work, and
  * a 4-word xoshiro256++ state, seeded through splitmix64, that the
    numba event kernels advance in place.

Replaying the same (seed, id) replays either sequence bit for bit; distinct
ids give statistically independent streams.  The pure-Python xoshiro mirror
below exists so the reference event loop can be checked against the kernel
draw by draw.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

_MASK64 = (1 << 64) - 1


def _splitmix64(z: int) -> tuple[int, int]:
    """One splitmix64 step: returns (new_state, output)."""
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    x = z
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z, x ^ (x >> 31)


def xoshiro_state(seed: int, stream_id: int) -> np.ndarray:
    """Initial xoshiro256++ state for (seed, stream id), as uint64[4]."""
    z = (seed & _MASK64) ^ 0x6A09E667F3BCC909
    z, mixed_id = _splitmix64((stream_id & _MASK64) ^ 0xBB67AE8584CAA73B)
    z ^= mixed_id
    out = np.empty(4, dtype=np.uint64)
    for i in range(4):
        z, val = _splitmix64(z)
        out[i] = val
    if not out.any():  # all-zero state is the one invalid seed
        out[0] = np.uint64(0x9E3779B97F4A7C15)
    return out


@njit(cache=True, inline="always")
def xs_next(state):
    """Advance a uint64[4] xoshiro256++ state; returns a uint64."""
    s0 = state[0]
    s1 = state[1]
    s2 = state[2]
    s3 = state[3]
    tmp = s0 + s3
    result = ((tmp << np.uint64(23)) | (tmp >> np.uint64(41))) + s0
    t = s1 << np.uint64(17)
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = (s3 << np.uint64(45)) | (s3 >> np.uint64(19))
    state[0] = s0
    state[1] = s1
    state[2] = s2
    state[3] = s3
    return result


@njit(cache=True, inline="always")
def xs_unit(state):
    """A double in (0, 1] from the top 53 bits (safe under log)."""
    return (np.float64(xs_next(state) >> np.uint64(11)) + 1.0) * (0.5 ** 53)


def py_xs_next(state: np.ndarray) -> int:
    """Pure-Python twin of xs_next, for the reference event loop."""
    s0, s1, s2, s3 = (int(state[i]) for i in range(4))
    tmp = (s0 + s3) & _MASK64
    result = (((tmp << 23) & _MASK64 | (tmp >> 41)) + s0) & _MASK64
    t = (s1 << 17) & _MASK64
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = ((s3 << 45) & _MASK64) | (s3 >> 19)
    state[0], state[1], state[2], state[3] = (
        np.uint64(s0), np.uint64(s1), np.uint64(s2), np.uint64(s3))
    return result


def py_xs_unit(state: np.ndarray) -> float:
    return float(np.float64((py_xs_next(state) >> 11) + 1) * np.float64(0.5 ** 53))


@dataclass(frozen=True)
class RngStream:
    """Addressable reproducible stream: (master seed, stream id)."""
    seed: int
    stream_id: int = 0

    def kernel_state(self) -> np.ndarray:
        return xoshiro_state(self.seed, self.stream_id)

    def numpy_gen(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed & _MASK64,
                                    spawn_key=(self.stream_id & _MASK64,))
        return np.random.default_rng(ss)

    def substream(self, k: int) -> "RngStream":
        """A child stream with a distinct id (replica k of this stream)."""
        return RngStream(self.seed, (self.stream_id * 0x1000193 + 1 + k) & _MASK64)
