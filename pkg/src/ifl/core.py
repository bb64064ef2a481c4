"""Height configurations on the discrete torus and their slope calculus.

A configuration is an integer-valued profile h on the torus sites
0..N-1 (N even) with unit steps |h(x)-h(x+1)| = 1 and h(0) = h(N).
The slope bit at site x is

    xi(x) = (h(x) - h(x-1) + 1) / 2  in {0, 1},

so up-slopes are particles and down-slopes are holes; periodicity forces
exactly N/2 particles.  The global observable driving the dynamics is the
signed sum of heights

    Y = sum_x h(x),

which changes by -2 when a local maximum flips down and +2 when a local
minimum flips up.  Only (anchor, slopes, Y, corner sets) are stored; the
height array is materialised on demand.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ValidationError(ValueError):
    """Raised when an input violates a structural invariant."""


class NotFlippableError(ValueError):
    """Raised when a flip is requested at a site that is not a corner."""


# ---------------------------------------------------------------------------
# Height configurations
# ---------------------------------------------------------------------------

class HeightConfig:
    """Mutable height configuration with O(1) corner-flip updates.

    Internal state:
      xi        int8 array, xi[x] = slope bit attached to the edge [x-1, x)
      anchor    h(0)
      Y         cached sum of heights (int)
      max_sites / max_pos, min_sites / min_pos
                index-addressable corner sets: max_sites[:n_max] lists the
                local-maximum sites, max_pos[site] gives the slot (or -1),
                so uniform draws and membership updates are O(1).

    One engine instance owns and mutates one configuration; instances are
    otherwise plain data.
    """

    __slots__ = ("N", "anchor", "xi", "Y",
                 "max_sites", "max_pos", "n_max",
                 "min_sites", "min_pos", "n_min")

    def __init__(self, anchor: int, xi: np.ndarray):
        xi = np.asarray(xi, dtype=np.int8)
        N = xi.shape[0]
        if N % 2 != 0 or N < 4:
            raise ValidationError(f"torus size must be even and >= 4, got N={N}")
        if int(xi.sum()) != N // 2:
            raise ValidationError(
                f"slopes must balance: need {N // 2} ones, got {int(xi.sum())} (periodicity h(0)=h(N))")
        self.N = N
        self.anchor = int(anchor)
        self.xi = xi
        self.Y = _integral(self.anchor, xi)
        self.max_sites = np.full(N, -1, dtype=np.int32)
        self.max_pos = np.full(N, -1, dtype=np.int32)
        self.min_sites = np.full(N, -1, dtype=np.int32)
        self.min_pos = np.full(N, -1, dtype=np.int32)
        self.n_max = 0
        self.n_min = 0
        for x in range(N):
            xn = xi[(x + 1) % N]
            if xi[x] == 1 and xn == 0:
                self.max_sites[self.n_max] = x
                self.max_pos[x] = self.n_max
                self.n_max += 1
            elif xi[x] == 0 and xn == 1:
                self.min_sites[self.n_min] = x
                self.min_pos[x] = self.n_min
                self.n_min += 1

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_slopes(cls, anchor: int, slopes) -> "HeightConfig":
        """Build a configuration from h(0) and the slope word xi(1..N).

        ``slopes`` may be a bit string like ``"101010"`` or a 0/1 sequence;
        entry i-1 is the slope of the edge [i-1, i).  Site occupations are
        the same word rotated one step: xi(site x) = slopes[x-1 mod N].
        """
        if isinstance(slopes, str):
            bad = [i for i, c in enumerate(slopes) if c not in "01"]
            if bad:
                raise ValidationError(f"slope string has non-bit character at position {bad[0]}")
            bits = np.frombuffer(slopes.encode(), dtype=np.uint8) - ord("0")
        else:
            bits = np.asarray(slopes)
            if not np.isin(bits, (0, 1)).all():
                raise ValidationError("slopes must be 0/1 valued")
        bits = bits.astype(np.int8)
        N = bits.shape[0]
        if N % 2 != 0:
            raise ValidationError(f"slope word length must be even, got {N}")
        if int(bits.sum()) != N // 2:
            raise ValidationError(
                f"slopes must balance: need {N // 2} ones, got {int(bits.sum())} (periodicity h(0)=h(N))")
        return cls(anchor, np.roll(bits, 1))

    @classmethod
    def zigzag(cls, N: int, anchor: int = 0) -> "HeightConfig":
        """The alternating word 1010...10 (all sites are corners)."""
        bits = np.zeros(N, dtype=np.int8)
        bits[::2] = 1
        return cls.from_slopes(anchor, bits)

    def copy(self) -> "HeightConfig":
        c = object.__new__(HeightConfig)
        c.N = self.N
        c.anchor = self.anchor
        c.xi = self.xi.copy()
        c.Y = self.Y
        c.max_sites = self.max_sites.copy()
        c.max_pos = self.max_pos.copy()
        c.min_sites = self.min_sites.copy()
        c.min_pos = self.min_pos.copy()
        c.n_max = self.n_max
        c.n_min = self.n_min
        return c

    # -- views --------------------------------------------------------------

    def slopes(self) -> np.ndarray:
        """The slope word xi(1..N) as a 0/1 array (inverse of from_slopes)."""
        return np.roll(self.xi, -1).copy()

    def heights(self) -> np.ndarray:
        """Materialise h(0..N-1).  Not used by the engine (flips are O(1))."""
        steps = 2 * self.xi.astype(np.int64) - 1
        h = np.empty(self.N, dtype=np.int64)
        h[0] = self.anchor
        h[1:] = self.anchor + np.cumsum(steps[1:])
        return h

    @property
    def maxima(self) -> set:
        return set(int(s) for s in self.max_sites[:self.n_max])

    @property
    def minima(self) -> set:
        return set(int(s) for s in self.min_sites[:self.n_min])

    def sign(self) -> int:
        """sgn(Y) with the convention sgn(0) = 0."""
        return (self.Y > 0) - (self.Y < 0)

    def __eq__(self, other) -> bool:
        return (isinstance(other, HeightConfig) and self.N == other.N
                and self.anchor == other.anchor and bool((self.xi == other.xi).all()))

    def __repr__(self) -> str:
        return f"HeightConfig(N={self.N}, anchor={self.anchor}, Y={self.Y})"

    # -- corner structure ---------------------------------------------------

    def corner_direction(self, x: int):
        """'down' at a local maximum, 'up' at a local minimum, else None."""
        if self.max_pos[x] >= 0:
            return "down"
        if self.min_pos[x] >= 0:
            return "up"
        return None

    def _set_corner_status(self, x: int):
        is_max = self.xi[x] == 1 and self.xi[(x + 1) % self.N] == 0
        is_min = self.xi[x] == 0 and self.xi[(x + 1) % self.N] == 1
        if is_max and self.max_pos[x] < 0:
            self.max_sites[self.n_max] = x
            self.max_pos[x] = self.n_max
            self.n_max += 1
        elif not is_max and self.max_pos[x] >= 0:
            k = self.max_pos[x]
            last = self.max_sites[self.n_max - 1]
            self.max_sites[k] = last
            self.max_pos[last] = k
            self.n_max -= 1
            self.max_pos[x] = -1
        if is_min and self.min_pos[x] < 0:
            self.min_sites[self.n_min] = x
            self.min_pos[x] = self.n_min
            self.n_min += 1
        elif not is_min and self.min_pos[x] >= 0:
            k = self.min_pos[x]
            last = self.min_sites[self.n_min - 1]
            self.min_sites[k] = last
            self.min_pos[last] = k
            self.n_min -= 1
            self.min_pos[x] = -1


@dataclass(frozen=True)
class CornerFlip:
    """A single corner flip: down maps max -> min (deltaY = -2), up the reverse."""
    site: int
    direction: str  # "down" | "up"

    @property
    def deltaY(self) -> int:
        return -2 if self.direction == "down" else 2


def apply_flip(config: HeightConfig, x: int) -> CornerFlip:
    """Flip the corner at site x in place: h(x) <- h(x) + Dh(x).

    In slope variables this swaps xi(x) and xi(x+1); Y and the corner sets
    of x-1, x, x+1 are updated incrementally.
    """
    x = int(x) % config.N
    direction = config.corner_direction(x)
    if direction is None:
        raise NotFlippableError(f"site {x} is not flippable (not a local extremum)")
    xp = (x + 1) % config.N
    config.xi[x], config.xi[xp] = config.xi[xp], config.xi[x]
    config.Y += -2 if direction == "down" else 2
    if x == 0:
        config.anchor += -2 if direction == "down" else 2
    for y in ((x - 1) % config.N, x, xp):
        config._set_corner_status(y)
    return CornerFlip(site=x, direction=direction)


def _integral(anchor: int, xi: np.ndarray) -> int:
    """sum_x h(x) from anchor and site slopes, without materialising h."""
    N = xi.shape[0]
    steps = 2 * xi.astype(np.int64) - 1
    # h(x) = anchor + sum_{i=1..x} steps[i]; step i contributes (N - i) times
    coeff = N - np.arange(N, dtype=np.int64)
    return int(N * anchor + (coeff[1:] * steps[1:]).sum())


def recompute_caches(config: HeightConfig) -> tuple:
    """From-scratch (Y, maxima, minima) for cross-checking incremental state."""
    fresh = HeightConfig(config.anchor, config.xi.copy())
    return fresh.Y, fresh.maxima, fresh.minima


# ---------------------------------------------------------------------------
# Test functions and the discrete calculus
# ---------------------------------------------------------------------------

class TestFunction:
    """A periodic test function phi on [0,1) with exact discrete calculus.

    The discrete gradient and Laplacian are exact difference quotients of
    evaluator calls,

        grad_N phi(x/N) = N [phi((x+1)/N) - phi(x/N)],
        lap_N  phi(x/N) = N^2 [phi((x+1)/N) - 2 phi(x/N) + phi((x-1)/N)],

    never symbolic derivatives.  Fourier modes carry their exact L2 data so
    theory values in the experiments need no quadrature.
    """

    __test__ = False  # not a pytest case, despite the name

    def __init__(self, kind: str, k: int = 0, amplitude: float = 1.0,
                 values: np.ndarray | None = None, label: str | None = None):
        if kind not in ("constant", "cos", "sin", "tabulated"):
            raise ValidationError(f"unknown test-function kind {kind!r}")
        self.kind = kind
        self.k = int(k)
        self.amplitude = float(amplitude)
        self.values = None if values is None else np.asarray(values, dtype=float)
        if kind == "tabulated" and self.values is None:
            raise ValidationError("tabulated test function needs grid values")
        self.label = label or self._default_label()

    def _default_label(self) -> str:
        if self.kind == "constant":
            return f"const{self.amplitude:g}"
        if self.kind == "tabulated":
            return f"tab{len(self.values)}"
        return f"{self.kind}{self.k}" + ("" if self.amplitude == 1.0 else f"x{self.amplitude:g}")

    @classmethod
    def constant(cls, c: float = 1.0) -> "TestFunction":
        return cls("constant", amplitude=c)

    @classmethod
    def fourier(cls, k: int, phase: str = "cos", amplitude: float = 1.0) -> "TestFunction":
        if phase not in ("cos", "sin"):
            raise ValidationError("phase must be 'cos' or 'sin'")
        if k < 1:
            raise ValidationError("Fourier mode k must be >= 1")
        return cls(phase, k=k, amplitude=amplitude)

    @classmethod
    def tabulated(cls, values) -> "TestFunction":
        return cls("tabulated", values=values)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "constant":
            return np.broadcast_to(np.float64(self.amplitude), u.shape).copy() if u.shape else np.float64(self.amplitude)
        if self.kind == "cos":
            return self.amplitude * np.cos(2 * np.pi * self.k * u)
        if self.kind == "sin":
            return self.amplitude * np.sin(2 * np.pi * self.k * u)
        # periodic linear interpolation of the tabulated grid
        vals = self.values
        M = len(vals)
        t = np.mod(u, 1.0) * M
        i0 = np.floor(t).astype(int) % M
        frac = t - np.floor(t)
        return (1 - frac) * vals[i0] + frac * vals[(i0 + 1) % M]

    # -- exact site tables ---------------------------------------------------

    def values_on(self, N: int) -> np.ndarray:
        return np.asarray(self(np.arange(N) / N), dtype=float)

    def grad_n(self, N: int) -> np.ndarray:
        v = self.values_on(N)
        return N * (np.roll(v, -1) - v)

    def lap_n(self, N: int) -> np.ndarray:
        v = self.values_on(N)
        return N * N * (np.roll(v, -1) - 2 * v + np.roll(v, 1))

    # -- continuum L2 data (exact for constant/Fourier) ----------------------

    def l2_norm_sq(self) -> float:
        if self.kind == "constant":
            return self.amplitude ** 2
        if self.kind in ("cos", "sin"):
            return self.amplitude ** 2 / 2.0
        return float(np.mean(self.values ** 2))

    def mean(self) -> float:
        """<1, phi> on the unit torus."""
        if self.kind == "constant":
            return self.amplitude
        if self.kind in ("cos", "sin"):
            return 0.0
        return float(np.mean(self.values))

    def grad_norm_sq(self) -> float:
        if self.kind == "constant":
            return 0.0
        if self.kind in ("cos", "sin"):
            return self.amplitude ** 2 * (2 * np.pi * self.k) ** 2 / 2.0
        g = len(self.values) * (np.roll(self.values, -1) - self.values)
        return float(np.mean(g ** 2))


# ---------------------------------------------------------------------------
# Pairings and block averages
# ---------------------------------------------------------------------------

def pairing_density(config: HeightConfig, phi: TestFunction) -> float:
    """(1/N) sum_x xi(x) phi(x/N), the empirical-measure pairing."""
    v = phi.values_on(config.N)
    return float(v @ (config.xi != 0)) / config.N


def pairing_fluctuation(config: HeightConfig, phi: TestFunction) -> float:
    """(1/sqrt N) sum_x (xi(x) - 1/2) phi(x/N); vanishes identically for constant phi."""
    v = phi.values_on(config.N)
    centered = config.xi.astype(float) - 0.5
    return float(v @ centered) / np.sqrt(config.N)


def block_average(config: HeightConfig, x: int, ell: int, side: str = "right") -> float:
    """Empirical particle density on the length-ell block right/left of x."""
    N = config.N
    if not 1 <= ell <= N - 1:
        raise ValidationError(f"block length must satisfy 1 <= ell <= N-1, got {ell}")
    if side == "right":
        idx = (np.arange(x + 1, x + ell + 1)) % N
    elif side == "left":
        idx = (np.arange(x - ell, x)) % N
    else:
        raise ValidationError(f"side must be 'right' or 'left', got {side!r}")
    return float(config.xi[idx].sum()) / ell


# ---------------------------------------------------------------------------
# Textual round-trip format
# ---------------------------------------------------------------------------

def format_config(config: HeightConfig) -> str:
    bits = "".join("1" if b else "0" for b in config.slopes())
    return f"N={config.N} anchor={config.anchor} slopes={bits}"


def parse_config(line: str) -> HeightConfig:
    """Parse ``N=<int> anchor=<int> slopes=<bitstring>``; errors carry positions."""
    fields = {}
    pos = 0
    for token in line.strip().split():
        at = line.index(token, pos)
        pos = at + len(token)
        if "=" not in token:
            raise ValidationError(f"malformed token {token!r} at position {at}: expected key=value")
        key, _, val = token.partition("=")
        if key not in ("N", "anchor", "slopes"):
            raise ValidationError(f"unknown key {key!r} at position {at}")
        if key in fields:
            raise ValidationError(f"duplicate key {key!r} at position {at}")
        fields[key] = (val, at)
    for key in ("N", "anchor", "slopes"):
        if key not in fields:
            raise ValidationError(f"missing key {key!r}")
    try:
        N = int(fields["N"][0])
        anchor = int(fields["anchor"][0])
    except ValueError as exc:
        raise ValidationError(f"non-integer value: {exc}") from None
    bits, at = fields["slopes"]
    for i, c in enumerate(bits):
        if c not in "01":
            raise ValidationError(f"non-bit character {c!r} at position {at + len('slopes=') + i}")
    if len(bits) != N:
        raise ValidationError(f"slope word length {len(bits)} does not match N={N}")
    return HeightConfig.from_slopes(anchor, bits)
