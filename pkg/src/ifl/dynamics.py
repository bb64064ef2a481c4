"""Event-driven simulation of the accelerated corner-flip dynamics.

The process is the continuous-time Markov chain on height configurations
whose clock is accelerated by N^2: each local maximum flips down at rate
N^2 * p_down(sgn Y) and each local minimum flips up at rate N^2 * p_up,
with

    p_down(s) = 1/2 + (s/2) tanh(N^-gamma),   p_up = 1 - p_down,

and sgn(0) = 0.  Since |maxima| = |minima| = m and p_down + p_up = 1, the
total event rate is exactly N^2 * m, so the engine draws an exponential
waiting time at that rate and then a down-flip with probability p_down at
a uniform maximum (else an up-flip at a uniform minimum).  This is the
exact Gillespie realisation; between events every observable below is
constant, so the ledger accumulates its time integrals with zero
discretisation error (integrand times waiting time).

Ledger quantities, for the centred field U(phi) = N^{-1/2} sum_x phi(x/N) xi_bar(x):

    K_t  = (2 sqrt N)^{-1} int_0^t sum_x lap_N phi(x/N) xi_bar_s(x) ds
    B_t  = -sqrt(N) tanh(N^-gamma) int_0^t sgn(Y_s)
               sum_x grad_N phi(x/N) xi_bar_s(x) xi_bar_s(x+1) ds
    M_t  = U_t - U_0 - K_t - B_t                    (mean-zero martingale)
    QV_t = int_0^t N^{-1} sum_x grad_N phi(x/N)^2 eta_s(x) ds,
    eta  = (xi(x)-xi(x+1))^2 / 2 + (tanh(N^-gamma)/2) sgn(Y) (xi(x)-xi(x+1))

and for the scaled integral process Y_t = N^{-2} sum_x h(x):

    X_t   = Y_t - Y_0 + tanh(N^-gamma) int_0^t sgn(Y_s) sum_x (xi-xi_+)^2 ds
    <X>_t = (2/N^2) int_0^t sum_x (xi_s(x)-xi_s(x+1))^2 ds.

The signs and prefactors are fixed by applying the accelerated generator
N^2 L directly to U(phi) and Y; ``generator_drift`` below exposes that
brute-force computation and the tests assert the closed forms against it.
Note sum_x (xi(x)-xi(x+1))^2 = 2m at all times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .core import HeightConfig, CornerFlip, TestFunction, apply_flip
from .rng import RngStream, xs_unit, py_xs_unit

__all__ = [
    "RateParams", "rates_for_sign", "MartingaleLedger", "Trajectory",
    "step", "simulate", "simulate_events", "integral_martingale",
    "generator_drift",
]


# ---------------------------------------------------------------------------
# Rates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RateParams:
    """Flip probabilities for torus size N and perturbation exponent gamma."""
    N: int
    gamma: float
    tanh_term: float = field(init=False)

    def __post_init__(self):
        if self.N % 2 != 0 or self.N < 4:
            raise ValueError(f"N must be even and >= 4, got {self.N}")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        object.__setattr__(self, "tanh_term", float(np.tanh(self.N ** (-self.gamma))))

    def p_down(self, s: int) -> float:
        return 0.5 + 0.5 * s * self.tanh_term

    def p_up(self, s: int) -> float:
        return 0.5 - 0.5 * s * self.tanh_term


def rates_for_sign(params: RateParams, s: int) -> tuple[float, float]:
    """(p_down, p_up) for s in {-1, 0, +1}; they sum to 1 by construction."""
    if s not in (-1, 0, 1):
        raise ValueError(f"sign must be -1, 0 or +1, got {s}")
    return params.p_down(s), params.p_up(s)


# ---------------------------------------------------------------------------
# Event kernel (numba)
# ---------------------------------------------------------------------------

@njit(cache=True, inline="always")
def _sync_max(xi, N, y, sites, pos, n):
    yp = y + 1 if y + 1 < N else 0
    isc = xi[y] == 1 and xi[yp] == 0
    if isc and pos[y] < 0:
        sites[n] = y
        pos[y] = n
        n += 1
    elif (not isc) and pos[y] >= 0:
        k = pos[y]
        last = sites[n - 1]
        sites[k] = last
        pos[last] = k
        pos[y] = -1
        n -= 1
    return n


@njit(cache=True, inline="always")
def _sync_min(xi, N, y, sites, pos, n):
    yp = y + 1 if y + 1 < N else 0
    isc = xi[y] == 0 and xi[yp] == 1
    if isc and pos[y] < 0:
        sites[n] = y
        pos[y] = n
        n += 1
    elif (not isc) and pos[y] >= 0:
        k = pos[y]
        last = sites[n - 1]
        sites[k] = last
        pos[last] = k
        pos[y] = -1
        n -= 1
    return n


@njit(cache=True, nogil=True)
def _kmc_run(xi, max_sites, max_pos, min_sites, min_pos,
             istate, fstate, rng_state, t_end, tanh_term,
             lap_tab, grad_tab, grad2_tab, sums, accs, acc_misc):
    """Advance the chain to t_end, accumulating exact time integrals.

    istate: int64[4] = [Y, n_max, n_min, n_events]  (Y = raw sum of heights)
    fstate: float64[1] = [t]
    sums:   float64[4, nphi] current values of
            S_K  = sum_x lap_N phi(x/N) xi_bar(x)
            S_B  = sum_x grad_N phi(x/N) xi_bar(x) xi_bar(x+1)
            S_QS = sum_x grad_N phi(x/N)^2 (xi(x)-xi(x+1))^2
            S_QA = sum_x grad_N phi(x/N)^2 (xi(x)-xi(x+1))
    accs:   float64[4, nphi] running integrals of S_K, sgn*S_B, S_QS, sgn*S_QA
    acc_misc: float64[2] running integrals of 2m and sgn*2m
    """
    N = xi.shape[0]
    n2 = float(N) * float(N)
    nphi = lap_tab.shape[0]
    Y = istate[0]
    n_max = int(istate[1])
    n_min = int(istate[2])
    nev = istate[3]
    t = fstate[0]
    while t < t_end:
        total_rate = n2 * n_max
        dt = -np.log(xs_unit(rng_state)) / total_rate
        s = 0
        if Y > 0:
            s = 1
        elif Y < 0:
            s = -1
        sf = float(s)
        stop = t + dt >= t_end
        w = (t_end - t) if stop else dt
        twom = 2.0 * n_max
        acc_misc[0] += twom * w
        acc_misc[1] += sf * twom * w
        for j in range(nphi):
            accs[0, j] += sums[0, j] * w
            accs[1, j] += sf * sums[1, j] * w
            accs[2, j] += sums[2, j] * w
            accs[3, j] += sf * sums[3, j] * w
        if stop:
            t = t_end
            break
        t += dt
        p_down = 0.5 + 0.5 * sf * tanh_term
        down = xs_unit(rng_state) <= p_down
        if down:
            k = int(xs_unit(rng_state) * n_max)
            if k >= n_max:
                k = n_max - 1
            x = max_sites[k]
        else:
            k = int(xs_unit(rng_state) * n_min)
            if k >= n_min:
                k = n_min - 1
            x = min_sites[k]
        xm1 = x - 1 if x > 0 else N - 1
        xp = x + 1 if x + 1 < N else 0
        xpp = xp + 1 if xp + 1 < N else 0
        if nphi > 0:
            a0 = xi[xm1] - 0.5
            a1 = xi[x] - 0.5
            a2 = xi[xp] - 0.5
            a3 = xi[xpp] - 0.5
            dxx = a2 - a1  # change of xi_bar(x); xi_bar(x+1) changes by -dxx
            db0 = a0 * dxx
            db2 = -dxx * a3
            e0o = a0 - a1
            e2o = a2 - a3
            e0n = a0 - a2
            e2n = a1 - a3
            dq0 = e0n * e0n - e0o * e0o
            dq2 = e2n * e2n - e2o * e2o
            for j in range(nphi):
                sums[0, j] += dxx * (lap_tab[j, x] - lap_tab[j, xp])
                sums[1, j] += grad_tab[j, xm1] * db0 + grad_tab[j, xp] * db2
                sums[2, j] += grad2_tab[j, xm1] * dq0 + grad2_tab[j, xp] * dq2
                # the middle edge's signed slope difference flips under the swap
                sums[3, j] += dxx * (2.0 * grad2_tab[j, x]
                                     - grad2_tab[j, xm1] - grad2_tab[j, xp])
        tmp = xi[x]
        xi[x] = xi[xp]
        xi[xp] = tmp
        Y += 2 * (xi[x] - xi[xp])  # -2 for a down-flip, +2 for an up-flip
        n_max = _sync_max(xi, N, xm1, max_sites, max_pos, n_max)
        n_max = _sync_max(xi, N, x, max_sites, max_pos, n_max)
        n_max = _sync_max(xi, N, xp, max_sites, max_pos, n_max)
        n_min = _sync_min(xi, N, xm1, min_sites, min_pos, n_min)
        n_min = _sync_min(xi, N, x, min_sites, min_pos, n_min)
        n_min = _sync_min(xi, N, xp, min_sites, min_pos, n_min)
        nev += 1
    istate[0] = Y
    istate[1] = n_max
    istate[2] = n_min
    istate[3] = nev
    fstate[0] = t


# ---------------------------------------------------------------------------
# Single-step and reference event loop (pure Python, shares the rng stream)
# ---------------------------------------------------------------------------

def step(config: HeightConfig, params: RateParams, rng_state: np.ndarray,
         clock: float) -> tuple[CornerFlip, float]:
    """One exact Gillespie step; mutates config, returns (event, new clock).

    ``rng_state`` is a uint64[4] xoshiro state (see RngStream.kernel_state);
    the draw order (waiting time, direction, corner index) matches the
    compiled kernel, so interleaving the two is deterministic.
    """
    if config.n_max == 0:
        raise RuntimeError("configuration has no corners; invariant violated")
    N = config.N
    total_rate = float(N) * float(N) * config.n_max
    dt = -math.log(py_xs_unit(rng_state)) / total_rate
    s = config.sign()
    p_down = 0.5 + 0.5 * s * params.tanh_term
    down = py_xs_unit(rng_state) <= p_down
    if down:
        k = int(py_xs_unit(rng_state) * config.n_max)
        k = min(k, config.n_max - 1)
        x = int(config.max_sites[k])
    else:
        k = int(py_xs_unit(rng_state) * config.n_min)
        k = min(k, config.n_min - 1)
        x = int(config.min_sites[k])
    event = apply_flip(config, x)
    return event, clock + dt


def simulate_events(config: HeightConfig, params: RateParams, horizon: float,
                    observers, rng: RngStream):
    """Reference event loop: observers see (pre-event config, event, wait).

    Exact but unaccelerated Python; used for validating the compiled path
    and for event-level instrumentation at small N.  The final waiting
    period is reported to observers with event=None when the horizon cuts
    it short.
    """
    if horizon <= 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    state = rng.kernel_state()
    t = 0.0
    while True:
        if config.n_max == 0:
            raise RuntimeError("configuration has no corners; invariant violated")
        pre = config.copy()
        N = config.N
        total_rate = float(N) * float(N) * config.n_max
        dt = -math.log(py_xs_unit(state)) / total_rate
        if t + dt >= horizon:
            for obs in observers:
                _notify(obs, pre, None, horizon - t)
            return horizon
        s = config.sign()
        p_down = 0.5 + 0.5 * s * params.tanh_term
        down = py_xs_unit(state) <= p_down
        if down:
            k = min(int(py_xs_unit(state) * config.n_max), config.n_max - 1)
            x = int(config.max_sites[k])
        else:
            k = min(int(py_xs_unit(state) * config.n_min), config.n_min - 1)
            x = int(config.min_sites[k])
        event = apply_flip(config, x)
        t += dt
        for obs in observers:
            _notify(obs, pre, event, dt)


def _notify(obs, pre, event, wait):
    try:
        obs(pre, event, wait)
    except Exception as exc:
        raise RuntimeError(f"observer {obs!r} failed at wait={wait}: {exc}") from exc


# ---------------------------------------------------------------------------
# Ledger and trajectory
# ---------------------------------------------------------------------------

class MartingaleLedger:
    """Exact pathwise decomposition records on a time grid.

    Per test function phi the arrays U, K, B, QV, M satisfy
    U_t = U_0 + M_t + K_t + B_t identically (M is defined as the residual),
    and the integral-process pair (X, QVX) is kept alongside.  All entries
    are exact time integrals of piecewise-constant integrands.
    """

    def __init__(self, times: np.ndarray, labels: list, N: int, gamma: float):
        ng = len(times)
        self.times = np.asarray(times, dtype=float)
        self.labels = list(labels)
        self.N = N
        self.gamma = gamma
        self.U = {lb: np.zeros(ng) for lb in labels}
        self.K = {lb: np.zeros(ng) for lb in labels}
        self.B = {lb: np.zeros(ng) for lb in labels}
        self.QV = {lb: np.zeros(ng) for lb in labels}
        self.Y = np.zeros(ng)       # scaled integral N^{-2} sum h
        self.Ydrift = np.zeros(ng)  # tanh(N^-gamma) int sgn(Y) sum (xi-xi_+)^2 ds
        self.X = np.zeros(ng)       # = Y - Y_0 + Ydrift, a martingale
        self.QVX = np.zeros(ng)

    def M(self, label: str) -> np.ndarray:
        return self.U[label] - self.U[label][0] - self.K[label] - self.B[label]

    def _grid_index(self, t: float) -> int:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-12 * max(1.0, abs(t)):
            if t > self.times[-1]:
                raise ValueError(f"t={t} beyond recorded horizon {self.times[-1]}")
            raise ValueError(f"t={t} is not on the recorded grid")
        return i

    def density_terms(self, label: str) -> dict:
        """The same decomposition for the density pairing <pi, phi>.

        <pi_t, phi> = U_t/sqrt(N) + (1/N) sum_x phi(x/N)/2 exactly, and the
        discrete gradient/Laplacian sums of phi telescope to zero on the
        torus, so every term just rescales by 1/sqrt(N).
        """
        rt = np.sqrt(self.N)
        return {"M": self.M(label) / rt, "K": self.K[label] / rt,
                "B": self.B[label] / rt, "U": self.U[label] / rt}


def integral_martingale(ledger: MartingaleLedger, t: float) -> tuple[float, float]:
    """(X_t, <X>_t) at a recorded grid time; errors beyond the horizon."""
    i = ledger._grid_index(t)
    return float(ledger.X[i]), float(ledger.QVX[i])


@dataclass
class Trajectory:
    """Grid-sampled observer outputs plus the final configuration."""
    times: np.ndarray
    columns: dict
    final_config: HeightConfig
    ledger: MartingaleLedger | None = None
    n_events: int = 0

    def to_csv(self) -> str:
        names = ["t", "Y", "num_maxima"] + [c for c in self.columns
                                            if c not in ("Y", "num_maxima")]
        lines = [",".join(names)]
        for i in range(len(self.times)):
            row = [f"{self.times[i]:.17g}"]
            for name in names[1:]:
                v = self.columns[name][i]
                row.append(f"{int(v)}" if name == "num_maxima" else f"{v:.17g}")
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Grid-driving simulator
# ---------------------------------------------------------------------------

def _phi_tables(phis, N):
    labels = [p.label for p in phis]
    lap = np.zeros((len(phis), N))
    grad = np.zeros((len(phis), N))
    vals = np.zeros((len(phis), N))
    for j, p in enumerate(phis):
        vals[j] = p.values_on(N)
        grad[j] = p.grad_n(N)
        lap[j] = p.lap_n(N)
    return labels, vals, grad, lap


def _fresh_sums(xi, vals, grad, lap):
    xb = xi.astype(np.float64) - 0.5
    xbp = np.roll(xb, -1)
    d = xb - xbp
    sums = np.zeros((4, vals.shape[0]))
    sums[0] = lap @ xb
    sums[1] = grad @ (xb * xbp)
    sums[2] = (grad * grad) @ (d * d)
    sums[3] = (grad * grad) @ d
    return sums


def simulate(config: HeightConfig, params: RateParams, horizon: float,
             rng: RngStream, phis: tuple = (), time_grid=None,
             observers: dict | None = None) -> Trajectory:
    """Run the accelerated dynamics to the macroscopic horizon.

    ``config`` is mutated in place (single-owner).  ``phis`` activates the
    martingale ledger for those test functions.  ``observers`` maps column
    names to callables (t, config) -> float evaluated at grid times.
    Integrals are accumulated exactly at every event; the incremental
    integrand caches are re-derived from the state at each grid point so
    float drift cannot build up across long runs.
    """
    if horizon <= 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    if config.N != params.N:
        raise ValueError(f"config N={config.N} does not match params N={params.N}")
    if time_grid is None:
        time_grid = np.linspace(0.0, horizon, 64)
    times = np.asarray(time_grid, dtype=float)
    if times[0] != 0.0 or (np.diff(times) <= 0).any() or abs(times[-1] - horizon) > 1e-12:
        raise ValueError("time grid must start at 0, increase, and end at the horizon")
    N = config.N
    labels, vals, grad, lap = _phi_tables(phis, N)
    ledger = MartingaleLedger(times, labels, N, params.gamma) if phis else None
    observers = observers or {}

    istate = np.array([config.Y, config.n_max, config.n_min, 0], dtype=np.int64)
    fstate = np.array([0.0])
    rng_state = rng.kernel_state()
    sums = _fresh_sums(config.xi, vals, grad, lap)
    accs = np.zeros((4, len(phis)))
    acc_misc = np.zeros(2)
    tau = params.tanh_term
    y0 = config.Y / N ** 2

    columns = {"Y": np.zeros(len(times)), "num_maxima": np.zeros(len(times))}
    for name in observers:
        columns[name] = np.zeros(len(times))

    def snapshot(i):
        columns["Y"][i] = istate[0] / N ** 2
        columns["num_maxima"][i] = istate[1]
        if ledger is not None:
            xb = config.xi.astype(np.float64) - 0.5
            for j, lb in enumerate(labels):
                ledger.U[lb][i] = float(vals[j] @ xb) / np.sqrt(N)
                ledger.K[lb][i] = accs[0, j] / (2.0 * np.sqrt(N))
                ledger.B[lb][i] = -np.sqrt(N) * tau * accs[1, j]
                ledger.QV[lb][i] = (0.5 * accs[2, j] + 0.5 * tau * accs[3, j]) / N
            ledger.Y[i] = istate[0] / N ** 2
            ledger.Ydrift[i] = tau * acc_misc[1]
            ledger.X[i] = istate[0] / N ** 2 - y0 + tau * acc_misc[1]
            ledger.QVX[i] = 2.0 * acc_misc[0] / N ** 2
        for name, fn in observers.items():
            try:
                columns[name][i] = fn(times[i], config)
            except Exception as exc:
                raise RuntimeError(f"observer {name!r} failed at t={times[i]}: {exc}") from exc

    snapshot(0)
    for i in range(1, len(times)):
        _kmc_run(config.xi, config.max_sites, config.max_pos,
                 config.min_sites, config.min_pos, istate, fstate, rng_state,
                 times[i], tau, lap, grad, grad * grad, sums, accs, acc_misc)
        sums[:] = _fresh_sums(config.xi, vals, grad, lap)
        snapshot(i)

    # sync the python-side caches from the kernel state
    config.Y = int(istate[0])
    slope_part = HeightConfig(0, config.xi.copy()).Y
    config.anchor = (config.Y - slope_part) // N
    config.n_max = int(istate[1])
    config.n_min = int(istate[2])
    return Trajectory(times=times, columns=columns, final_config=config,
                      ledger=ledger, n_events=int(istate[3]))


# ---------------------------------------------------------------------------
# Brute-force generator action (test oracle for the ledger's closed forms)
# ---------------------------------------------------------------------------

def generator_drift(config: HeightConfig, params: RateParams, f) -> float:
    """N^2 (L f)(h) summed corner by corner, with rates read from sgn(Y(h)).

    f maps a HeightConfig to a float.  O(corners * cost(f)); intended as an
    independent oracle for the ledger integrands, not for production runs.
    """
    s = config.sign()
    pd, pu = rates_for_sign(params, s)
    N2 = float(config.N) ** 2
    base = f(config)
    total = 0.0
    for x in config.maxima:
        flipped = config.copy()
        apply_flip(flipped, x)
        total += pd * (f(flipped) - base)
    for x in config.minima:
        flipped = config.copy()
        apply_flip(flipped, x)
        total += pu * (f(flipped) - base)
    return N2 * total
