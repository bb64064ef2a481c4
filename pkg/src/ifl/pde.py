"""Solver for the coupled density/integral system with absorption at zero.

The limit object is the pair (rho, Y) evolving as

    d/dt rho = (1/2) Lap rho - sgn(Y) Grad[rho (1 - rho)],
    d/dt Y   = -2 sgn(Y) <rho, 1 - rho>,

where the sign is frozen to 0 forever once Y hits zero (the unique weak
solution is Burgers flow up to the hitting time tau0, then pure heat).
Space is discretised with periodic central differences in divergence form,
time with explicit Heun steps dt = dt_safety * dx^2; both operators sum to
zero over the torus, so the mass (1/M) sum rho_i is conserved to rounding.
Zero crossings of Y inside a step are located by bisection on the step
size to 1e-12, at which point Y is set to 0, the absorbed flag raised and
tau0 recorded.

The height form

    d/dt h = (1/2) Lap h - (1/2) sgn(Y) [1 - (Grad h)^2],   Y = int h,

is integrated by the same scheme; rho = (Grad h + 1)/2 then satisfies the
density equation, which the tests cross-check.  (The drift sign follows
from the microscopic dynamics: a positive integral biases maxima to flip
down, so heights drift downward; d/dt int h = -2 sgn(Y) <rho, 1-rho> < 0.)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

__all__ = [
    "PdeState", "PdeTrajectory", "solve_coupled", "solve_height",
    "heat_reference", "solve_coupled_semi_implicit", "grid_values",
]


@dataclass
class PdeState:
    M: int
    rho: np.ndarray
    Y: float
    absorbed: bool
    t: float
    tau0: float | None


@dataclass
class PdeTrajectory:
    times: np.ndarray
    rho: np.ndarray          # (ngrid, M)
    Y: np.ndarray
    absorbed: np.ndarray
    tau0: float | None
    M: int
    dt_safety: float

    def state(self, i: int) -> PdeState:
        return PdeState(self.M, self.rho[i].copy(), float(self.Y[i]),
                        bool(self.absorbed[i]), float(self.times[i]), self.tau0)

    def pair_with(self, phi_values: np.ndarray) -> np.ndarray:
        """<rho_t, phi> by the midpoint rule on the solver grid, per grid time."""
        return self.rho @ np.asarray(phi_values) / self.M

    def to_csv(self, stride: int = 1) -> str:
        cols = ["t", "Y", "absorbed"] + [f"rho_{i}" for i in range(0, self.M, stride)]
        lines = [",".join(cols)]
        for i, t in enumerate(self.times):
            row = [f"{t:.17g}", f"{self.Y[i]:.17g}", str(int(self.absorbed[i]))]
            row += [f"{v:.17g}" for v in self.rho[i, ::stride]]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def summary(self) -> dict:
        return {"tau0": self.tau0, "Y0": float(self.Y[0]), "M": self.M,
                "dt_safety": self.dt_safety}


def grid_values(fn, M: int) -> np.ndarray:
    """Evaluate a profile callable on the solver nodes i/M."""
    return np.asarray(fn(np.arange(M) / M), dtype=float)


# ---------------------------------------------------------------------------
# Heun stepping kernels
# ---------------------------------------------------------------------------

@njit(cache=True, inline="always")
def _rhs_density(rho, s, M, out):
    """(1/2) D2 rho - s * D1[rho(1-rho)], periodic central differences."""
    m2 = float(M) * float(M)
    half_m = 0.5 * float(M)
    n = rho.shape[0]
    for i in range(n):
        ip = i + 1 if i + 1 < n else 0
        im = i - 1 if i > 0 else n - 1
        lap = (rho[ip] - 2.0 * rho[i] + rho[im]) * m2
        gp = rho[ip] * (1.0 - rho[ip])
        gm = rho[im] * (1.0 - rho[im])
        out[i] = 0.5 * lap - s * (gp - gm) * half_m
    # d/dt Y = -2 s <rho, 1-rho>
    acc = 0.0
    for i in range(n):
        acc += rho[i] * (1.0 - rho[i])
    return -2.0 * s * acc / n


@njit(cache=True)
def _heun_density(rho, Y, s, dt, out_rho):
    """One Heun step from (rho, Y); writes new rho to out_rho, returns new Y."""
    n = rho.shape[0]
    M = n
    k1 = np.empty(n)
    k2 = np.empty(n)
    dY1 = _rhs_density(rho, s, M, k1)
    mid = np.empty(n)
    for i in range(n):
        mid[i] = rho[i] + dt * k1[i]
    dY2 = _rhs_density(mid, s, M, k2)
    for i in range(n):
        out_rho[i] = rho[i] + 0.5 * dt * (k1[i] + k2[i])
    return Y + 0.5 * dt * (dY1 + dY2)


@njit(cache=True, inline="always")
def _rhs_height(h, s, M, out):
    """(1/2) D2 h - (s/2) [1 - (D1 h)^2]."""
    m2 = float(M) * float(M)
    half_m = 0.5 * float(M)
    n = h.shape[0]
    for i in range(n):
        ip = i + 1 if i + 1 < n else 0
        im = i - 1 if i > 0 else n - 1
        lap = (h[ip] - 2.0 * h[i] + h[im]) * m2
        grad = (h[ip] - h[im]) * half_m
        out[i] = 0.5 * lap - 0.5 * s * (1.0 - grad * grad)
    acc = 0.0
    for i in range(n):
        acc += h[i]
    return acc / n  # current integral, for crossing detection


@njit(cache=True)
def _heun_height(h, s, dt, out_h):
    n = h.shape[0]
    k1 = np.empty(n)
    k2 = np.empty(n)
    _rhs_height(h, s, n, k1)
    mid = np.empty(n)
    for i in range(n):
        mid[i] = h[i] + dt * k1[i]
    _rhs_height(mid, s, n, k2)
    for i in range(n):
        out_h[i] = h[i] + 0.5 * dt * (k1[i] + k2[i])


# ---------------------------------------------------------------------------
# Drivers
# ---------------------------------------------------------------------------

_RANGE_TOL = 1e-12
_CROSS_TOL = 1e-12
_MAX_HALVINGS = 40


def _validate_grid(M, dt_safety):
    if M < 16 or (M & (M - 1)) != 0:
        raise ValueError(f"grid size must be a power of two >= 16, got {M}")
    if not 0 < dt_safety <= 1:
        raise ValueError(f"dt_safety must lie in (0, 1], got {dt_safety}")


def solve_coupled(rho0, Y0: float, T: float, M: int,
                  dt_safety: float = 0.4, time_grid=None) -> PdeTrajectory:
    """Integrate the coupled system to time T, recording on a time grid."""
    _validate_grid(M, dt_safety)
    if T <= 0:
        raise ValueError(f"T must be positive, got {T}")
    rho = np.asarray(rho0, dtype=float).copy()
    if rho.shape != (M,):
        raise ValueError(f"rho0 must have shape ({M},), got {rho.shape}")
    if rho.min() < 0 or rho.max() > 1:
        raise ValueError("rho0 must take values in [0, 1]")
    times = (np.linspace(0.0, T, 65) if time_grid is None
             else np.asarray(time_grid, dtype=float))
    Y = float(Y0)
    absorbed = Y == 0.0
    tau0 = 0.0 if absorbed else None
    dt_base = dt_safety / (M * M)

    out_rho = np.empty((len(times), M))
    out_Y = np.empty(len(times))
    out_abs = np.zeros(len(times), dtype=bool)
    t = float(times[0])
    if times[0] != 0.0:
        raise ValueError("time grid must start at 0")
    out_rho[0] = rho
    out_Y[0] = Y
    out_abs[0] = absorbed

    scratch = np.empty(M)
    for gi in range(1, len(times)):
        t_target = float(times[gi])
        while t < t_target - 1e-15 * max(1.0, t_target):
            dt = min(dt_base, t_target - t)
            s = 0.0 if absorbed else float(np.sign(Y))
            newY = _heun_density(rho, Y, s, dt, scratch)
            if (not absorbed) and _crossed(Y, newY):
                dt_star, rho_star = _bisect_crossing(rho, Y, s, dt)
                rho[:] = rho_star
                Y = 0.0
                absorbed = True
                tau0 = t + dt_star
                t += dt_star
                continue
            if scratch.min() < -_RANGE_TOL or scratch.max() > 1.0 + _RANGE_TOL:
                dt_ok, newY = _retry_step(rho, Y, s, dt, scratch)
                if dt_ok is None:
                    raise RuntimeError(
                        f"density left [0,1] beyond {_RANGE_TOL} at t={t} even "
                        f"after {_MAX_HALVINGS} step halvings")
                t += dt_ok
                rho, scratch = scratch, rho
                Y = newY
                continue
            rho, scratch = scratch, rho
            Y = newY
            t += dt
        out_rho[gi] = rho
        out_Y[gi] = Y
        out_abs[gi] = absorbed
    return PdeTrajectory(times=times, rho=out_rho, Y=out_Y, absorbed=out_abs,
                         tau0=tau0, M=M, dt_safety=dt_safety)


def _crossed(Y, newY):
    return (newY == 0.0) or (newY > 0.0) != (Y > 0.0)


def _bisect_crossing(rho, Y, s, dt):
    """Step size h in (0, dt] with Y(h) = 0 to 1e-12, by bisection from the
    same initial state; returns (h, rho(h))."""
    lo, hi = 0.0, dt
    trial = np.empty_like(rho)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        y_mid = _heun_density(rho, Y, s, mid, trial)
        if abs(y_mid) <= _CROSS_TOL:
            return mid, trial
        if (y_mid > 0.0) == (Y > 0.0):
            lo = mid
        else:
            hi = mid
    y_hi = _heun_density(rho, Y, s, hi, trial)
    return hi, trial


def _retry_step(rho, Y, s, dt, scratch):
    """Halve dt until the range invariant holds; returns (dt_used, newY)."""
    for _ in range(_MAX_HALVINGS):
        dt *= 0.5
        newY = _heun_density(rho, Y, s, dt, scratch)
        if scratch.min() >= -_RANGE_TOL and scratch.max() <= 1.0 + _RANGE_TOL:
            return dt, newY
    return None, None


def solve_height(h0, T: float, M: int, dt_safety: float = 0.4,
                 time_grid=None, slope_gate: float = 1e-3) -> PdeTrajectory:
    """Integrate the height form; trajectory carries h in the rho slot.

    Initial data with |grad h0| >= 1 - slope_gate anywhere is rejected: the
    density it induces leaves (0,1) and the smooth-grid scheme does not
    apply there.
    """
    _validate_grid(M, dt_safety)
    if T <= 0:
        raise ValueError(f"T must be positive, got {T}")
    h = np.asarray(h0, dtype=float).copy()
    if h.shape != (M,):
        raise ValueError(f"h0 must have shape ({M},), got {h.shape}")
    grad = (np.roll(h, -1) - np.roll(h, 1)) * (M / 2.0)
    if np.abs(grad).max() > 1.0 - slope_gate:
        raise ValueError(
            f"initial slope magnitude {np.abs(grad).max():.6f} exceeds the "
            f"gate 1 - {slope_gate}")
    times = (np.linspace(0.0, T, 65) if time_grid is None
             else np.asarray(time_grid, dtype=float))
    Y = float(h.mean())
    absorbed = Y == 0.0
    tau0 = 0.0 if absorbed else None
    dt_base = dt_safety / (M * M)

    out_h = np.empty((len(times), M))
    out_Y = np.empty(len(times))
    out_abs = np.zeros(len(times), dtype=bool)
    out_h[0] = h
    out_Y[0] = Y
    out_abs[0] = absorbed
    t = 0.0
    scratch = np.empty(M)
    for gi in range(1, len(times)):
        t_target = float(times[gi])
        while t < t_target - 1e-15 * max(1.0, t_target):
            dt = min(dt_base, t_target - t)
            s = 0.0 if absorbed else float(np.sign(Y))
            _heun_height(h, s, dt, scratch)
            newY = float(scratch.mean())
            if (not absorbed) and _crossed(Y, newY):
                lo, hi = 0.0, dt
                for _ in range(200):
                    mid = 0.5 * (lo + hi)
                    _heun_height(h, s, mid, scratch)
                    ymid = float(scratch.mean())
                    if abs(ymid) <= _CROSS_TOL:
                        break
                    if (ymid > 0.0) == (Y > 0.0):
                        lo = mid
                    else:
                        hi = mid
                h, scratch = scratch, h
                # absorb: remove the sub-tolerance residual mean so int h = 0
                # holds exactly and is conserved by the pure-heat flow after
                h -= h.mean()
                Y = 0.0
                absorbed = True
                tau0 = t + mid
                t += mid
                continue
            h, scratch = scratch, h
            Y = newY
            t += dt
        out_h[gi] = h
        out_Y[gi] = Y
        out_abs[gi] = absorbed
    return PdeTrajectory(times=times, rho=out_h, Y=out_Y, absorbed=out_abs,
                         tau0=tau0, M=M, dt_safety=dt_safety)


# ---------------------------------------------------------------------------
# References and the independent comparison solver
# ---------------------------------------------------------------------------

def heat_reference(modes, t: float, M: int) -> np.ndarray:
    """Exact pure-heat solution on the grid from Fourier data.

    ``modes`` is a sequence of (k, a, b) meaning a cos(2 pi k u) + b sin(2 pi k u)
    (k = 0 encodes the constant a); mode k decays by e^{-2 pi^2 k^2 t} under
    the generator (1/2) Lap.
    """
    u = np.arange(M) / M
    out = np.zeros(M)
    for k, a, b in modes:
        decay = math.exp(-2.0 * math.pi ** 2 * k ** 2 * t)
        if k == 0:
            out += a * decay  # decay == 1; the constant mode never moves
        else:
            out += decay * (a * np.cos(2 * np.pi * k * u) + b * np.sin(2 * np.pi * k * u))
    return out


def solve_coupled_semi_implicit(rho0, Y0: float, T: float, M: int,
                                dt_safety: float = 0.4, time_grid=None) -> PdeTrajectory:
    """Independent checker: diffusion implicit in Fourier space, drift explicit.

    Shares nothing with the Heun path except the grid; used to bound the
    pre-absorption discrepancy of the primary solver.
    """
    _validate_grid(M, dt_safety)
    rho = np.asarray(rho0, dtype=float).copy()
    times = (np.linspace(0.0, T, 65) if time_grid is None
             else np.asarray(time_grid, dtype=float))
    Y = float(Y0)
    absorbed = Y == 0.0
    tau0 = 0.0 if absorbed else None
    dt_base = dt_safety / (M * M)
    k = np.fft.rfftfreq(M, d=1.0 / M)
    lam = -(2.0 - 2.0 * np.cos(2 * np.pi * k / M)) * M * M  # discrete Laplacian symbol

    out_rho = np.empty((len(times), M))
    out_Y = np.empty(len(times))
    out_abs = np.zeros(len(times), dtype=bool)
    out_rho[0] = rho
    out_Y[0] = Y
    out_abs[0] = absorbed
    t = 0.0
    for gi in range(1, len(times)):
        t_target = float(times[gi])
        while t < t_target - 1e-15 * max(1.0, t_target):
            dt = min(dt_base, t_target - t)
            s = 0.0 if absorbed else float(np.sign(Y))
            g = rho * (1.0 - rho)
            drift = -s * (np.roll(g, -1) - np.roll(g, 1)) * (M / 2.0)
            rhat = np.fft.rfft(rho + dt * drift)
            rho = np.fft.irfft(rhat / (1.0 - 0.5 * dt * lam), n=M)
            newY = Y - dt * 2.0 * s * float(np.mean(rho * (1.0 - rho)))
            if (not absorbed) and _crossed(Y, newY):
                absorbed = True
                tau0 = t + dt
                newY = 0.0
            Y = newY
            t += dt
        out_rho[gi] = rho
        out_Y[gi] = Y
        out_abs[gi] = absorbed
    return PdeTrajectory(times=times, rho=out_rho, Y=out_Y, absorbed=out_abs,
                         tau0=tau0, M=M, dt_safety=dt_safety)
