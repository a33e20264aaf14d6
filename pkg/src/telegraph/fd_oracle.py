"""Time-marching finite-difference reference for the periodic damped wave problem.

Leapfrog in time, centred second difference in space, centred damping and a
ghost-point Neumann closure (``u[-1] = u[1]``, ``u[nx] = u[nx-2]``). Starting
from rest, the scheme is marched over whole forcing periods until the
response is periodic; damping (``mu > 0``) makes that regime attracting on
mean-zero data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .spectral import GridField, ParameterError, SpectralError, SpectralField, synthesize


class CFLError(SpectralError):
    pass


class ConvergenceError(SpectralError):
    def __init__(self, message: str, differences):
        super().__init__(message)
        self.differences = list(differences)


@dataclass(frozen=True)
class FDConfig:
    nx: int = 201
    dt_steps: int = 800
    n_periods: int = 60
    cfl_check: bool = True


@dataclass
class MarchResult:
    field: GridField
    period_differences: list = field(default_factory=list)
    tolerance: float = 0.0

    @property
    def decay_factor(self) -> float:
        """Geometric mean ratio of successive period-to-period differences.

        Only differences above the roundoff floor (``1e-10`` of the first one)
        enter, so the value reflects the contraction rate of the transient.
        """
        d = self.period_differences
        if len(d) < 2 or d[0] <= 0:
            return 0.0
        d = [x for x in d if x > 1e-10 * d[0]]
        if len(d) < 2:
            return 0.0
        return float((d[-1] / d[0]) ** (1.0 / (len(d) - 1)))


def _trapezoid_weights(nx: int) -> np.ndarray:
    w = np.full(nx, 1.0 / (nx - 1))
    w[0] = w[-1] = 0.5 / (nx - 1)
    return w


def _laplacian(u: np.ndarray, h: float) -> np.ndarray:
    out = np.empty_like(u)
    out[1:-1] = u[2:] - 2.0 * u[1:-1] + u[:-2]
    out[0] = 2.0 * (u[1] - u[0])
    out[-1] = 2.0 * (u[-2] - u[-1])
    return out / (h * h)


def _steps(nx, nt, period):
    return 1.0 / (nx - 1), period / nt


def _check_cfl(cfg: FDConfig, period: float):
    h, k = _steps(cfg.nx, cfg.dt_steps, period)
    if cfg.cfl_check and k > h:
        raise CFLError(f"time step {k:.3e} exceeds space step {h:.3e}")


def march_report(f: GridField, mu: float, cfg: FDConfig) -> MarchResult:
    """March to the periodic regime and return the last period with history."""
    if mu <= 0:
        raise ParameterError("the marching oracle needs mu > 0")
    if f.nx != cfg.nx or f.nt != cfg.dt_steps:
        raise SpectralError(f"forcing grid {f.nx}x{f.nt} does not match config {cfg.nx}x{cfg.dt_steps}")
    period = f.params.period
    _check_cfl(cfg, period)
    wx = _trapezoid_weights(cfg.nx)
    fmax = float(np.max(np.abs(f.values)))
    mean = float(np.sum(wx[:, None] * f.values) / f.nt)
    if abs(mean) > 1e-10 * max(fmax, 1e-300):
        raise ParameterError(f"forcing must have zero space-time mean, got {mean:.3e}")
    h, k = _steps(cfg.nx, cfg.dt_steps, period)
    a = mu * k
    prev = np.zeros(cfg.nx)
    cur = np.zeros(cfg.nx)
    last = None
    diffs = []
    block = np.empty((cfg.nx, cfg.dt_steps))
    forcing = f.values
    for _ in range(cfg.n_periods):
        for j in range(cfg.dt_steps):
            block[:, j] = cur
            rhs = 2.0 * cur - (1.0 - a) * prev + k * k * (_laplacian(cur, h) + forcing[:, j])
            prev, cur = cur, rhs / (1.0 + a)
        if last is not None:
            d = block - last
            diffs.append(math.sqrt(float(np.sum(wx[:, None] * d * d)) / cfg.dt_steps))
        last = block.copy()
    tol = 10.0 * (h * h + k * k) * max(fmax, 1e-300)
    if not diffs or diffs[-1] > tol:
        trend = ", ".join(f"{x:.2e}" for x in diffs[-5:])
        raise ConvergenceError(
            f"no periodic regime after {cfg.n_periods} periods (last differences: {trend}; tolerance {tol:.2e})", diffs
        )
    out = last - np.sum(wx[:, None] * last) / cfg.dt_steps
    return MarchResult(GridField(f.params, out), diffs, tol)


def march(f: GridField, mu: float, cfg: FDConfig) -> GridField:
    return march_report(f, mu, cfg).field


def energy_history(u0: np.ndarray, u1: np.ndarray, mu: float, period: float, cfg: FDConfig, steps: int) -> np.ndarray:
    """Discrete energy of the unforced scheme started from two time levels.

    Uses ``E = |(u^{n+1} - u^n)/dt|^2 / 2 + <-D u^{n+1}, u^n> / 2`` in the
    trapezoid inner product, which the scheme does not increase for ``mu >= 0``.
    """
    _check_cfl(cfg, period)
    h, k = _steps(cfg.nx, cfg.dt_steps, period)
    wx = _trapezoid_weights(cfg.nx)
    a = mu * k
    prev, cur = np.asarray(u0, float).copy(), np.asarray(u1, float).copy()
    out = []
    for _ in range(steps):
        vel = (cur - prev) / k
        out.append(0.5 * np.sum(wx * vel * vel) - 0.5 * np.sum(wx * _laplacian(cur, h) * prev))
        nxt = (2.0 * cur - (1.0 - a) * prev + k * k * _laplacian(cur, h)) / (1.0 + a)
        prev, cur = cur, nxt
    return np.array(out)


def compare(spectral_u: SpectralField, fd_u: GridField) -> float:
    """Relative space-time ``L^2`` distance after removing both means."""
    if spectral_u.params.omega != fd_u.params.omega:
        raise SpectralError("fields describe different periods")
    ref = synthesize(spectral_u, fd_u.nx, fd_u.nt).values
    wx = _trapezoid_weights(fd_u.nx)[:, None]

    def centred(v):
        return v - np.sum(wx * v) / v.shape[1]

    a, b = centred(fd_u.values), centred(ref)
    den = math.sqrt(float(np.sum(wx * b * b)))
    num = math.sqrt(float(np.sum(wx * (a - b) ** 2)))
    return num / den if den > 0 else num
