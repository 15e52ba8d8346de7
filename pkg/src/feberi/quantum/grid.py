"""Spatial grid and time-step plan for the joint electron/TLS solver.

The electron is propagated in the frame moving with the beam centre,
``s = z - v0 (t - t0)``, with the carrier ``exp(i p0 z / hbar)`` and the
rest-energy phase factored out. In that frame only the quadratic part of the
dispersion is left for the kinetic step and the TLS sweeps across the grid at
``-v0``, so the grid needs to hold the packet but not its flight path.

Time steps are tied to the grid: ``v0 dt = dz / r`` for an integer ``r``.
The TLS then advances by exactly ``1/r`` cell per step and the coupling for
grid point ``i`` at step ``n`` is the kernel sampled at ``(r i + n + base) dz / r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..coupling import Geometry
from ..physical import Kinematics, sigma_p0
from ..wavepacket import QewKind, QewSpec, drifted_sigma_z, sideband_momentum

MAX_POINTS = 2**20
SUPPORT_SIGMAS = 8.0  # packet support on each side of the centroid
MIN_GUARD_SIGMAS = 8.0
CELLS_PER_SCALE = 8  # dz = (r_perp0 / gamma) / 8
WINDOW_SIGMAS = 4.0
WINDOW_TRANSITS = 10.0
DT_TRANSIT_FRACTION = 1.0 / 20.0
DT_PERIOD_FRACTION = 1.0 / 200.0
KINETIC_PERIOD_FRACTION = 1.0 / 10.0


class SizingError(ValueError):
    """Requested resolution and span do not fit the point ceiling."""


@dataclass(frozen=True)
class Grid:
    """Uniform co-moving grid ``s_i = (i - N/2) dz``."""

    n: int
    dz: float
    guard: float  # nm of margin beyond the packet support

    @property
    def length(self) -> float:
        return self.n * self.dz

    @property
    def s(self) -> np.ndarray:
        return self.dz * (np.arange(self.n) - self.n // 2)

    @property
    def k(self) -> np.ndarray:
        """Angular wavenumbers in FFT order (1/nm)."""
        return 2.0 * math.pi * np.fft.fftfreq(self.n, d=self.dz)


@dataclass(frozen=True)
class StepPlan:
    """Time stepping of one electron passage.

    Step ``n`` covers ``[t_start + n dt, t_start + (n+1) dt]``; the window
    is symmetric about the centroid arrival ``t0``.
    """

    dt: float
    r: int
    n_steps: int
    k0: int  # t_start = t0 - (k0 + 1/2) dt
    t0: float
    kinetic_stride: int

    @property
    def t_start(self) -> float:
        return self.t0 - (self.k0 + 0.5) * self.dt

    @property
    def t_end(self) -> float:
        return self.t_start + self.n_steps * self.dt

    @property
    def duration(self) -> float:
        return self.n_steps * self.dt


def packet_support(qew: QewSpec, kin: Kinematics, t_total: float = 0.0) -> tuple[float, float]:
    """Half-width of the packet support and its rms length (nm).

    Accounts for dispersive spreading over ``t_total`` and, for a PINEM
    packet, the walk-off of the outermost retained sidebands after the drift.
    """
    from ..wavepacket import sideband_cutoff

    sz = drifted_sigma_z(qew, kin)
    sp = sigma_p0(qew.sigma_et, kin)
    sz = math.hypot(sz, sp * t_total / kin.longitudinal_mass)
    walk = 0.0
    if qew.kind is QewKind.PINEM:
        m_max = sideband_cutoff(qew.g_L)
        tau = qew.drift_length / kin.v0
        walk = m_max * sideband_momentum(qew.omega_b, kin) * tau / kin.longitudinal_mass
    return SUPPORT_SIGMAS * sz + walk, sz


def build_grid(qew: QewSpec, kin: Kinematics, geom: Geometry, t_total: float | None = None,
               dz_scale: float = 1.0, guard_sigmas: float = MIN_GUARD_SIGMAS,
               max_points: int = MAX_POINTS) -> Grid:
    """Smallest power-of-two grid holding the packet with the requested guard.

    ``guard_sigmas`` is the total margin in units of the envelope rms length
    and must be at least 8.
    """
    if not 0 < dz_scale <= 1:
        raise SizingError(f"dz_scale must lie in (0, 1], got {dz_scale}")
    if not guard_sigmas >= MIN_GUARD_SIGMAS:
        raise SizingError(f"guard margin {guard_sigmas} sigma_z below the minimum {MIN_GUARD_SIGMAS}")
    min_total = 6.0 * qew.sigma_et + 2.0 * WINDOW_TRANSITS * kin.transit_time
    if t_total is None:
        t_total = 2.0 * (WINDOW_SIGMAS * qew.sigma_et + WINDOW_TRANSITS * kin.transit_time)
    elif t_total < min_total:
        raise SizingError(f"T_total = {t_total:.4g} fs shorter than 6 sigma_et plus transit margin "
                          f"({min_total:.4g} fs)")
    dz = dz_scale * geom.r_perp0 / kin.gamma0 / CELLS_PER_SCALE
    half, sz = packet_support(qew, kin, t_total)
    guard = guard_sigmas * sz
    need = 2.0 * half + guard
    n = 16
    while n * dz < need:
        n *= 2
    if n > max_points:
        raise SizingError(
            f"grid needs {n} points (span {need:.4g} nm at dz = {dz:.4g} nm), ceiling is {max_points}")
    return Grid(n, dz, n * dz - 2.0 * half)


def plan_steps(grid: Grid, kin: Kinematics, omega21: float, sigma_et: float, t0: float = 0.0,
               dt_scale: float = 1.0, kinetic_interval: float | None = None,
               kinetic_stride: int | None = None) -> StepPlan:
    """Time step, window and kinetic sub-cycling for one passage.

    ``dt`` is the largest ``dz / (r v0)`` not above
    ``dt_scale * min(t_r/20, T21/200)``. The kinetic step is applied every
    ``kinetic_stride`` coupling steps (default: about ``T21/10``); a stride of
    1 gives the plain symmetric splitting.
    """
    if not dt_scale > 0:
        raise SizingError("dt_scale must be > 0")
    period = 2.0 * math.pi / omega21
    dt_max = dt_scale * min(kin.transit_time * DT_TRANSIT_FRACTION, period * DT_PERIOD_FRACTION)
    r = max(1, math.ceil(grid.dz / (kin.v0 * dt_max) - 1e-12))
    dt = grid.dz / (r * kin.v0)
    half = WINDOW_SIGMAS * sigma_et + WINDOW_TRANSITS * kin.transit_time
    k0 = math.ceil(half / dt - 0.5)
    n_steps = 2 * k0 + 1
    if kinetic_stride is None:
        interval = period * KINETIC_PERIOD_FRACTION if kinetic_interval is None else kinetic_interval
        kinetic_stride = max(1, int(round(interval / dt)))
    if kinetic_stride < 1:
        raise SizingError("kinetic_stride must be >= 1")
    return StepPlan(dt, r, n_steps, k0, t0, int(kinetic_stride))
