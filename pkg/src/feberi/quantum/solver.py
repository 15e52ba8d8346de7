"""Split-operator propagation of one electron passing the TLS.

Each coupling step rotates the two TLS components at every grid point the
kernel reaches, ``exp(-i theta (cos a sx - sin a sy))`` with
``theta = M(z) dt / hbar`` and ``a = omega21 t`` at the step midpoint (TLS in
the interaction picture, so the level splitting lives in ``a``). Kinetic
steps are exact in momentum space and applied every ``kinetic_stride``
coupling steps, symmetrically around each block of coupling steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from ..coupling import KernelContext, sample_kernel
from ..physical import HBAR
from ..wavepacket import GridError
from . import _backend
from .grid import Grid, StepPlan
from .state import EDGE_MASS_TOL, JointState, check_edges

NORM_DRIFT_TOL = 1e-8
DEFAULT_SAMPLES = 400


class StabilityError(RuntimeError):
    """Norm of a component drifted beyond tolerance."""


@dataclass(frozen=True)
class CouplingTable:
    """``cos`` and ``sin`` of ``theta = M(z) dt / hbar`` on a ``dz / r`` lattice."""

    cos_t: np.ndarray
    sin_t: np.ndarray
    half_width: int  # table index of z = 0
    z_cut: float

    @classmethod
    def build(cls, ctx: KernelContext, grid: Grid, plan: StepPlan) -> "CouplingTable":
        kern = sample_kernel(ctx.geom, ctx.tls, ctx.kin, grid.dz / plan.r)
        theta = kern.values * plan.dt / HBAR
        return cls(np.cos(theta), np.sin(theta), (kern.z.size - 1) // 2, kern.z_cut)

    def base(self, grid: Grid, plan: StepPlan) -> int:
        """Offset so that point ``i`` at step ``n`` reads entry ``r i + n + base``."""
        return -plan.r * (grid.n // 2) - plan.k0 + self.half_width


@dataclass
class EvolveResult:
    state: JointState
    times: np.ndarray  # fs, absolute
    p2: np.ndarray  # weighted upper-level population at ``times``
    coherent: np.ndarray  # (n_comp, 2): projections onto the freely evolved electron
    norm_drift: float
    plan: StepPlan


def kinetic_phase(grid: Grid, mass: float, duration: float) -> np.ndarray:
    """``exp(-i hbar k^2 t / (2 M))`` in FFT order."""
    k = grid.k
    return np.exp(-1j * HBAR * k * k * duration / (2.0 * mass))


def _apply_kinetic(psi: np.ndarray, phase: np.ndarray):
    psi[...] = sfft.ifft(sfft.fft(psi, axis=-1) * phase, axis=-1)


def _blocks(n_steps: int, stride: int) -> list[tuple[int, int]]:
    return [(a, min(a + stride, n_steps)) for a in range(0, n_steps, stride)]


def sample_steps(n_steps: int, samples: int) -> np.ndarray:
    """Step boundaries (0..n_steps) at which ``P2`` is recorded."""
    if samples <= 0:
        return np.zeros(0, dtype=int)
    if samples == 1:
        return np.array([n_steps])
    return np.unique(np.rint(np.linspace(0, n_steps, samples)).astype(int))


def evolve(state: JointState, ctx: KernelContext, plan: StepPlan, phase_start: float | None = None,
           samples: int = DEFAULT_SAMPLES, table: CouplingTable | None = None,
           backend: str | None = None) -> EvolveResult:
    """Propagate ``state`` over ``plan`` (in place) and return diagnostics.

    ``phase_start`` is ``omega21 * t_start`` reduced by the caller when the
    absolute time is large; by default it is computed from ``plan``.
    """
    grid = state.grid
    couple = _backend.couple_steps_for(backend)
    if table is None:
        table = CouplingTable.build(ctx, grid, plan)
    base = table.base(grid, plan)
    omega = ctx.tls.omega21
    if phase_start is None:
        phase_start = omega * plan.t_start
    phase_start = math.fmod(phase_start, 2.0 * math.pi)
    omega_dt = omega * plan.dt
    mass = ctx.kin.longitudinal_mass
    psi = state.psi
    norm0 = state.norms()
    phi_ref = _reference(state)

    blocks = _blocks(plan.n_steps, plan.kinetic_stride)
    marks = sample_steps(plan.n_steps, samples)
    p2 = np.empty(marks.size)
    mark = 0
    phases = {}

    def kin(steps2):
        # steps2 is twice the kinetic duration in units of dt
        if steps2 not in phases:
            phases[steps2] = kinetic_phase(grid, mass, 0.5 * steps2 * plan.dt)
        _apply_kinetic(psi, phases[steps2])

    def record(n):
        nonlocal mark
        while mark < marks.size and marks[mark] == n:
            p2[mark] = state.p2()
            mark += 1

    record(0)
    prev_len = 0
    for a, b in blocks:
        kin(prev_len + (b - a))
        n = a
        while n < b:
            stop = b
            if mark < marks.size and a < marks[mark] < b:
                stop = int(marks[mark])
            couple(psi, table.cos_t, table.sin_t, base, plan.r, n, stop, phase_start, omega_dt)
            n = stop
            if n < b:
                record(n)
        prev_len = b - a
        if b == plan.n_steps:
            kin(prev_len)
        record(b)

    drift = float(np.max(np.abs(state.norms() - norm0)))
    if drift > NORM_DRIFT_TOL:
        raise StabilityError(f"norm drift {drift:.3g} exceeds {NORM_DRIFT_TOL}")
    try:
        check_edges(psi, grid, EDGE_MASS_TOL)
    except GridError as exc:
        raise GridError(f"after evolution: {exc}") from None

    phi_ref = sfft.ifft(sfft.fft(phi_ref) * kinetic_phase(grid, mass, plan.duration))
    coherent = np.einsum("cjn,n->cj", psi, phi_ref.conj()) * grid.dz
    times = plan.t_start + marks * plan.dt
    return EvolveResult(state, times, p2, coherent, drift, plan)


def _reference(state: JointState) -> np.ndarray:
    """Initial electron wavefunction shared by all product components."""
    c, j = np.unravel_index(np.argmax(np.abs(state.tls0)), state.tls0.shape)
    return state.psi[c, j] / state.tls0[c, j]
