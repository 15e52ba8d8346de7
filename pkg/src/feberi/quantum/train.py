"""Single passages and sequential electron trains.

After each electron the free electron is traced out and the reduced TLS
state becomes the initial state for the next one. The TLS is kept in the
interaction picture, so nothing happens to it between electrons.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..analytic import Arrival, TlsAmplitudes, TrainSpec
from ..coupling import KernelContext
from ..wavepacket import QewKind, QewSpec, build_amplitudes
from .grid import MAX_POINTS, MIN_GUARD_SIGMAS, Grid, build_grid, plan_steps
from .solver import DEFAULT_SAMPLES, CouplingTable, EvolveResult, evolve
from .state import TlsDensityMatrix, initial_joint_state, trace_out_electron


@dataclass(frozen=True)
class SolverOptions:
    dz_scale: float = 1.0
    dt_scale: float = 1.0
    kinetic_interval: float | None = None  # fs; default T21/10
    kinetic_stride: int | None = None  # overrides kinetic_interval
    samples: int = DEFAULT_SAMPLES
    guard_sigmas: float = MIN_GUARD_SIGMAS
    max_points: int = MAX_POINTS
    backend: str | None = None


@dataclass
class RunRecord:
    """Outcome of one electron passage."""

    index: int
    t0: float
    phi0: float
    rho_in: TlsDensityMatrix
    rho_b: TlsDensityMatrix
    times: np.ndarray = field(repr=False)
    p2_trace: np.ndarray = field(repr=False)
    coherent: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    tls0: np.ndarray = field(repr=False)

    @property
    def p2(self) -> float:
        return self.rho_b.p2

    @property
    def dp2(self) -> float:
        return self.rho_b.p2 - self.rho_in.p2

    def coherent_increment(self) -> complex:
        """Weighted ``<phi_free|psi_2> - C2(0)``: the quantum ``dC2`` of a pure start."""
        if self.weights.size != 1:
            raise ValueError("coherent increment is defined for a pure initial TLS state")
        return complex(self.coherent[0, 1] - self.tls0[0, 1])

    def first_order(self) -> float:
        """``2 Re(C2(0)* dC2)`` from the coherent projection."""
        return 2.0 * (np.conj(self.tls0[0, 1]) * self.coherent_increment()).real


class Passage:
    """Grid, coupling table and options shared by passages of one QEW shape."""

    def __init__(self, qew: QewSpec, ctx: KernelContext, options: SolverOptions | None = None):
        self.qew = qew
        self.ctx = ctx
        self.options = options or SolverOptions()
        o = self.options
        self.grid: Grid = build_grid(qew, ctx.kin, ctx.geom, dz_scale=o.dz_scale,
                                     guard_sigmas=o.guard_sigmas, max_points=o.max_points)
        self._plan0 = self._plan(0.0)
        self.table = CouplingTable.build(ctx, self.grid, self._plan0)

    def _plan(self, t0):
        o = self.options
        return plan_steps(self.grid, self.ctx.kin, self.ctx.tls.omega21, self.qew.sigma_et, t0,
                          o.dt_scale, o.kinetic_interval, o.kinetic_stride)

    @property
    def plan(self):
        return self._plan0

    def run(self, rho_in, arrival: Arrival | float = 0.0, index: int = 0,
            omega_b: float | None = None) -> RunRecord:
        """One electron with centroid arrival ``arrival`` from TLS state ``rho_in``."""
        if not isinstance(arrival, Arrival):
            arrival = Arrival(float(arrival), self.qew.phi0)
        w = self.ctx.tls.omega21
        wb = omega_b or self.qew.omega_b or w
        # whole bunching periods are dropped from the local time origin; the
        # TLS phase keeps them through the exactly reduced arrival phase
        t_local = arrival.offset if arrival.cycles is not None else arrival.t0
        qew = self.qew.with_arrival(t_local, arrival.phi0)
        amps = build_amplitudes(qew, self.ctx.kin)
        plan = self._plan(t_local)
        state = initial_joint_state(amps, rho_in, self.grid, plan.t_start)
        phase_start = arrival.phase(w, wb) - w * (plan.k0 + 0.5) * plan.dt
        res: EvolveResult = evolve(state, self.ctx, plan, phase_start, self.options.samples,
                                   self.table, self.options.backend)
        rho_b = trace_out_electron(res.state)
        rin = rho_in if isinstance(rho_in, TlsDensityMatrix) else (
            TlsDensityMatrix.from_amplitudes(rho_in) if isinstance(rho_in, TlsAmplitudes)
            else TlsDensityMatrix(rho_in))
        return RunRecord(index, arrival.t0, arrival.phi0, rin, rho_b,
                         res.times + (arrival.t0 - t_local), res.p2, res.coherent,
                         state.weights, state.tls0)


def run_single(qew: QewSpec, rho_in, ctx: KernelContext, options: SolverOptions | None = None) -> RunRecord:
    return Passage(qew, ctx, options).run(rho_in, Arrival(qew.t0, qew.phi0))


def run_train(train: TrainSpec, qew_template: QewSpec, rho_b0, ctx: KernelContext,
              seed: int | None = None, options: SolverOptions | None = None,
              progress=None) -> list[RunRecord]:
    """Sequential train; electron ``k`` uses ``train.draw(k)`` for its arrival and phase.

    ``seed`` overrides ``train.seed``. The same seed gives the same records.
    """
    if seed is not None:
        from dataclasses import replace
        train = replace(train, seed=seed)
    if qew_template.kind is QewKind.PINEM and abs(qew_template.omega_b - train.omega_b) > 1e-12 * train.omega_b:
        raise ValueError("QEW modulation frequency and train omega_b differ")
    passage = Passage(qew_template, ctx, options)
    records = []
    rho = rho_b0
    for k in range(train.n):
        rec = passage.run(rho, train.draw(k), k, train.omega_b)
        records.append(rec)
        rho = rec.rho_b
        if progress is not None:
            progress(rec)
    return records


def p2_series(records: list[RunRecord]) -> np.ndarray:
    return np.array([r.p2 for r in records])

