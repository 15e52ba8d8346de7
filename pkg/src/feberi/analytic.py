"""Closed-form transition amplitudes of the point-particle (Born) model.

An electron whose arrival-time density at the TLS is ``D(T)`` changes the
interaction-picture amplitudes by

    dC2 = C1 M~(w/v0) D^(+w) / (i hbar v0),   dC1 = C2 M~(-w/v0) D^(-w) / (i hbar v0)

with ``D^(w) = int dT exp(i w T) D(T)`` and ``w = omega21``. A Gaussian
envelope of rms duration ``sigma_et`` centred at ``t0`` gives
``D^(w) = exp(i w t0 - w^2 sigma_et^2 / 2)``; a modulated envelope adds one
such term per harmonic ``m``, shifted to ``w - m omega_b`` and weighted by
``f_m exp(i m omega_b t_L)``.

Amplitudes are interaction-picture values, i.e. Schrodinger amplitudes
referred to ``t = 0``.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .coupling import KernelContext
from .physical import HBAR, ParameterError
from .rng import ARRIVALS, PHASES, check_seed, substream
from .wavepacket import ModulationSpectrum, QewKind, QewSpec

NORM_TOL = 1e-9
SMALL_SIGNAL_LIMIT = 0.3
IN_PHASE_CYCLES = 10**6


class ValidityWarning(UserWarning):
    """A model is evaluated outside the regime where it is derived."""


@dataclass(frozen=True)
class TlsAmplitudes:
    """TLS amplitudes ``C1`` (ground) and ``C2`` (excited)."""

    c1: complex
    c2: complex
    check: bool = field(default=True, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "c1", complex(self.c1))
        object.__setattr__(self, "c2", complex(self.c2))
        if self.check and abs(self.norm - 1.0) > NORM_TOL:
            raise ParameterError(f"|C1|^2 + |C2|^2 = {self.norm!r}, expected 1")

    @classmethod
    def ground(cls) -> "TlsAmplitudes":
        return cls(1.0, 0.0)

    @classmethod
    def excited(cls) -> "TlsAmplitudes":
        return cls(0.0, 1.0)

    @classmethod
    def superposition(cls, a: complex, b: complex) -> "TlsAmplitudes":
        """``(a|1> + b|2>)`` normalised."""
        n = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
        if n == 0:
            raise ParameterError("null state")
        return cls(a / n, b / n)

    @property
    def norm(self) -> float:
        return abs(self.c1) ** 2 + abs(self.c2) ** 2

    @property
    def p2(self) -> float:
        return abs(self.c2) ** 2

    @property
    def phase(self) -> float:
        """Relative phase ``arg C2 - arg C1`` at ``t = 0``."""
        return cmath.phase(self.c2) - cmath.phase(self.c1)

    def zeta(self, omega: float, t0: float) -> float:
        return self.phase - omega * t0

    def vector(self) -> np.ndarray:
        return np.array([self.c1, self.c2])

    def updated(self, dc1: complex, dc2: complex, renormalize: bool = False) -> "TlsAmplitudes":
        c1, c2 = self.c1 + dc1, self.c2 + dc2
        if renormalize:
            n = math.sqrt(abs(c1) ** 2 + abs(c2) ** 2)
            return TlsAmplitudes(c1 / n, c2 / n)
        return TlsAmplitudes(c1, c2, check=False)


@dataclass(frozen=True)
class TransitionReport:
    """Upper-level probability before and after one electron."""

    p_prev: float
    dp1: float
    dp2: float
    p_post: float
    dc2: complex = 0j

    @property
    def dp(self) -> float:
        return self.dp1 + self.dp2


class ArrivalLaw(str, Enum):
    IN_PHASE = "in_phase"
    UNIFORM_RANDOM = "uniform_random"
    FIXED_LIST = "fixed_list"


class PhaseLaw(str, Enum):
    COMMON = "common_phi0"
    RANDOM = "random_phi0"


@dataclass(frozen=True)
class Arrival:
    """Centroid arrival ``t0 = offset + cycles * T_b`` and modulation phase."""

    t0: float
    phi0: float = 0.0
    offset: float = 0.0
    cycles: int | None = None

    def phase(self, omega: float, omega_b: float) -> float:
        """``omega * t0``; the whole-period part is reduced exactly when known."""
        if self.cycles is None:
            return omega * self.t0
        frac = math.fmod(self.cycles * (omega / omega_b), 1.0)
        return omega * self.offset + 2.0 * math.pi * frac


@dataclass(frozen=True)
class TrainSpec:
    """Stochastic multi-electron sequence.

    ``in_phase`` arrivals are ``t00 + n_k T_b`` with ``n_k`` uniform over
    ``[0, 10^6)``; ``uniform_random`` arrivals are ``t00 + U[0, T_b)``;
    ``fixed_list`` takes ``arrival_times`` verbatim. Draws for electron ``k``
    come from their own substream, see :mod:`feberi.rng`.
    """

    n: int
    omega_b: float
    arrival_law: ArrivalLaw = ArrivalLaw.IN_PHASE
    phase_law: PhaseLaw = PhaseLaw.COMMON
    harmonic: int = 1
    seed: int = 0
    t00: float = 0.0
    phi0: float = 0.0
    arrival_times: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "arrival_law", ArrivalLaw(self.arrival_law))
        object.__setattr__(self, "phase_law", PhaseLaw(self.phase_law))
        object.__setattr__(self, "arrival_times", tuple(float(t) for t in self.arrival_times))
        check_seed(self.seed)
        if self.n < 1:
            raise ParameterError("a train needs N >= 1")
        if not self.omega_b > 0:
            raise ParameterError("omega_b must be > 0")
        if self.arrival_law is ArrivalLaw.FIXED_LIST and len(self.arrival_times) != self.n:
            raise ParameterError(f"fixed_list needs {self.n} arrival times, got {len(self.arrival_times)}")

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega_b

    def draw(self, k: int) -> Arrival:
        """Arrival of electron ``k`` (0-based); depends only on ``(seed, k)``."""
        if not 0 <= k < self.n:
            raise IndexError(k)
        if self.phase_law is PhaseLaw.RANDOM:
            phi0 = float(substream(self.seed, PHASES, k).uniform(0.0, 2.0 * math.pi))
        else:
            phi0 = self.phi0
        if self.arrival_law is ArrivalLaw.FIXED_LIST:
            return Arrival(self.arrival_times[k], phi0)
        rng = substream(self.seed, ARRIVALS, k)
        if self.arrival_law is ArrivalLaw.IN_PHASE:
            n_k = int(rng.integers(0, IN_PHASE_CYCLES))
            return Arrival(self.t00 + n_k * self.period, phi0, self.t00, n_k)
        return Arrival(self.t00 + float(rng.uniform(0.0, self.period)), phi0)

    def arrivals(self) -> list[Arrival]:
        return [self.draw(k) for k in range(self.n)]


@dataclass
class TrainResult:
    c1: complex
    c2: complex
    reports: list[TransitionReport]
    arrivals: list[Arrival]

    @property
    def p2(self) -> float:
        return abs(self.c2) ** 2

    @property
    def p2_history(self) -> np.ndarray:
        return np.array([r.p_post for r in self.reports])


def arrival_transform(omega: float, arrival: Arrival | float, sigma_et: float,
                      spectrum: ModulationSpectrum | None = None,
                      harmonic: int | None = None, omega_b: float | None = None) -> complex:
    """``D^(omega)`` for a Gaussian or modulated arrival density.

    ``harmonic`` restricts the modulated sum to that single order (the
    retained-harmonic approximation); ``None`` sums all orders.
    """
    if not isinstance(arrival, Arrival):
        arrival = Arrival(float(arrival))
    if spectrum is None:
        wb = omega if omega_b is None else omega_b
        return cmath.exp(1j * arrival.phase(omega, wb) - 0.5 * (omega * sigma_et) ** 2)
    wb = spectrum.omega_b
    t_l = -arrival.phi0 / wb
    orders = spectrum.orders if harmonic is None else [harmonic]
    out = 0j
    for m in orders:
        fm = spectrum[m]
        if fm == 0:
            continue
        det = omega - m * wb
        out += fm * cmath.exp(1j * (m * wb * t_l + arrival.phase(det, wb)) - 0.5 * (det * sigma_et) ** 2)
    return out


def _kernel_pair(ctx: KernelContext) -> tuple[complex, complex]:
    w = ctx.tls.omega21
    return ctx.m_tilde(w), ctx.m_tilde(-w)


def _increments(amps: TlsAmplitudes, ctx: KernelContext, d_plus: complex,
                d_minus: complex, kernels: tuple[complex, complex] | None = None) -> tuple[complex, complex]:
    m_plus, m_minus = _kernel_pair(ctx) if kernels is None else kernels
    pref = 1.0 / (1j * HBAR * ctx.kin.v0)
    dc2 = pref * amps.c1 * m_plus * d_plus
    dc1 = pref * amps.c2 * m_minus * d_minus
    return dc1, dc2


def single_increment(amps: TlsAmplitudes, t0: float, qew: QewSpec, ctx: KernelContext,
                     level: int = 2) -> complex:
    """First-order amplitude change of ``level`` for a Gaussian QEW arriving at ``t0``."""
    if qew.kind is not QewKind.GAUSSIAN:
        raise ParameterError("single_increment needs a gaussian QEW; see modulated_increment")
    w = ctx.tls.omega21
    dc1, dc2 = _increments(amps, ctx, arrival_transform(w, t0, qew.sigma_et),
                           arrival_transform(-w, t0, qew.sigma_et))
    if level == 2:
        return dc2
    if level == 1:
        return dc1
    raise ValueError("level must be 1 or 2")


def post_probability(amps: TlsAmplitudes, dc2: complex) -> TransitionReport:
    """Upper-level probability after one increment.

    ``dP1 = 2 Re(C2* dC2)`` and ``dP2 = |dC2|^2``, so ``P_post`` equals
    ``|C2 + dC2|^2`` exactly.
    """
    p_prev = amps.p2
    dp1 = 2.0 * (amps.c2.conjugate() * dc2).real
    dp2 = abs(dc2) ** 2
    return TransitionReport(p_prev, dp1, dp2, p_prev + dp1 + dp2, dc2)


def _check_small_signal(n: int, g: float, weight: float):
    s = n * g * weight
    if s > SMALL_SIGNAL_LIMIT:
        warnings.warn(f"N g exp(-Gamma^2/2) = {s:.3g} exceeds the small-signal limit "
                      f"{SMALL_SIGNAL_LIMIT}", ValidityWarning, stacklevel=3)


def _check_wide_envelope(sigma_et: float, omega_b: float):
    period = 2.0 * math.pi / omega_b
    if sigma_et < period * (1.0 - 1e-9):
        warnings.warn(f"sigma_et = {sigma_et:.4g} fs is below the bunching period {period:.4g} fs; "
                      "the harmonic expansion is outside its validity regime",
                      ValidityWarning, stacklevel=3)


def _run_train(spec: TrainSpec, ctx: KernelContext, sigma_et: float, start: TlsAmplitudes,
               renormalize: bool, spectrum: ModulationSpectrum | None,
               harmonic: int | None) -> TrainResult:
    w = ctx.tls.omega21
    arrivals = spec.arrivals()
    kernels = _kernel_pair(ctx)
    reports = []
    fixed = start  # amplitudes feeding the increments when not renormalising
    state = start
    for arr in arrivals:
        src = state if renormalize else fixed
        dc1, dc2 = _increments(
            src, ctx,
            arrival_transform(w, arr, sigma_et, spectrum, harmonic, spec.omega_b),
            arrival_transform(-w, arr, sigma_et, spectrum,
                              None if harmonic is None else -harmonic, spec.omega_b),
            kernels,
        )
        reports.append(post_probability(state, dc2))
        state = state.updated(dc1, dc2, renormalize)
    return TrainResult(state.c1, state.c2, reports, arrivals)


def train_point_amplitude(spec: TrainSpec, ctx: KernelContext, sigma_et: float,
                          start: TlsAmplitudes | None = None,
                          renormalize: bool = False) -> TrainResult:
    """Unmodulated Gaussian QEWs arriving per ``spec``; ground state by default.

    Without ``renormalize`` every electron sees the initial amplitudes, so
    ``C2 = M~ exp(-Gamma^2/2) sum_k exp(i w t0k) / (i hbar v0)``.
    """
    start = TlsAmplitudes.ground() if start is None else start
    _check_small_signal(spec.n, ctx.g, math.exp(-0.5 * (ctx.tls.omega21 * sigma_et) ** 2))
    return _run_train(spec, ctx, sigma_et, start, renormalize, None, None)


def modulated_increment(amps: TlsAmplitudes, spectrum: ModulationSpectrum, t0: float, t_L: float,
                        sigma_et: float, ctx: KernelContext,
                        harmonic: int | None = None) -> TransitionReport:
    """One modulated QEW (centroid ``t0``, laser reference ``t_L``).

    ``harmonic=None`` evaluates the full harmonic sum; an integer ``n`` keeps
    only the order ``n`` in ``dC2`` and ``-n`` in ``dC1``.
    """
    _check_wide_envelope(sigma_et, spectrum.omega_b)
    w = ctx.tls.omega21
    arr = Arrival(t0, -t_L * spectrum.omega_b)
    dc1, dc2 = _increments(
        amps, ctx,
        arrival_transform(w, arr, sigma_et, spectrum, harmonic),
        arrival_transform(-w, arr, sigma_et, spectrum, None if harmonic is None else -harmonic),
    )
    return post_probability(amps, dc2)


def correlated_train_probability(spec: TrainSpec, spectrum: ModulationSpectrum, sigma_et: float,
                                 ctx: KernelContext, start: TlsAmplitudes | None = None,
                                 harmonic: int | None = None,
                                 renormalize: bool = False) -> TrainResult:
    """Train of modulated QEWs sharing (or not) the laser phase.

    At resonance ``omega21 = n omega_b`` with a common phase, ``P2`` tends to
    ``N^2 g^2 |f_n|^2`` whatever the centroid arrivals.
    """
    if abs(spectrum.omega_b - spec.omega_b) > 1e-12 * spec.omega_b:
        raise ParameterError("spectrum and train disagree on omega_b")
    _check_wide_envelope(sigma_et, spec.omega_b)
    start = TlsAmplitudes.ground() if start is None else start
    fn = abs(spectrum[spec.harmonic]) if spectrum.m_max else 1.0
    _check_small_signal(spec.n, ctx.g, fn)
    return _run_train(spec, ctx, sigma_et, start, renormalize, spectrum, harmonic)


def phase_matched_phi0(amps: TlsAmplitudes, f_n: complex, m_tilde: complex, harmonic: int,
                       sign: float = 1.0) -> float:
    """Laser phase making the retained-harmonic ``dP1`` extremal.

    ``dP1 = 2 Re(C2* C1 M~ f_n exp(-i n phi0) / (i hbar v0))``; ``sign=+1``
    maximises it, ``-1`` minimises it.
    """
    z = amps.c2.conjugate() * amps.c1 * m_tilde * f_n / 1j
    target = 0.0 if sign > 0 else math.pi
    return (math.atan2(z.imag, z.real) - target) / harmonic
