"""Quantum electron wavepackets: Gaussian and PINEM-modulated amplitudes.

Amplitudes live on a grid of ``dp = p - p0`` (eV fs / nm) and are referred to
the arrival frame: the envelope centroid crosses the TLS plane ``z = 0`` at
time ``t0``. The carrier ``exp(i p0 z / hbar)``, the rest-energy phase and
the linear part of the drift phase (a pure translation) are factored out, so
the only drift phase kept is the quadratic dispersion over the drift time
``L_d / v0``.

Position-space synthesis follows

    psi(z, t) = sum_k c_k exp(-i (E_k - eps0)(t - t0)/hbar) exp(i dp_k z/hbar) dp / sqrt(2 pi hbar)

so ``sum |c|^2 dp = 1`` implies ``sum |psi|^2 dz = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
from scipy import special

from .physical import HBAR, Kinematics, ParameterError, excess_energy, sigma_p0

DEFAULT_NP = 2**14
DEFAULT_SIDEBAND_TOL = 1e-10
EDGE_SAMPLES = 4
EDGE_MASS_TOL = 1e-6


class QewKind(str, Enum):
    GAUSSIAN = "gaussian"
    PINEM = "pinem_modulated"


class ConfigurationError(ValueError):
    """Momentum grid cannot represent the requested wavepacket."""


class GridError(RuntimeError):
    """Position grid is incompatible or the density aliases into its edges."""


class InsufficientPeriodsError(ValueError):
    """Envelope too short to define a modulation spectrum."""


@dataclass(frozen=True)
class QewSpec:
    """Wavepacket description in internal units.

    ``sigma_et`` (fs), ``omega_b`` (rad/fs), ``phi0`` (rad), ``t0`` (fs) and
    ``drift_length`` (nm). Only ``|g_L|`` enters the sideband weights; the
    phase of ``g_L`` is carried by ``phi0``.
    """

    kind: QewKind = QewKind.GAUSSIAN
    sigma_et: float = 1.0
    g_L: complex = 0.0
    omega_b: float = 0.0
    phi0: float = 0.0
    t0: float = 0.0
    drift_length: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", QewKind(self.kind))
        if not self.sigma_et > 0:
            raise ParameterError(f"sigma_et must be > 0, got {self.sigma_et}")
        if self.kind is QewKind.PINEM and not self.omega_b > 0:
            raise ParameterError("a PINEM-modulated QEW needs omega_b > 0")
        if self.drift_length < 0:
            raise ParameterError("drift_length must be >= 0")

    def with_arrival(self, t0: float, phi0: float | None = None) -> "QewSpec":
        return replace(self, t0=t0, phi0=self.phi0 if phi0 is None else phi0)


@dataclass(frozen=True)
class MomentumAmplitudes:
    dp: np.ndarray
    amplitudes: np.ndarray
    spec: QewSpec
    kin: Kinematics
    m_max: int = 0
    norm_factor: float = 1.0

    @property
    def spacing(self) -> float:
        return float(self.dp[1] - self.dp[0])

    @property
    def t0(self) -> float:
        return self.spec.t0

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.spacing)

    def evaluate(self, dp) -> np.ndarray:
        """Closed-form amplitudes at arbitrary momenta, same normalisation."""
        return self.norm_factor * _raw_amplitudes(np.asarray(dp, dtype=float), self.spec, self.kin, self.m_max)


@dataclass(frozen=True)
class ModulationSpectrum:
    """Fourier coefficients ``f_m`` of the periodic density modulation.

    The modulation is ``f_mod(tau) = sum_m f_m exp(-i m omega_b tau)`` in the
    lab passage time ``tau = t - z/v0``, referenced to a laser phase of zero:
    a packet with phase ``phi0`` carries ``f_mod(tau - t_L)`` with
    ``t_L = -phi0 / omega_b``.
    """

    harmonics: np.ndarray  # index m + m_max
    omega_b: float
    m_max: int = field(default=0)

    def __getitem__(self, m: int) -> complex:
        if abs(m) > self.m_max:
            return 0j
        return complex(self.harmonics[m + self.m_max])

    @property
    def orders(self) -> np.ndarray:
        return np.arange(-self.m_max, self.m_max + 1)

    @classmethod
    def unmodulated(cls, omega_b: float = 1.0) -> "ModulationSpectrum":
        return cls(np.array([1.0 + 0j]), omega_b, 0)


def sideband_cutoff(g_L: complex, tol: float = DEFAULT_SIDEBAND_TOL) -> int:
    """Smallest ``m_max`` with ``sum_{|m| > m_max} J_m(2|g_L|)^2 < tol``."""
    if not 0 < tol < 1:
        raise ValueError("tol must lie in (0, 1)")
    x = 2.0 * abs(g_L)
    if x == 0:
        return 0
    top = int(x + 40 + 10 * math.sqrt(x))
    sq = special.jv(np.arange(top + 1), x) ** 2
    # tail[m] = 2 sum_{k > m} J_k^2, summed from the small end for accuracy
    tail = 2.0 * np.concatenate([np.cumsum(sq[::-1])[::-1][1:], [0.0]])
    return int(np.argmax(tail < tol))


def sideband_momentum(omega_b: float, kin: Kinematics) -> float:
    """Momentum step ``hbar omega_b / v0`` between PINEM sidebands."""
    return HBAR * omega_b / kin.v0


def drift_phase_coefficient(drift_length: float, kin: Kinematics) -> float:
    """Coefficient ``a`` of the quadratic drift phase ``-a dp^2 / hbar``."""
    return drift_length / (2.0 * kin.longitudinal_mass * kin.v0)


def optimal_drift_length(g_L: complex, omega_b: float, kin: Kinematics, harmonic: int = 1) -> float:
    """Drift length (nm) that maximises ``|f_harmonic|``.

    The bunching harmonic of a PINEM packet is ``J_n(4|g_L| sin(n theta))``
    with ``theta = dp_L^2 L_d / (2 gamma^3 m hbar v0)``; the first maximum of
    ``J_n`` fixes ``theta`` when reachable, otherwise ``sin(n theta) = 1``.
    """
    x = 4.0 * abs(g_L)
    if x == 0:
        raise ParameterError("no bunching without modulation")
    jprime = float(special.jnp_zeros(harmonic, 1)[0])
    s = min(1.0, jprime / x)
    theta = math.asin(s) / harmonic
    dpl = sideband_momentum(omega_b, kin)
    return theta * 2.0 * kin.longitudinal_mass * HBAR * kin.v0 / dpl**2


def _raw_amplitudes(dp: np.ndarray, spec: QewSpec, kin: Kinematics, m_max: int) -> np.ndarray:
    sp = sigma_p0(spec.sigma_et, kin)
    pref = (2.0 * math.pi * sp * sp) ** -0.25
    chirp = np.exp(-1j * drift_phase_coefficient(spec.drift_length, kin) * dp * dp / HBAR)
    if spec.kind is QewKind.GAUSSIAN:
        return pref * np.exp(-dp * dp / (4.0 * sp * sp)) * chirp
    dpl = sideband_momentum(spec.omega_b, kin)
    x = 2.0 * abs(spec.g_L)
    phase = spec.phi0 + spec.omega_b * spec.t0
    out = np.zeros(dp.shape, dtype=complex)
    for m in range(-m_max, m_max + 1):
        w = special.jv(m, x)
        if w == 0:
            continue
        d = dp - m * dpl
        out += w * np.exp(-d * d / (4.0 * sp * sp) - 1j * m * phase)
    return pref * out * chirp


def momentum_grid(spec: QewSpec, kin: Kinematics, m_max: int = 0, n_p: int | None = None,
                  span: float | None = None) -> np.ndarray:
    sp = sigma_p0(spec.sigma_et, kin)
    need = 16.0 * sp
    if spec.kind is QewKind.PINEM:
        need = max(need, 2.0 * (m_max + 2) * sideband_momentum(spec.omega_b, kin))
    if span is None:
        span = need
    elif span < need:
        raise ConfigurationError(
            f"momentum span {span:.4g} below required {need:.4g} (16 sigma_p0 plus sidebands)")
    if n_p is None:
        n_p = DEFAULT_NP
        while span / n_p > 0.25 * sp:
            n_p *= 2
    if n_p < 16 or n_p & (n_p - 1):
        raise ConfigurationError("n_p must be a power of two >= 16")
    step = span / n_p
    if step > 0.25 * sp:
        raise ConfigurationError(
            f"momentum step {step:.4g} does not resolve sigma_p0 = {sp:.4g}; raise n_p")
    return step * (np.arange(n_p) - n_p // 2)


def _build(spec: QewSpec, kin: Kinematics, m_max: int, n_p: int, span: float | None) -> MomentumAmplitudes:
    dp = momentum_grid(spec, kin, m_max, n_p, span)
    raw = _raw_amplitudes(dp, spec, kin, m_max)
    norm = math.sqrt(np.sum(np.abs(raw) ** 2) * (dp[1] - dp[0]))
    return MomentumAmplitudes(dp, raw / norm, spec, kin, m_max, 1.0 / norm)


def gaussian_amplitudes(spec: QewSpec, kin: Kinematics, n_p: int | None = None,
                        span: float | None = None) -> MomentumAmplitudes:
    if spec.kind is not QewKind.GAUSSIAN:
        raise ParameterError("gaussian_amplitudes needs a gaussian QewSpec")
    return _build(spec, kin, 0, n_p, span)


def pinem_amplitudes(spec: QewSpec, kin: Kinematics, m_max: int | None = None,
                     n_p: int | None = None, span: float | None = None) -> MomentumAmplitudes:
    if spec.kind is not QewKind.PINEM:
        raise ParameterError("pinem_amplitudes needs a pinem_modulated QewSpec")
    need = sideband_cutoff(spec.g_L)
    if m_max is None:
        m_max = need
    elif m_max < need:
        raise ConfigurationError(f"m_max={m_max} below sideband cutoff {need}")
    return _build(spec, kin, m_max, n_p, span)


def build_amplitudes(spec: QewSpec, kin: Kinematics, **kw) -> MomentumAmplitudes:
    if spec.kind is QewKind.GAUSSIAN:
        return gaussian_amplitudes(spec, kin, **kw)
    return pinem_amplitudes(spec, kin, **kw)


def conjugate_z_grid(amps: MomentumAmplitudes, center: float = 0.0) -> np.ndarray:
    n = amps.dp.size
    dz = 2.0 * math.pi * HBAR / (n * amps.spacing)
    return center + dz * (np.arange(n) - n // 2)


def position_wavefunction(amps: MomentumAmplitudes, z_grid, t: float) -> np.ndarray:
    """Envelope wavefunction on a conjugate grid by FFT synthesis."""
    z = np.asarray(z_grid, dtype=float)
    n = amps.dp.size
    dz = 2.0 * math.pi * HBAR / (n * amps.spacing)
    if z.size != n or not np.allclose(np.diff(z), dz, rtol=1e-9, atol=0):
        raise GridError("z_grid must be the uniform conjugate grid of the momentum samples")
    c = amps.amplitudes * np.exp(-1j * excess_energy(amps.dp, amps.kin) * (t - amps.t0) / HBAR)
    z0 = z[0]
    dp0 = amps.dp[0]
    k = np.arange(n)
    spec = c * np.exp(1j * k * amps.spacing * z0 / HBAR)
    psi = np.fft.ifft(spec) * n
    return psi * np.exp(1j * dp0 * z / HBAR) * amps.spacing / math.sqrt(2.0 * math.pi * HBAR)


def density_profile(amps: MomentumAmplitudes, z_grid, t: float) -> np.ndarray:
    """``|psi(z, t)|^2`` (1/nm) on a conjugate grid; raises GridError on aliasing."""
    rho = np.abs(position_wavefunction(amps, z_grid, t)) ** 2
    dz = float(z_grid[1] - z_grid[0])
    edge = (rho[:EDGE_SAMPLES].sum() + rho[-EDGE_SAMPLES:].sum()) * dz
    if edge > EDGE_MASS_TOL:
        raise GridError(f"density mass {edge:.3g} within {EDGE_SAMPLES} samples of the grid edge")
    return rho


def density_at(amps: MomentumAmplitudes, z, t: float) -> np.ndarray:
    """Density at arbitrary points by direct Fourier summation (small point sets)."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    c = amps.amplitudes * np.exp(-1j * excess_energy(amps.dp, amps.kin) * (t - amps.t0) / HBAR)
    out = np.empty(z.shape)
    scale = amps.spacing / math.sqrt(2.0 * math.pi * HBAR)
    for lo in range(0, z.size, 256):
        zz = z[lo:lo + 256]
        psi = np.exp(1j * np.outer(zz, amps.dp) / HBAR) @ c
        out[lo:lo + 256] = np.abs(psi * scale) ** 2
    return out


def drifted_sigma_z(spec: QewSpec, kin: Kinematics) -> float:
    """Rms length of the Gaussian envelope after dispersive drift (nm)."""
    sz0 = kin.v0 * spec.sigma_et
    sp = sigma_p0(spec.sigma_et, kin)
    tau = spec.drift_length / kin.v0
    return math.hypot(sz0, sp * tau / kin.longitudinal_mass)


def modulation_spectrum(amps: MomentumAmplitudes, m_max: int | None = None,
                        samples: int = 512) -> ModulationSpectrum:
    """Harmonics of the density modulation over the central bunching period.

    The density at arrival is divided by the analytic drifted Gaussian
    envelope and projected onto ``exp(-i m omega_b tau)`` over one period;
    the result is rotated to zero laser phase (see :class:`ModulationSpectrum`)
    and scaled so that ``f_0 = 1``. Sidebands drift apart by
    ``dp_L L_d / (gamma^3 m v0)`` per order, so the extraction approaches the
    infinite-envelope Bessel sum only when that walk-off is small against
    the envelope length.
    """
    spec = amps.spec
    if spec.kind is not QewKind.PINEM:
        raise ParameterError("modulation_spectrum needs a PINEM-modulated packet")
    period = 2.0 * math.pi / spec.omega_b
    # equality admitted: sigma_et = T_b is the standard resonant configuration
    if spec.sigma_et < period * (1.0 - 1e-9):
        raise InsufficientPeriodsError(
            f"sigma_et={spec.sigma_et:.4g} fs is shorter than the bunching period {period:.4g} fs")
    if m_max is None:
        m_max = max(amps.m_max, 1)
    kin = amps.kin
    tau = period * (np.arange(samples) / samples - 0.5)
    s = -kin.v0 * tau
    rho = density_at(amps, s, amps.t0)
    sz = drifted_sigma_z(spec, kin)
    env = np.exp(-0.5 * (s / sz) ** 2) / (math.sqrt(2.0 * math.pi) * sz)
    ratio = rho / env
    orders = np.arange(-m_max, m_max + 1)
    h = np.exp(1j * np.outer(orders, spec.omega_b * tau)) @ ratio / samples
    h *= np.exp(1j * orders * (spec.phi0 + spec.omega_b * spec.t0))
    # sideband walk-off makes the true envelope deviate slightly from the
    # analytic Gaussian; fixing the period average restores f_0 = 1
    h /= h[m_max].real
    h[m_max] = 1.0
    return ModulationSpectrum(h, spec.omega_b, m_max)
