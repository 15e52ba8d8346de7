"""Physical constants, beam kinematics and the internal unit system.

Internal units are nanometres, femtoseconds and electron-volts. Momenta are
carried in eV*fs/nm, masses in eV*fs^2/nm^2 and dipole moments in e*nm, so
that ``hbar * k`` with ``k`` in 1/nm is a momentum and ``e^2/(4 pi eps0)``
is an energy times a length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

HBAR = 0.6582119569  # eV fs
C_LIGHT = 299.792458  # nm / fs
REST_ENERGY = 510998.95  # eV
ALPHA = 7.2973525693e-3
COULOMB = ALPHA * HBAR * C_LIGHT  # e^2 / (4 pi eps0), eV nm
DEBYE = 0.0208194  # e nm
ELECTRON_MASS = REST_ENERGY / C_LIGHT**2  # eV fs^2 / nm^2

NM_PER_M = 1e9
FS_PER_S = 1e15


class ParameterError(ValueError):
    """Raised when a physical parameter violates its invariants."""


class Orientation(str, Enum):
    LONGITUDINAL = "longitudinal"
    PERPENDICULAR = "perpendicular"


@dataclass(frozen=True)
class BeamConfig:
    """Electron beam parameters in user-facing units.

    Parameters
    ----------
    kinetic_energy : float
        Kinetic energy (eV).
    impact_parameter : float
        Closest transverse distance to the TLS, ``r_perp0`` (nm).
    sigma_et : float
        Temporal rms size of the wavepacket density at its waist (fs). Sets
        the momentum spread through ``sigma_p0 = hbar / (2 v0 sigma_et)``.
    drift_length : float
        Free drift from the waist / modulation point to the TLS (m).
    """

    kinetic_energy: float
    impact_parameter: float
    sigma_et: float = 1.0
    drift_length: float = 0.0

    def __post_init__(self):
        if not self.kinetic_energy > 0:
            raise ParameterError(f"kinetic_energy must be > 0, got {self.kinetic_energy}")
        if not self.impact_parameter > 0:
            raise ParameterError(f"impact_parameter must be > 0, got {self.impact_parameter}")
        if not self.sigma_et > 0:
            raise ParameterError(f"sigma_et must be > 0, got {self.sigma_et}")
        if not self.drift_length >= 0:
            raise ParameterError(f"drift_length must be >= 0, got {self.drift_length}")


@dataclass(frozen=True)
class Kinematics:
    """Relativistic kinematics of the beam centre (internal units)."""

    gamma0: float
    beta0: float
    v0: float  # nm/fs
    p0: float  # eV fs/nm
    transit_time: float  # fs
    kinetic_energy: float  # eV
    impact_parameter: float  # nm

    @property
    def epsilon0(self) -> float:
        """Total energy ``gamma0 m c^2`` (eV)."""
        return self.gamma0 * REST_ENERGY

    @property
    def longitudinal_mass(self) -> float:
        """Effective mass ``gamma0^3 m`` of the quadratic dispersion term."""
        return self.gamma0**3 * ELECTRON_MASS


@dataclass(frozen=True)
class TlsSpec:
    """Two-level system: transition energy (eV), dipole (Debye), orientation."""

    transition_energy: float
    dipole: float
    orientation: Orientation = Orientation.PERPENDICULAR

    def __post_init__(self):
        if not self.transition_energy > 0:
            raise ParameterError(f"transition_energy must be > 0, got {self.transition_energy}")
        if self.dipole < 0:
            raise ParameterError(f"dipole magnitude must be >= 0, got {self.dipole}")
        object.__setattr__(self, "orientation", Orientation(self.orientation))

    @property
    def omega21(self) -> float:
        """Transition angular frequency (rad/fs)."""
        return self.transition_energy / HBAR

    @property
    def period(self) -> float:
        """Transition period ``T21 = 2 pi / omega21`` (fs)."""
        return 2 * math.pi / self.omega21

    @property
    def dipole_enm(self) -> float:
        return self.dipole * DEBYE


@dataclass(frozen=True)
class ScaledParams:
    """All run quantities in internal units plus the dimensionless size ratios."""

    kinematics: Kinematics
    omega21: float  # rad/fs
    period21: float  # fs
    dipole_enm: float
    orientation: Orientation
    sigma_et: float  # fs
    drift_length: float  # nm
    sigma_bar: float  # sigma_et / t_r
    sigma_over_period: float  # sigma_et / T21


def derive_kinematics(beam: BeamConfig) -> Kinematics:
    if not beam.kinetic_energy > 0:
        raise ParameterError("kinetic energy must be positive")
    gamma = 1.0 + beam.kinetic_energy / REST_ENERGY
    # 1 - 1/gamma^2 written to avoid cancellation at low energy
    x = beam.kinetic_energy / REST_ENERGY
    beta = math.sqrt(x * (x + 2.0)) / gamma
    v0 = beta * C_LIGHT
    p0 = gamma * ELECTRON_MASS * v0
    t_r = beam.impact_parameter / (gamma * beta * C_LIGHT)
    return Kinematics(
        gamma0=gamma,
        beta0=beta,
        v0=v0,
        p0=p0,
        transit_time=t_r,
        kinetic_energy=beam.kinetic_energy,
        impact_parameter=beam.impact_parameter,
    )


def dispersion_energy(p, kin: Kinematics):
    """Second-order relativistic dispersion ``E_p`` (eV) for momentum ``p``.

    Works elementwise on arrays.
    """
    dp = p - kin.p0
    return kin.epsilon0 + kin.v0 * dp + dp * dp / (2.0 * kin.longitudinal_mass)


def excess_energy(dp, kin: Kinematics):
    """``E_p - epsilon0`` as a function of ``dp = p - p0``."""
    return kin.v0 * dp + dp * dp / (2.0 * kin.longitudinal_mass)


def sigma_p0(sigma_et: float, kin: Kinematics) -> float:
    """Momentum spread of a minimum-uncertainty packet with temporal size ``sigma_et``.

    Uses ``sigma_z0 = v0 sigma_et`` and ``sigma_z0 = hbar / (2 sigma_p0)``.
    """
    return HBAR / (2.0 * kin.v0 * sigma_et)


def to_internal_units(beam: BeamConfig, tls: TlsSpec) -> ScaledParams:
    kin = derive_kinematics(beam)
    omega = tls.omega21
    period = 2 * math.pi / omega
    return ScaledParams(
        kinematics=kin,
        omega21=omega,
        period21=period,
        dipole_enm=tls.dipole_enm,
        orientation=tls.orientation,
        sigma_et=beam.sigma_et,
        drift_length=beam.drift_length * NM_PER_M,
        sigma_bar=beam.sigma_et / kin.transit_time,
        sigma_over_period=beam.sigma_et / period,
    )


def from_internal_units(params: ScaledParams) -> tuple[BeamConfig, TlsSpec]:
    """Inverse of :func:`to_internal_units`."""
    kin = params.kinematics
    beam = BeamConfig(
        kinetic_energy=kin.kinetic_energy,
        impact_parameter=kin.impact_parameter,
        sigma_et=params.sigma_et,
        drift_length=params.drift_length / NM_PER_M,
    )
    tls = TlsSpec(
        transition_energy=params.omega21 * HBAR,
        dipole=params.dipole_enm / DEBYE,
        orientation=params.orientation,
    )
    return beam, tls


def table1_beam(sigma_et: float = 1.0, drift_length: float = 0.0) -> BeamConfig:
    """200 keV beam at 2 nm impact parameter."""
    return BeamConfig(200e3, 2.0, sigma_et, drift_length)


def table1_tls(orientation: Orientation = Orientation.PERPENDICULAR) -> TlsSpec:
    """2 eV gap, 5 Debye dipole."""
    return TlsSpec(2.0, 5.0, orientation)
