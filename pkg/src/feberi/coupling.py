"""Dipole interaction kernel between a passing electron and the TLS.

The kernel ``M(z)`` is the dipole-expanded Coulomb matrix element seen by the
bound electron when the free electron sits at axial position ``z`` (nm) and
impact parameter ``r_perp0``. Energies are in eV, lengths in nm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from ._bessel import k0k1
from .physical import COULOMB, HBAR, Kinematics, Orientation, ParameterError, TlsSpec

KERNEL_EPS_REL = 1e-8


@dataclass(frozen=True)
class Geometry:
    r_perp0: float
    orientation: Orientation = Orientation.PERPENDICULAR

    def __post_init__(self):
        if not self.r_perp0 > 0:
            raise ParameterError(f"r_perp0 must be > 0, got {self.r_perp0}")
        object.__setattr__(self, "orientation", Orientation(self.orientation))


@dataclass(frozen=True)
class CouplingKernel:
    """Kernel sampled on a uniform ``z`` grid inside ``|z| <= z_cut``."""

    z: np.ndarray
    values: np.ndarray
    prefactor: float
    z_cut: float
    orientation: Orientation


def geometry_for(kin: Kinematics, tls: TlsSpec) -> Geometry:
    return Geometry(kin.impact_parameter, tls.orientation)


def kernel_prefactor(geom: Geometry, tls: TlsSpec) -> float:
    """``K = e^2 r_ij . e / (4 pi eps0 r_perp0^2)`` with ``mu = -e r_ij`` (eV)."""
    return -COULOMB * tls.dipole_enm / geom.r_perp0**2


def dipole_kernel(z, geom: Geometry, tls: TlsSpec, kin: Kinematics):
    """``M(z)`` in eV; odd in ``z`` for a longitudinal dipole, even for a perpendicular one."""
    z = np.asarray(z, dtype=float)
    g = kin.gamma0
    r = geom.r_perp0
    denom = (g * g * z * z + r * r) ** 1.5
    cmu = COULOMB * tls.dipole_enm
    if geom.orientation is Orientation.LONGITUDINAL:
        out = -cmu * g * z / denom
    else:
        out = cmu * r / denom
    return out if out.ndim else float(out)


def kernel_fourier(q, geom: Geometry, tls: TlsSpec, kin: Kinematics):
    """Closed-form ``M~(q) = int dz exp(iqz) M(z)`` (eV nm), ``q`` in 1/nm."""
    q = np.asarray(q, dtype=float)
    scalar = q.ndim == 0
    q = np.atleast_1d(q)
    g = kin.gamma0
    r = geom.r_perp0
    cmu = COULOMB * tls.dipole_enm
    out = np.zeros(q.shape, dtype=complex)
    nz = q != 0
    x = np.abs(q[nz]) * r / g
    if nz.any():
        bk0, bk1 = k0k1(x)
    if geom.orientation is Orientation.LONGITUDINAL:
        if nz.any():
            out[nz] = -2j * cmu * q[nz] * bk0 / g**2
    else:
        out[~nz] = 2 * cmu / (g * r)
        if nz.any():
            out[nz] = 2 * cmu * np.abs(q[nz]) * bk1 / g**2
    return complex(out[0]) if scalar else out


def truncation_radius(geom: Geometry, tls: TlsSpec, kin: Kinematics, eps_rel: float = KERNEL_EPS_REL) -> float:
    """Radius beyond which ``|M(z)|`` stays below ``eps_rel`` times the prefactor.

    Uses the decay envelope ``(u^2 + 1)^(-3/2)`` (perpendicular) or
    ``(u^2 + 1)^(-1)`` (longitudinal), ``u = gamma z / r_perp0``.
    """
    scale = geom.r_perp0 / kin.gamma0
    if geom.orientation is Orientation.PERPENDICULAR:
        return scale * math.sqrt((1.0 / eps_rel) ** (2.0 / 3.0) - 1.0)
    return scale * math.sqrt(1.0 / eps_rel - 1.0)


def sample_kernel(geom: Geometry, tls: TlsSpec, kin: Kinematics, spacing: float,
                  eps_rel: float = KERNEL_EPS_REL) -> CouplingKernel:
    z_cut = truncation_radius(geom, tls, kin, eps_rel)
    n = int(math.ceil(z_cut / spacing))
    z = spacing * np.arange(-n, n + 1)
    return CouplingKernel(
        z=z,
        values=dipole_kernel(z, geom, tls, kin),
        prefactor=kernel_prefactor(geom, tls),
        z_cut=n * spacing,
        orientation=geom.orientation,
    )


def coupling_constant_g(geom: Geometry, tls: TlsSpec, kin: Kinematics) -> float:
    """Single-electron resonant transition amplitude ``|M~(omega21/v0)| / (hbar v0)``."""
    q = tls.omega21 / kin.v0
    return abs(kernel_fourier(q, geom, tls, kin)) / (HBAR * kin.v0)


def normalized_kernel(u, orientation: Orientation):
    """Dimensionless kernel in units of the transit time: ``u`` or ``-1`` over ``(u^2+1)^(3/2)``."""
    u = np.asarray(u, dtype=float)
    num = u if Orientation(orientation) is Orientation.LONGITUDINAL else -np.ones_like(u)
    return num / (u * u + 1.0) ** 1.5


def weighed_strength(t_bar, sigma_bar: float, geom: Geometry, tls: TlsSpec,
                     kin: Kinematics, t_bar0: float = 0.0, epsabs: float = 1e-14):
    """Kernel convolved with the Gaussian arrival-time density (eV).

    ``t_bar`` is time in units of the transit time ``t_r`` and ``sigma_bar``
    the wavepacket duration in the same units.
    """
    if not sigma_bar > 0:
        raise ParameterError("sigma_bar must be > 0")
    t_bar = np.atleast_1d(np.asarray(t_bar, dtype=float))
    kfac = kernel_prefactor(geom, tls)
    orient = geom.orientation
    norm = 1.0 / (math.sqrt(2 * math.pi) * sigma_bar)
    reach = 12.0 * sigma_bar

    def integrand(u, centre):
        return float(normalized_kernel(u, orient)) * norm * math.exp(-0.5 * ((centre - u) / sigma_bar) ** 2)

    out = np.empty_like(t_bar)
    for i, tb in enumerate(t_bar):
        c = tb - t_bar0
        # Gaussian support carries the integral; kernel tails beyond it are negligible
        lo, hi = c - reach, c + reach
        pts = sorted({p for p in (0.0, c) if lo < p < hi})
        val, _ = integrate.quad(integrand, lo, hi, args=(c,), points=pts or None,
                                epsabs=epsabs, epsrel=1e-13, limit=400)
        out[i] = kfac * val
    return out


@dataclass(frozen=True)
class KernelContext:
    """Beam kinematics, TLS and geometry bundled for the transition models."""

    kin: Kinematics
    tls: TlsSpec
    geom: Geometry

    @classmethod
    def build(cls, kin: Kinematics, tls: TlsSpec) -> "KernelContext":
        return cls(kin, tls, geometry_for(kin, tls))

    @property
    def g(self) -> float:
        return coupling_constant_g(self.geom, self.tls, self.kin)

    def m_tilde(self, omega: float | None = None) -> complex:
        """``M~(omega / v0)`` (eV nm); defaults to the transition frequency."""
        w = self.tls.omega21 if omega is None else omega
        return kernel_fourier(w / self.kin.v0, self.geom, self.tls, self.kin)

    def kernel(self, z):
        return dipole_kernel(z, self.geom, self.tls, self.kin)
