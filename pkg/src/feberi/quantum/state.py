"""TLS density matrices and joint electron/TLS states on the grid."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..analytic import TlsAmplitudes
from ..physical import HBAR
from ..wavepacket import GridError, MomentumAmplitudes
from .grid import Grid

RHO_TOL = 1e-10
EDGE_SAMPLES = 4
EDGE_MASS_TOL = 1e-8
SYNTHESIS_NORM_TOL = 1e-6
MIN_WEIGHT = 1e-15


class DensityMatrixError(ValueError):
    """Matrix is not a valid TLS density matrix."""


class TlsDensityMatrix:
    """2x2 TLS density matrix in the rotating frame (levels 1, 2)."""

    __slots__ = ("rho",)

    def __init__(self, rho, validate: bool = True):
        rho = np.array(rho, dtype=complex)
        if rho.shape != (2, 2):
            raise DensityMatrixError(f"expected a 2x2 matrix, got shape {rho.shape}")
        if validate:
            _validate(rho)
        self.rho = rho

    @classmethod
    def pure(cls, c1: complex, c2: complex) -> "TlsDensityMatrix":
        v = np.array([c1, c2], dtype=complex)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def from_amplitudes(cls, amps: TlsAmplitudes) -> "TlsDensityMatrix":
        return cls.pure(amps.c1, amps.c2)

    @classmethod
    def ground(cls) -> "TlsDensityMatrix":
        return cls.pure(1.0, 0.0)

    @classmethod
    def excited(cls) -> "TlsDensityMatrix":
        return cls.pure(0.0, 1.0)

    @classmethod
    def maximally_mixed(cls) -> "TlsDensityMatrix":
        return cls(0.5 * np.eye(2))

    @property
    def p2(self) -> float:
        return float(self.rho[1, 1].real)

    @property
    def coherence(self) -> complex:
        """``rho_21 = C2 C1*`` for a pure state."""
        return complex(self.rho[1, 0])

    @property
    def purity(self) -> float:
        return float(np.trace(self.rho @ self.rho).real)

    def eig(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(0.5 * (self.rho + self.rho.conj().T))

    def __repr__(self):
        return f"TlsDensityMatrix({self.rho!r})"


def _validate(rho: np.ndarray):
    if np.max(np.abs(rho - rho.conj().T)) > RHO_TOL:
        raise DensityMatrixError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > RHO_TOL:
        raise DensityMatrixError(f"trace {np.trace(rho).real!r} differs from 1")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -RHO_TOL:
        raise DensityMatrixError("density matrix has a negative eigenvalue")


def p2_of(rho: TlsDensityMatrix) -> float:
    return rho.p2


@dataclass
class JointState:
    """Weighted pure joint states.

    ``psi[c, j, i]`` is the amplitude of TLS level ``j+1`` at grid point
    ``i`` for component ``c``; ``tls0[c]`` holds that component's initial
    TLS coefficients.
    """

    psi: np.ndarray
    weights: np.ndarray
    grid: Grid
    tls0: np.ndarray

    @property
    def n_comp(self) -> int:
        return self.psi.shape[0]

    def norms(self) -> np.ndarray:
        return np.sum(np.abs(self.psi) ** 2, axis=(1, 2)) * self.grid.dz

    def level_populations(self) -> np.ndarray:
        """Per-component ``sum_z |psi_j|^2 dz``, shape ``(n_comp, 2)``."""
        return np.sum(np.abs(self.psi) ** 2, axis=2) * self.grid.dz

    def p2(self) -> float:
        return float(self.weights @ self.level_populations()[:, 1])


def electron_on_grid(amps: MomentumAmplitudes, grid: Grid, t: float) -> np.ndarray:
    """Co-moving envelope wavefunction at time ``t`` sampled on ``grid``.

    The closed-form amplitudes are evaluated at the grid's conjugate momenta,
    given the quadratic dispersion phase for ``t - t0`` and synthesised by FFT.
    """
    k = grid.k
    dp = HBAR * k
    mass = amps.kin.longitudinal_mass
    c = amps.evaluate(dp) * np.exp(-1j * dp * dp * (t - amps.t0) / (2.0 * mass * HBAR))
    s0 = -grid.dz * (grid.n // 2)
    dpk = 2.0 * math.pi * HBAR / grid.length
    psi = np.fft.ifft(c * np.exp(1j * k * s0)) * grid.n * dpk / math.sqrt(2.0 * math.pi * HBAR)
    norm = float(np.sum(np.abs(psi) ** 2) * grid.dz)
    if abs(norm - 1.0) > SYNTHESIS_NORM_TOL:
        raise GridError(f"wavepacket synthesis on the grid has norm {norm:.9g}")
    check_edges(psi, grid)
    return psi / math.sqrt(norm)


def check_edges(psi: np.ndarray, grid: Grid, tol: float = EDGE_MASS_TOL):
    dens = np.abs(psi) ** 2
    edge = (dens[..., :EDGE_SAMPLES].sum() + dens[..., -EDGE_SAMPLES:].sum()) * grid.dz
    if edge > tol:
        raise GridError(f"density mass {edge:.3g} within {EDGE_SAMPLES} samples of the grid edge")


def _components(rho_b) -> tuple[np.ndarray, np.ndarray]:
    """Weights and TLS coefficient vectors of the initial TLS state."""
    if isinstance(rho_b, TlsAmplitudes):
        return np.array([1.0]), np.array([[rho_b.c1, rho_b.c2]])
    if not isinstance(rho_b, TlsDensityMatrix):
        rho_b = TlsDensityMatrix(rho_b)
    vals, vecs = rho_b.eig()
    vals = np.clip(vals, 0.0, None)
    keep = vals > MIN_WEIGHT
    vals, vecs = vals[keep], vecs[:, keep].T
    # fix the free global phase: first sizeable coefficient real and positive
    for v in vecs:
        j = 0 if abs(v[0]) > 1e-12 else 1
        v *= abs(v[j]) / v[j]
    order = np.argsort(-vals)
    return vals[order] / vals.sum(), vecs[order]


def initial_joint_state(amps: MomentumAmplitudes, rho_b, grid: Grid, t: float | None = None) -> JointState:
    """Product states ``<j|b_i> psi_F(s, t)`` for each eigenpair of ``rho_b``.

    ``rho_b`` may be a :class:`TlsDensityMatrix`, a 2x2 array or a
    :class:`TlsAmplitudes` (kept as a single component with its exact phase).
    """
    t = amps.t0 if t is None else t
    weights, coeffs = _components(rho_b)
    phi = electron_on_grid(amps, grid, t)
    psi = coeffs[:, :, None] * phi[None, None, :]
    return JointState(np.ascontiguousarray(psi), weights, grid, coeffs)


def trace_out_electron(state: JointState) -> TlsDensityMatrix:
    """``rho_ij = sum_c w_c sum_z psi_i psi_j^* dz``."""
    rho = np.einsum("c,cin,cjn->ij", state.weights, state.psi, state.psi.conj()) * state.grid.dz
    return TlsDensityMatrix(rho)
