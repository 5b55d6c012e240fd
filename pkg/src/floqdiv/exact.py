"""Closed-form evolution of the dephasing resonator.

Every coherence evolves independently:

    rho_nm(t) = rho_nm(0) exp(-i (n - m) omega t) F_nm(t),
    F_nm(t)   = exp(i G(t) (n^2 - m^2)) exp(-Gamma(t) (n - m)^2),

so the map is elementwise and valid for mixed initial states.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bath as _bath
from .errors import DimensionError
from .fock import DensityMatrix, FockSpace


@dataclass(frozen=True)
class SystemSpec:
    """Resonator of frequency ``omega`` on a truncated Fock space, coupled to ``bath``."""

    omega: float
    space: FockSpace
    bath: _bath.BathSpec

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be > 0, got {self.omega!r}")

    @property
    def period(self):
        return self.bath.period

    def energies(self):
        return self.omega * self.space.levels


def _level_grids(space):
    n = space.levels.astype(float)
    return n[:, None], n[None, :]


def _log_factor(sys, t):
    """``log`` of the full elementwise propagation factor at scalar ``t``."""
    n, m = _level_grids(sys.space)
    G = _bath.integral_G(sys.bath, t)
    Gam = _bath.integral_Gamma(sys.bath, t)
    return -1j * sys.omega * (n - m) * t + 1j * G * (n**2 - m**2) - Gam * (n - m) ** 2


def influence_functional(sys, n, m, t):
    d = sys.space.dim
    if not (0 <= n < d and 0 <= m < d):
        raise IndexError(f"levels ({n}, {m}) outside Fock space of dimension {d}")
    if n == m:
        return 1.0 + 0.0j
    G = _bath.integral_G(sys.bath, t)
    Gam = _bath.integral_Gamma(sys.bath, t)
    return complex(np.exp(1j * G * (n * n - m * m) - Gam * (n - m) ** 2))


def influence_matrix(sys, t):
    """All ``F_nm(t)`` at once."""
    n, m = _level_grids(sys.space)
    G = _bath.integral_G(sys.bath, t)
    Gam = _bath.integral_Gamma(sys.bath, t)
    F = np.exp(1j * G * (n**2 - m**2) - Gam * (n - m) ** 2)
    np.fill_diagonal(F, 1.0)
    return F


def evolve_exact(rho0, sys, t):
    if rho0.space.dim != sys.space.dim:
        raise DimensionError(f"state dimension {rho0.space.dim} != system dimension {sys.space.dim}")
    factor = np.exp(_log_factor(sys, t))
    np.fill_diagonal(factor, 1.0)
    out = rho0.elements * factor
    # F_mn = conj(F_nm); symmetrize away the last-ulp rounding so rho stays exactly Hermitian
    out = (out + out.conj().T) / 2
    return DensityMatrix(sys.space, out)


def return_probability(rho_t, rho_0):
    """``R(t) = Tr[rho(t) rho(0)]``."""
    if rho_t.space.dim != rho_0.space.dim:
        raise DimensionError("return probability of states on different spaces")
    return float(np.sum(rho_t.elements * rho_0.elements.T).real)


def linear_entropy(rho):
    return 1.0 - float(np.sum(np.abs(rho.elements) ** 2))


def n2_expectation(rho):
    n = rho.space.levels.astype(float)
    return float(np.sum(n**2 * np.diag(rho.elements).real))


def n_expectation(rho):
    n = rho.space.levels.astype(float)
    return float(np.sum(n * np.diag(rho.elements).real))
