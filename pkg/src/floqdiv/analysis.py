"""Phase-space and time-series observables."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.integrate import trapezoid

from . import exact
from .bath import integral_Gamma
from .errors import NumericalGateError, TruncationError
from .fock import FockSpace, annihilation_operator, working_dim
from .floquet import monodromy, volume_series

OBSERVABLES = ("return_probability", "linear_entropy", "n2", "volume")
MAX_WORKING_DIM = 4000
_POINT_CHUNK = 4096
_WIGNER_BOUND = 1 / math.pi + 1e-9


@dataclass(frozen=True)
class PhaseGrid:
    q_min: float
    q_max: float
    p_min: float
    p_max: float
    n_q: int
    n_p: int

    def __post_init__(self):
        if self.n_q < 2 or self.n_p < 2:
            raise ValueError("grid needs at least 2 points per axis")
        if not (self.q_max > self.q_min and self.p_max > self.p_min):
            raise ValueError("grid bounds must satisfy max > min on both axes")

    @classmethod
    def square(cls, half_width, n):
        return cls(-half_width, half_width, -half_width, half_width, n, n)

    @property
    def q(self):
        return np.linspace(self.q_min, self.q_max, self.n_q)

    @property
    def p(self):
        return np.linspace(self.p_min, self.p_max, self.n_p)

    def max_alpha(self):
        qq = max(abs(self.q_min), abs(self.q_max))
        pp = max(abs(self.p_min), abs(self.p_max))
        return math.hypot(qq, pp) / math.sqrt(2)


@dataclass(frozen=True, eq=False)
class WignerField:
    """``values[i, j] = W(q_i, p_j)`` with ``alpha = (Q + iP)/sqrt 2``."""

    grid: PhaseGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n_q, self.grid.n_p):
            raise ValueError(f"field shape {v.shape} does not match grid")
        if v.size and (v.max() > _WIGNER_BOUND or v.min() < -_WIGNER_BOUND):
            raise ValueError("Wigner values exceed the +-1/pi bound")
        object.__setattr__(self, "values", v)


@lru_cache(maxsize=8)
def _quadrature_eigensystem(dim):
    """Eigenpairs of ``-i (b^dag - b)`` on ``dim`` levels.

    ``exp(s (b^dag - b)) = V diag(exp(i s mu)) V^H``, so every displacement
    on the working space is a phase-weighted sum over these modes.
    """
    b = annihilation_operator(FockSpace(dim)).elements
    mu, V = np.linalg.eigh(-1j * (b.conj().T - b))
    mu.setflags(write=False)
    V.setflags(write=False)
    return mu, V


def _diagonal_moments(rho, Vb):
    """``q[j, d] = sum_{m - n = d} rho_nm (-1)^n V_mj conj(V_nj)``, ``d`` offset by ``N-1``."""
    N = rho.shape[0]
    A = Vb.conj() * ((-1.0) ** np.arange(N))[:, None]
    q = np.zeros((Vb.shape[1], 2 * N - 1), dtype=complex)
    for d in range(-(N - 1), N):
        n = np.arange(max(0, -d), min(N, N - d))
        q[:, d + N - 1] = np.einsum("nj,n,nj->j", A[n], rho[n, n + d], Vb[n + d])
    return q


def wigner(rho, grid, threads=1):
    """Wigner function by displaced parity, ``W = Tr[Pi D^dag(a) rho D(a)] / pi``.

    Uses ``D(a) Pi D^dag(a) = D(2a) Pi``, so each point needs only the
    leading block of ``D(2a)``. That block comes from the eigensystem of the
    quadrature generator on a working space sized by ``working_dim``.

    Raises
    ------
    TruncationError
        If the grid reaches so far out that the working space would exceed
        ``MAX_WORKING_DIM`` levels.
    """
    N = rho.space.dim
    M = working_dim(N, 2 * grid.max_alpha())
    if M > MAX_WORKING_DIM:
        raise TruncationError(f"grid extent needs {M} working levels (> {MAX_WORKING_DIM})")
    mu, V = _quadrature_eigensystem(M)
    q = _diagonal_moments(rho.elements, V[:N])
    dd = np.arange(-(N - 1), N)

    Q, P = np.meshgrid(grid.q, grid.p, indexing="ij")
    alpha = ((Q + 1j * P) / math.sqrt(2)).ravel()
    s = 2 * np.abs(alpha)
    theta = np.angle(alpha)

    def chunk(lo):
        hi = min(lo + _POINT_CHUNK, alpha.size)
        z = np.exp(1j * np.outer(s[lo:hi], mu)) @ q
        return np.sum(z * np.exp(1j * np.outer(theta[lo:hi], dd)), axis=1) / math.pi

    starts = range(0, alpha.size, _POINT_CHUNK)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(chunk, starts))
    else:
        parts = [chunk(lo) for lo in starts]
    w = np.concatenate(parts) if parts else np.zeros(0, dtype=complex)
    residue = float(np.max(np.abs(w.imag), initial=0.0))
    if residue > 1e-10:
        raise NumericalGateError(f"Wigner function has imaginary residue {residue:.3g}")
    return WignerField(grid, w.real.reshape(Q.shape))


def wigner_norm(field):
    """Trapezoid integral of the field over its grid (1 for a covered state)."""
    g = field.grid
    return float(trapezoid(trapezoid(field.values, g.p, axis=1), g.q))


class Series(NamedTuple):
    t: np.ndarray
    values: np.ndarray


def _observable(name, rho_t, rho0):
    if name == "return_probability":
        return exact.return_probability(rho_t, rho0)
    if name == "linear_entropy":
        return exact.linear_entropy(rho_t)
    if name == "n2":
        return exact.n2_expectation(rho_t)
    raise ValueError(f"unknown observable {name!r}; choose from {OBSERVABLES}")


def _log_volume(sys, t):
    n = sys.space.levels.astype(float)
    spread = float(np.sum((n[:, None] - n[None, :]) ** 2))
    return -integral_Gamma(sys.bath, t) * spread


def stroboscopic_series(sys, rho0, observable, l_max, cross_check=False, cfg=None, tol=1e-6):
    """Observable at ``t_l = l T`` for ``l = 0..l_max``.

    States come from the exact solver. ``volume`` uses the monodromy
    determinant. With ``cross_check`` every stroboscopic state is compared
    against powers of the numerically propagated monodromy.
    """
    T = sys.period
    ls = np.arange(l_max + 1)
    times = ls * T
    mono = None
    if observable == "volume" or cross_check:
        mono = monodromy(sys, cfg)
    if observable == "volume":
        return Series(times, volume_series(mono, l_max))
    values = np.empty(l_max + 1)
    rho_num = rho0
    for l in ls:
        rho_t = exact.evolve_exact(rho0, sys, times[l])
        if cross_check and l > 0:
            rho_num = mono.apply(rho_num)
            err = float(np.max(np.abs(rho_num.elements - rho_t.elements)))
            if err > tol:
                raise NumericalGateError(f"monodromy power disagrees with exact state at l={l}: {err:.3g}")
        values[l] = _observable(observable, rho_t, rho0)
    return Series(times, values)


def dense_series(sys, rho0, observable, t_grid):
    """Observable sampled on an arbitrary time grid via the exact solver.

    ``volume`` is ``exp(int_0^t Tr L)``, which underflows to 0 for large
    Fock spaces away from stroboscopic times.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if observable == "volume":
        return Series(t_grid, np.array([math.exp(_log_volume(sys, t)) for t in t_grid]))
    vals = np.array([_observable(observable, exact.evolve_exact(rho0, sys, t), rho0) for t in t_grid])
    return Series(t_grid, vals)
