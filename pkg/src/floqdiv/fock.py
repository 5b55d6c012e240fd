"""Truncated single-mode Fock space: operators, canonical states, density matrices."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln
from scipy.stats import poisson

from .errors import DimensionError, TruncationError

TAIL_THRESHOLD = 1e-10
_STATE_TOL = 1e-9


def _frozen(a, dtype=complex):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FockSpace:
    """Fock levels ``|0>, ..., |dim-1>``."""

    dim: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise ValueError(f"Fock dimension must be an integer >= 2, got {self.dim!r}")
        object.__setattr__(self, "dim", int(self.dim))

    @property
    def levels(self):
        return np.arange(self.dim)


@dataclass(frozen=True, eq=False)
class Ket:
    space: FockSpace
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(self.amplitudes)
        if amps.shape != (self.space.dim,):
            raise DimensionError(f"expected {self.space.dim} amplitudes, got shape {amps.shape}")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"ket is not normalized (norm^2 = {norm!r})")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, space, amplitudes):
        amps = np.asarray(amplitudes, dtype=complex)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(space, amps / norm)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    space: FockSpace
    elements: np.ndarray

    def __post_init__(self):
        el = _frozen(self.elements)
        d = self.space.dim
        if el.shape != (d, d):
            raise DimensionError(f"expected a {d}x{d} operator, got shape {el.shape}")
        object.__setattr__(self, "elements", el)

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            _check_space(self.space, other.space)
            return OperatorMatrix(self.space, self.elements @ other.elements)
        if isinstance(other, Ket):
            _check_space(self.space, other.space)
            return self.elements @ other.amplitudes
        return NotImplemented

    def dag(self):
        return OperatorMatrix(self.space, self.elements.conj().T)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Reduced density operator of the resonator.

    Hermiticity and unit trace are enforced at construction (tolerance 1e-9,
    loose enough for numerically propagated states). Positivity is not
    checked here; see :meth:`min_eigenvalue`.
    """

    space: FockSpace
    elements: np.ndarray

    def __post_init__(self):
        el = _frozen(self.elements)
        d = self.space.dim
        if el.shape != (d, d):
            raise DimensionError(f"expected a {d}x{d} density matrix, got shape {el.shape}")
        if np.max(np.abs(el - el.conj().T)) > _STATE_TOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(el) - 1.0) > _STATE_TOL:
            raise ValueError(f"density matrix trace is {np.trace(el)!r}, expected 1")
        object.__setattr__(self, "elements", el)

    @classmethod
    def maximally_mixed(cls, space):
        return cls(space, np.eye(space.dim) / space.dim)

    def min_eigenvalue(self):
        return float(np.linalg.eigvalsh(self.elements)[0])


def _check_space(a, b):
    if a.dim != b.dim:
        raise DimensionError(f"Fock dimension mismatch: {a.dim} vs {b.dim}")


def annihilation_operator(space):
    d = space.dim
    return OperatorMatrix(space, np.diag(np.sqrt(np.arange(1, d)), 1))


def number_operator(space):
    return OperatorMatrix(space, np.diag(np.arange(space.dim, dtype=float)))


def parity_operator(space):
    return OperatorMatrix(space, np.diag((-1.0) ** np.arange(space.dim)))


def fock_state(space, n):
    if not 0 <= n < space.dim:
        raise ValueError(f"level {n} outside Fock space of dimension {space.dim}")
    amps = np.zeros(space.dim, dtype=complex)
    amps[n] = 1.0
    return Ket(space, amps)


def coherent_tail_mass(dim, alpha):
    """Poisson weight of a coherent state above level ``dim - 1``."""
    return float(poisson.sf(dim - 1, abs(alpha) ** 2))


def _check_truncation(space, alpha, threshold):
    tail = coherent_tail_mass(space.dim, alpha)
    if tail > threshold:
        raise TruncationError(
            f"coherent amplitude |alpha|={abs(alpha):g} leaves tail mass {tail:.3g} "
            f"above level {space.dim - 1} (threshold {threshold:g})"
        )


def _coherent_amplitudes(n, alpha):
    if alpha == 0:
        out = np.zeros(n.shape, dtype=complex)
        out[0] = 1.0
        return out
    # alpha^n / sqrt(n!) in log form to avoid overflow of n!
    log_mag = n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1) - 0.5 * abs(alpha) ** 2
    return np.exp(log_mag) * np.exp(1j * np.angle(alpha) * n)


def coherent_state(space, alpha, threshold=TAIL_THRESHOLD):
    """Truncated coherent state ``|alpha>`` renormalized on the retained levels.

    Raises
    ------
    TruncationError
        If the discarded Poisson tail exceeds ``threshold``.
    """
    alpha = complex(alpha)
    _check_truncation(space, alpha, threshold)
    return Ket.normalized(space, _coherent_amplitudes(space.levels, alpha))


def cat_state(space, alpha, threshold=TAIL_THRESHOLD):
    """Even cat ``C(alpha)(|alpha> + |-alpha>)``; odd levels are exactly zero."""
    alpha = complex(alpha)
    _check_truncation(space, alpha, threshold)
    n = space.levels
    amps = _coherent_amplitudes(n, alpha)
    amps[n % 2 == 1] = 0.0
    return Ket.normalized(space, amps)


def working_dim(dim, alpha):
    """Enlarged dimension in which ``D(alpha)`` is exponentiated.

    The leading ``dim x dim`` block of the working-space exponential matches
    the untruncated operator to ~1e-13 with this margin; the required margin
    grows like ``(8 + 0.8 sqrt(dim)) |alpha|``, which the extra padding covers.
    """
    r = abs(alpha)
    if r == 0:
        return dim
    root = math.sqrt(dim)
    return dim + math.ceil((10 + root) * r) + math.ceil(2 * root) + 10


def displacement_operator(space, alpha, truncate=True):
    """``D(alpha) = exp(alpha b^dag - alpha^* b)``.

    The exponential is taken in a working space of ``working_dim`` levels. With
    ``truncate=False`` the full working-space operator is returned (its
    ``space`` is the enlarged one), which is what products of displacements
    need: the retained block alone is not closed under multiplication.
    """
    alpha = complex(alpha)
    big = FockSpace(working_dim(space.dim, alpha))
    b = annihilation_operator(big).elements
    d_big = expm(alpha * b.conj().T - np.conj(alpha) * b)
    if not truncate:
        return OperatorMatrix(big, d_big)
    return OperatorMatrix(space, d_big[: space.dim, : space.dim])


def density_from_ket(psi):
    a = psi.amplitudes
    return DensityMatrix(psi.space, np.outer(a, a.conj()))


def purity(rho):
    el = rho.elements
    # Tr(rho^2) = sum |rho_nm|^2 for Hermitian rho
    return float(np.sum(np.abs(el) ** 2))


def expectation(rho, op):
    _check_space(rho.space, op.space)
    return complex(np.sum(rho.elements * op.elements.T))


def embed(rho, space):
    """Pad ``rho`` with zeros into a larger Fock space."""
    if space.dim < rho.space.dim:
        raise DimensionError("target space is smaller than the state's space")
    out = np.zeros((space.dim, space.dim), dtype=complex)
    d = rho.space.dim
    out[:d, :d] = rho.elements
    return DensityMatrix(space, out)
