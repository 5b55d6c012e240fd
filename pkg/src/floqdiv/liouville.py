"""Superoperators on column-major vectorized density matrices.

Convention: ``vec(rho)[n + m * d] = rho[n, m]`` (Fortran order), so that
``vec(A rho B) = kron(B.T, A) @ vec(rho)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import bath as _bath
from .errors import DimensionError
from .fock import DensityMatrix, FockSpace, OperatorMatrix, number_operator


@dataclass(frozen=True, eq=False)
class Superoperator:
    space: FockSpace
    elements: np.ndarray

    def __post_init__(self):
        D = self.space.dim**2
        el = np.asarray(self.elements, dtype=complex)
        if el.shape != (D, D):
            raise DimensionError(f"expected a {D}x{D} superoperator, got shape {el.shape}")
        object.__setattr__(self, "elements", el)

    def __add__(self, other):
        return Superoperator(self.space, self.elements + other.elements)

    def __mul__(self, c):
        return Superoperator(self.space, c * self.elements)

    __rmul__ = __mul__

    def apply(self, rho):
        """Action on a matrix; returns a plain array (the image need not be a state)."""
        return unvec(self.elements @ vectorize(rho))

    def trace(self):
        return complex(np.trace(self.elements))


def _as_array(x):
    if isinstance(x, (DensityMatrix, OperatorMatrix)):
        return x.elements
    return np.asarray(x)


def vectorize(rho):
    return _as_array(rho).reshape(-1, order="F").copy()


def unvec(v):
    v = np.asarray(v)
    d = math.isqrt(v.size)
    if v.ndim != 1 or d * d != v.size:
        raise DimensionError(f"vector of length {v.size} is not a vectorized square matrix")
    return v.reshape((d, d), order="F")


def devectorize(v):
    m = unvec(v)
    return DensityMatrix(FockSpace(m.shape[0]), m)


def left_mul(a):
    a = _as_array(a)
    return np.kron(np.eye(a.shape[0]), a)


def right_mul(b):
    b = _as_array(b)
    return np.kron(b.T, np.eye(b.shape[0]))


def commutator_superop(h):
    """Matrix of ``rho -> -i [h, rho]``."""
    return -1j * (left_mul(h) - right_mul(h))


def dissipator_superop(op):
    """``rho -> O rho O^dag - 1/2 {O^dag O, rho}``."""
    o = _as_array(op)
    if o.ndim != 2 or o.shape[0] != o.shape[1]:
        raise DimensionError("dissipator needs a square operator")
    space = FockSpace(o.shape[0])
    odo = o.conj().T @ o
    el = np.kron(o.conj(), o) - 0.5 * (left_mul(odo) + right_mul(odo))
    return Superoperator(space, el)


@dataclass(frozen=True, eq=False)
class PeriodicGenerator:
    """``L(t) = sum_k f_k(t) C_k`` with constant superoperators ``C_k``.

    A rate of ``None`` means the constant function 1. Rate callables must
    accept an array of times and be periodic with ``period``.
    """

    space: FockSpace
    terms: tuple
    rates: tuple
    period: float

    def __post_init__(self):
        if len(self.terms) != len(self.rates):
            raise ValueError("terms and rates differ in length")
        D = self.space.dim**2
        terms = tuple(np.asarray(c, dtype=complex) for c in self.terms)
        for c in terms:
            if c.shape != (D, D):
                raise DimensionError(f"generator term has shape {c.shape}, expected {(D, D)}")
        object.__setattr__(self, "terms", terms)
        diag = all(np.count_nonzero(c - np.diag(np.diag(c))) == 0 for c in terms)
        object.__setattr__(self, "_diagonal", diag)

    @property
    def dim(self):
        return self.space.dim**2

    @property
    def is_diagonal(self):
        return self._diagonal

    def diagonal_terms(self):
        """``(K, D)`` array of the term diagonals."""
        return np.array([np.diag(c) for c in self.terms])

    def rate_samples(self, times):
        """``(len(times), K)`` array of ``f_k(t)``."""
        times = np.asarray(times, dtype=float)
        cols = [np.ones_like(times) if f is None else np.asarray(f(times), dtype=float) for f in self.rates]
        return np.stack(cols, axis=-1)

    def at(self, t):
        f = self.rate_samples(np.array([t]))[0]
        el = sum(fk * c for fk, c in zip(f, self.terms))
        return Superoperator(self.space, el)

    def term_traces(self):
        return np.array([np.trace(c) for c in self.terms])


def _rate(fn, spec) -> Callable[[np.ndarray], np.ndarray]:
    return lambda t: fn(spec, t)


def model_generator(sys):
    """Generator of ``d rho/dt = -i[w n - g(t) n^2, rho] + gamma(t) D[n] rho``."""
    n = number_operator(sys.space).elements
    n2 = n @ n
    terms = (commutator_superop(sys.omega * n), commutator_superop(-n2), dissipator_superop(n).elements)
    rates = (None, _rate(_bath.drive_g, sys.bath), _rate(_bath.rate_gamma, sys.bath))
    return PeriodicGenerator(sys.space, terms, rates, sys.period)


def liouvillian_at(sys, t):
    return model_generator(sys).at(t)


def constant_rate_generator(space, omega, gamma0, jump="lowering", period=1.0):
    """Markovian control: ``-i[omega n, .] + gamma0 D[O]`` with a fixed rate.

    ``jump`` is ``"lowering"`` (amplitude damping, dense generator) or
    ``"number"`` (dephasing, diagonal generator). Its one-period map contracts
    the state-space volume whenever ``gamma0 > 0``.
    """
    n = number_operator(space).elements
    if jump == "lowering":
        o = np.diag(np.sqrt(np.arange(1, space.dim)), 1)
    elif jump == "number":
        o = n
    else:
        raise ValueError(f"unknown jump operator {jump!r}")
    gen = commutator_superop(omega * n) + gamma0 * dissipator_superop(o).elements
    return PeriodicGenerator(space, (gen,), (None,), period)


def as_generator(obj) -> PeriodicGenerator:
    if isinstance(obj, PeriodicGenerator):
        return obj
    return model_generator(obj)

