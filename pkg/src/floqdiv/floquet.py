"""Numerical Floquet analysis of a time-periodic Liouvillian.

The fundamental matrix ``Phi(t0 -> t1)`` solves ``dPhi/dt = L(t) Phi`` with
``Phi(t0) = I`` on a fixed step grid. Over one period it is the monodromy
matrix, whose eigenvalues are the characteristic multipliers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from . import bath as _bath
from . import kernels
from .eigen import eigvals
from .errors import NonConvergence, NumericalGateError, StepCountTooSmall
from .liouville import as_generator, unvec, vectorize
from .fock import DensityMatrix

RICHARDSON_TOL = 1e-6
DIAGONAL_TOL = 1e-10
SCHEMES = ("magnus4", "rk4")

_GL_OFFSETS = (0.5 - math.sqrt(3) / 6, 0.5 + math.sqrt(3) / 6)


@dataclass(frozen=True)
class PropagationConfig:
    """Fixed-step integration settings.

    ``magnus4`` is the fourth-order Gauss-Legendre Magnus (exponential)
    integrator; ``rk4`` is classical Runge-Kutta. Both are fourth order, but
    only the exponential scheme stays accurate for the fast high-coherence
    phases at the default step count.
    """

    steps_per_period: int = 2000
    scheme: str = "magnus4"
    richardson_check: bool = False
    threads: int = 1
    backend: str | None = None

    def __post_init__(self):
        if int(self.steps_per_period) != self.steps_per_period or self.steps_per_period < 100:
            raise StepCountTooSmall(f"steps_per_period must be an integer >= 100, got {self.steps_per_period!r}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


@dataclass(frozen=True, eq=False)
class DynamicalMap:
    matrix: np.ndarray
    t_start: float
    t_end: float
    period: float
    richardson_deviation: float | None = None

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def span(self):
        return self.t_end - self.t_start

    def apply(self, rho):
        """Propagate a state; the result is re-Hermitized against rounding."""
        out = unvec(self.matrix @ vectorize(rho))
        out = (out + out.conj().T) / 2
        return DensityMatrix(rho.space, out)

    def compose(self, later):
        """``later . self`` (``self`` acts first)."""
        if not math.isclose(later.t_start, self.t_end, rel_tol=0, abs_tol=1e-12 * max(1.0, abs(self.t_end))):
            raise ValueError("maps are not contiguous in time")
        return DynamicalMap(later.matrix @ self.matrix, self.t_start, later.t_end, self.period)

    def is_diagonal(self, tol=DIAGONAL_TOL):
        off = self.matrix - np.diag(np.diag(self.matrix))
        return float(np.max(np.abs(off), initial=0.0)) <= tol


def step_count(span, period, steps_per_period):
    # guard against t1 = l*T landing one ulp above a grid multiple
    return max(1, math.ceil(abs(span) / period * steps_per_period - 1e-9))


def _diag_propagate(gen, t0, t1, n, cfg, y0):
    h = (t1 - t0) / n
    starts = t0 + h * np.arange(n)
    C = gen.diagonal_terms()
    if cfg.scheme == "magnus4":
        f1 = gen.rate_samples(starts + _GL_OFFSETS[0] * h)
        f2 = gen.rate_samples(starts + _GL_OFFSETS[1] * h)
        return kernels.magnus4_diag(C, 0.5 * h * (f1 + f2), y0, cfg.threads, cfg.backend)
    f = np.stack([gen.rate_samples(starts + c * h) for c in (0.0, 0.5, 1.0)], axis=1)
    return kernels.rk4_diag(C, f, h, y0, cfg.threads, cfg.backend)


def _combine(terms, f):
    return sum(fk * c for fk, c in zip(f, terms))


def _dense_propagate(gen, t0, t1, n, cfg, y0):
    """Generic path: full matrices, BLAS products; ``y0`` is a matrix or vector."""
    h = (t1 - t0) / n
    starts = t0 + h * np.arange(n)
    y = np.array(y0, dtype=complex, copy=True)
    constant = all(r is None for r in gen.rates)
    if cfg.scheme == "magnus4":
        f1 = gen.rate_samples(starts + _GL_OFFSETS[0] * h)
        f2 = gen.rate_samples(starts + _GL_OFFSETS[1] * h)
        if constant:
            step = scipy.linalg.expm(h * _combine(gen.terms, f1[0]))
            for _ in range(n):
                y = step @ y
            return y
        for j in range(n):
            a1 = _combine(gen.terms, f1[j])
            a2 = _combine(gen.terms, f2[j])
            omega = 0.5 * h * (a1 + a2) + (math.sqrt(3) / 12) * h * h * (a2 @ a1 - a1 @ a2)
            y = scipy.linalg.expm(omega) @ y
        return y
    fs = [gen.rate_samples(starts + c * h) for c in (0.0, 0.5, 1.0)]
    for j in range(n):
        a1, a2, a3 = (_combine(gen.terms, f[j]) for f in fs)
        k1 = a1 @ y
        k2 = a2 @ (y + 0.5 * h * k1)
        k3 = a2 @ (y + 0.5 * h * k2)
        k4 = a3 @ (y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def _propagate_matrix(gen, t0, t1, n, cfg):
    if gen.is_diagonal:
        return np.diag(_diag_propagate(gen, t0, t1, n, cfg, np.ones(gen.dim, dtype=complex)))
    return _dense_propagate(gen, t0, t1, n, cfg, np.eye(gen.dim, dtype=complex))


def propagate_map(system, t0, t1, cfg=None):
    """Fundamental matrix from ``t0`` to ``t1`` for a system or generator.

    With ``cfg.richardson_check`` the propagation is repeated at twice the
    step count; the returned map is always the default-resolution one, with
    the deviation recorded.

    Raises
    ------
    NonConvergence
        If the Richardson deviation exceeds ``RICHARDSON_TOL``.
    """
    cfg = cfg or PropagationConfig()
    if not t1 > t0:
        raise ValueError(f"need t1 > t0, got [{t0}, {t1}]")
    gen = as_generator(system)
    n = step_count(t1 - t0, gen.period, cfg.steps_per_period)
    phi = _propagate_matrix(gen, t0, t1, n, cfg)
    dev = None
    if cfg.richardson_check:
        fine = _propagate_matrix(gen, t0, t1, 2 * n, cfg)
        dev = float(np.max(np.abs(phi - fine)))
        if dev > RICHARDSON_TOL:
            raise NonConvergence(f"Richardson deviation {dev:.3g} exceeds {RICHARDSON_TOL:g}")
    return DynamicalMap(phi, float(t0), float(t1), gen.period, dev)


def propagate_state(system, rho0, t, cfg=None):
    """``Phi(0 -> t) rho0`` without forming the full matrix."""
    cfg = cfg or PropagationConfig()
    gen = as_generator(system)
    if t == 0:
        return rho0
    n = step_count(t, gen.period, cfg.steps_per_period)
    v0 = vectorize(rho0)
    if gen.is_diagonal:
        v = _diag_propagate(gen, 0.0, t, n, cfg, v0)
    else:
        v = _dense_propagate(gen, 0.0, t, n, cfg, v0)
    out = unvec(v)
    return DensityMatrix(rho0.space, (out + out.conj().T) / 2)


def monodromy(system, cfg=None):
    gen = as_generator(system)
    return propagate_map(gen, 0.0, gen.period, cfg)


def map_determinant(phi):
    """``(phase, log|det|)`` of a map via LU with partial pivoting."""
    m = phi.matrix if isinstance(phi, DynamicalMap) else np.asarray(phi)
    sign, logabs = np.linalg.slogdet(m)
    return complex(sign), float(logabs)


def det_value(phi):
    phase, logabs = map_determinant(phi)
    return phase * math.exp(logabs) if logabs > -745 else 0j


def trace_integral(system, t0, t1, cfg=None):
    """``int Tr L`` by two-point Gauss-Legendre on the propagation grid."""
    cfg = cfg or PropagationConfig()
    gen = as_generator(system)
    if t1 == t0:
        return 0.0
    n = step_count(t1 - t0, gen.period, cfg.steps_per_period)
    h = (t1 - t0) / n
    starts = t0 + h * np.arange(n)
    tr = gen.term_traces()
    total = 0.0
    for c in _GL_OFFSETS:
        total = total + np.sum(gen.rate_samples(starts + c * h) @ tr)
    return complex(0.5 * h * total)


@dataclass(frozen=True, eq=False)
class FloquetSpectrum:
    """Characteristic multipliers and principal Floquet exponents.

    Exponents are defined modulo ``2 pi i / T``; ``branch_index`` records the
    branch used (always 0, the principal one).
    """

    multipliers: np.ndarray
    exponents: np.ndarray
    period: float
    labels: list | None = None
    branch_index: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.branch_index is None:
            object.__setattr__(self, "branch_index", np.zeros(len(self.multipliers), dtype=int))

    @property
    def pairing(self):
        if self.labels is None:
            return None
        return {lab: i for i, lab in enumerate(self.labels)}


def principal_exponent(lam, period):
    return np.log(np.asarray(lam, dtype=complex)) / period


def floquet_spectrum(mono, method="lapack"):
    """Spectrum of a one-period map.

    Diagonal monodromies (within ``DIAGONAL_TOL``) are read off directly and
    labelled ``(n, m)`` for the coherence ``|n><m|``.
    """
    if not math.isclose(mono.span, mono.period, rel_tol=1e-12):
        raise ValueError(f"map spans {mono.span}, not one period {mono.period}")
    labels = None
    if mono.is_diagonal():
        lam = np.diag(mono.matrix).copy()
        d = math.isqrt(mono.dim)
        idx = np.arange(mono.dim)
        labels = [(int(k % d), int(k // d)) for k in idx]
    else:
        lam = eigvals(mono.matrix, method=method)
    L = principal_exponent(lam, mono.period)
    order = np.lexsort((-L.imag, -np.round(L.real, 12)))
    lam = lam[order]
    L = L[order]
    if labels is not None:
        labels = [labels[i] for i in order]
    return FloquetSpectrum(lam, L, mono.period, labels)


def analytic_multipliers(sys):
    """``[((m, n), lambda_mn)]`` with ``lambda = exp(-i (E_m - E_n) T + i G(T) (m^2 - n^2))``."""
    T = sys.period
    GT = _bath.G_period(sys.bath)
    E = sys.energies()
    out = []
    d = sys.space.dim
    for n in range(d):
        for m in range(d):
            if m == n:
                lam = 1.0 + 0.0j
            else:
                lam = complex(np.exp(-1j * (E[m] - E[n]) * T + 1j * GT * (m * m - n * n)))
            out.append(((m, n), lam))
    return out


def analytic_exponent_imag(sys, m, n):
    """``Im L_(m,n) = -(E_m - E_n) + (G(T)/T)(m^2 - n^2)``, not branch-reduced."""
    E = sys.energies()
    return -(E[m] - E[n]) + _bath.G_period(sys.bath) / sys.period * (m * m - n * n)


def wrap_to_principal(x, period):
    """Reduce an imaginary exponent part into ``(-pi/T, pi/T]``."""
    w = 2 * math.pi / period
    r = np.mod(np.asarray(x) + w / 2, w) - w / 2
    return np.where(np.isclose(r, -w / 2, rtol=0, atol=1e-15), w / 2, r)


def match_spectra(numeric, analytic):
    """Optimal one-to-one matching of two multisets of complex numbers.

    Returns ``(max_distance, perm)`` where ``numeric[i]`` pairs with
    ``analytic[perm[i]]``. Degenerate values are interchangeable, so only
    the multiset distance is meaningful.
    """
    a = np.asarray(numeric, dtype=complex)
    b = np.asarray(analytic, dtype=complex)
    if a.shape != b.shape:
        raise ValueError("spectra differ in size")
    dist = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(dist)
    perm = np.empty(len(a), dtype=int)
    perm[rows] = cols
    return float(dist[rows, cols].max(initial=0.0)), perm


def divisibility_delta(mono, m):
    """``Delta_m = |det Phi(T)|^m (|det Phi(T)| - 1) / T``."""
    if m < 0 or int(m) != m:
        raise ValueError("m must be a nonnegative integer")
    _, logabs = map_determinant(mono)
    vol = math.exp(logabs)
    return vol**m * (vol - 1.0) / mono.period


def is_divisible(delta, tol=1e-9):
    return delta <= tol


def volume_series(mono, m_max, verify=True, tol=1e-6):
    """``|det Phi(l T)|`` for ``l = 0..m_max`` from the one-period determinant.

    With ``verify`` the same volumes are recomputed from explicit l-fold
    compositions of the monodromy.
    """
    _, logabs = map_determinant(mono)
    ls = np.arange(m_max + 1)
    series = np.exp(ls * logabs)
    if verify and m_max > 0:
        acc = np.eye(mono.dim, dtype=complex)
        for l in range(1, m_max + 1):
            acc = mono.matrix @ acc
            direct = math.exp(map_determinant(acc)[1])
            if abs(direct - series[l]) > tol:
                raise NumericalGateError(
                    f"|det Phi({l}T)| = {direct:.12g} by composition vs {series[l]:.12g} by power law"
                )
    return series
