"""Engineered pendulum-wave bath.

Modes ``k = 1..N`` have frequencies ``w_k = k**s * Omega`` and couplings
``g_k = h exp(-z k / 2)``, so every bath function is ``T = 2 pi / Omega``
periodic. The four time functions are

* ``gamma(t) = 2 sum g_k^2 / w_k sin(w_k t) coth(beta w_k / 2)``  (dephasing rate)
* ``g(t)     = sum g_k^2 / w_k (1 - cos w_k t)``                  (induced Kerr drive)
* ``G(t)     = sum (g_k / w_k)^2 (w_k t - sin w_k t)``            (integral of g)
* ``Gamma(t) = sum (g_k / w_k)^2 (1 - cos w_k t) coth(beta w_k / 2)``  (half integral of gamma)

For an infinite ohmic-comb bath (``s = 1``, zero temperature) the sums are
evaluated in closed form through ``log(1 - q e^{i Omega t})`` and the
dilogarithm, with ``q = exp(-z)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre, spence

from .errors import ModeIndexOutOfRange

INFINITE = "infinite"

# Below this many (modes x times) products the sums are evaluated in one shot.
_CHUNK = 1 << 21


@dataclass(frozen=True)
class BathSpec:
    """Bath parameters.

    Parameters
    ----------
    h : float
        Overall coupling (rate units, same as ``omega0``). ``h = 0`` decouples
        the bath.
    z : float
        Exponential decay of the couplings with mode index.
    omega0 : float
        Fundamental frequency; the period is ``2 pi / omega0``.
    s : int
        Frequency exponent, ``w_k = k**s * omega0``.
    modes : int or ``INFINITE``
        Number of modes, or the closed-form infinite bath.
    beta : float or None
        Inverse temperature; ``None`` is zero temperature.
    coupling_exponent : {"half", "full"}
        ``g_k = h exp(-z k / 2)`` ("half") or ``h exp(-z k)`` ("full").
    """

    h: float
    z: float
    omega0: float = 2 * math.pi
    s: int = 1
    modes: int | str = 60
    beta: float | None = None
    coupling_exponent: str = "half"

    def __post_init__(self):
        if not self.h >= 0:
            raise ValueError(f"h must be >= 0, got {self.h!r}")
        if not self.z > 0:
            raise ValueError(f"z must be > 0, got {self.z!r}")
        if not self.omega0 > 0:
            raise ValueError(f"omega0 must be > 0, got {self.omega0!r}")
        if int(self.s) != self.s or self.s < 1:
            raise ValueError(f"s must be a positive integer, got {self.s!r}")
        if self.modes != INFINITE:
            if isinstance(self.modes, bool) or int(self.modes) != self.modes or self.modes < 1:
                raise ValueError(f"modes must be a positive integer or {INFINITE!r}")
        if self.beta is not None and not self.beta > 0:
            raise ValueError(f"beta must be > 0 or None, got {self.beta!r}")
        if self.coupling_exponent not in ("half", "full"):
            raise ValueError("coupling_exponent must be 'half' or 'full'")
        if self.closed_form and (self.s != 1 or self.beta is not None):
            raise ValueError("the infinite closed-form bath requires s = 1 and zero temperature")

    @property
    def period(self):
        return 2 * math.pi / self.omega0

    @property
    def closed_form(self):
        return self.modes == INFINITE

    @property
    def decay(self):
        """Exponent ``z_eff`` with ``g_k^2 = h^2 exp(-z_eff k)``."""
        return self.z if self.coupling_exponent == "half" else 2 * self.z

    def mode_indices(self):
        if self.closed_form:
            raise ValueError("the infinite bath has no finite mode list")
        return np.arange(1, int(self.modes) + 1)

    def frequencies(self):
        return self.mode_indices().astype(float) ** self.s * self.omega0

    def couplings(self):
        return self.h * np.exp(-self.decay * self.mode_indices() / 2)

    def thermal_factor(self):
        if self.beta is None:
            return np.ones(int(self.modes))
        return 1.0 / np.tanh(self.beta * self.frequencies() / 2)


def _turn_phase(spec, t):
    """Phases ``w_k t`` reduced mod 2 pi, shape ``t.shape + (N,)``.

    Reducing in units of whole periods makes ``t = l T`` give exact zeros.
    """
    u = np.asarray(t, dtype=float) / spec.period
    k_pow = spec.mode_indices().astype(float) ** spec.s
    frac = np.fmod(np.multiply.outer(u, k_pow), 1.0)
    return 2 * math.pi * frac


def _mode_sum(spec, t, term):
    """``sum_k term(phase_k, k-index arrays)`` over modes, chunked in ``t``."""
    t = np.asarray(t, dtype=float)
    flat = t.reshape(-1)
    out = np.empty(flat.shape)
    step = max(1, _CHUNK // int(spec.modes))
    for i in range(0, flat.size, step):
        tt = flat[i : i + step]
        out[i : i + step] = term(tt, _turn_phase(spec, tt)).sum(axis=-1)
    return out.reshape(t.shape)


def _log_kernel(spec, t):
    q = math.exp(-spec.decay)
    theta = 2 * math.pi * np.fmod(np.asarray(t, dtype=float) / spec.period, 1.0)
    return np.log(1 - q * np.exp(1j * theta)), q, theta


def _dilog(x):
    # Li2(x) = spence(1 - x) in scipy's convention
    return spence(1 - np.asarray(x, dtype=complex))


def _scalar(t, value):
    return float(value) if np.ndim(t) == 0 else value


def rate_gamma(spec, t):
    """Dephasing rate ``gamma(t)``; negative on half of each period."""
    if spec.h == 0:
        return _scalar(t, np.zeros(np.shape(t)))
    if spec.closed_form:
        log, _, _ = _log_kernel(spec, t)
        return _scalar(t, -2 * spec.h**2 / spec.omega0 * log.imag)
    c = spec.couplings() ** 2 / spec.frequencies() * spec.thermal_factor()
    return _scalar(t, 2 * _mode_sum(spec, t, lambda tt, ph: c * np.sin(ph)))


def drive_g(spec, t):
    """Bath-induced Kerr coefficient ``g(t) >= 0``."""
    if spec.h == 0:
        return _scalar(t, np.zeros(np.shape(t)))
    if spec.closed_form:
        log, q, _ = _log_kernel(spec, t)
        return _scalar(t, spec.h**2 / spec.omega0 * (log.real - math.log1p(-q)))
    c = spec.couplings() ** 2 / spec.frequencies()
    return _scalar(t, _mode_sum(spec, t, lambda tt, ph: c * (1 - np.cos(ph))))


def integral_G(spec, t):
    """``G(t) = int_0^t g``; grows by ``T sum g_k^2 / w_k`` every period."""
    if spec.h == 0:
        return _scalar(t, np.zeros(np.shape(t)))
    t = np.asarray(t, dtype=float)
    if spec.closed_form:
        q = math.exp(-spec.decay)
        _, _, theta = _log_kernel(spec, t)
        secular = -math.log1p(-q) * t
        li = _dilog(q * np.exp(1j * theta)).imag / spec.omega0
        return _scalar(t, spec.h**2 / spec.omega0 * (secular - li))
    w = spec.frequencies()
    c = (spec.couplings() / w) ** 2
    per_time = float(np.sum(c * w))
    # secular part summed once; only the bounded sin part is mode-summed
    osc = _mode_sum(spec, t, lambda tt, ph: c * np.sin(ph))
    return _scalar(t, per_time * t - osc)


def integral_Gamma(spec, t):
    """``Gamma(t) >= 0`` with ``dGamma/dt = gamma / 2`` and ``Gamma(l T) = 0``."""
    if spec.h == 0:
        return _scalar(t, np.zeros(np.shape(t)))
    if spec.closed_form:
        q = math.exp(-spec.decay)
        _, _, theta = _log_kernel(spec, t)
        val = (_dilog(q).real - _dilog(q * np.exp(1j * theta)).real) / spec.omega0**2
        return _scalar(t, spec.h**2 * val)
    c = (spec.couplings() / spec.frequencies()) ** 2 * spec.thermal_factor()
    return _scalar(t, _mode_sum(spec, t, lambda tt, ph: c * (1 - np.cos(ph))))


def G_period(spec):
    """``G(T) = T sum_k g_k^2 / w_k``, the Kerr phase accumulated per period."""
    if spec.h == 0:
        return 0.0
    if spec.closed_form:
        return -spec.h**2 * spec.period / spec.omega0 * math.log1p(-math.exp(-spec.decay))
    return spec.period * float(np.sum(spec.couplings() ** 2 / spec.frequencies()))


def _effective_harmonics(spec):
    """Highest harmonic of ``Omega`` whose weight is above round-off."""
    k = math.ceil(40.0 / spec.decay)
    if not spec.closed_form:
        k = min(k, int(spec.modes))
    return k**spec.s


def integrate_gamma(spec, t0, t1, nodes_per_period=64, order=8):
    """Composite Gauss-Legendre quadrature of ``gamma`` over ``[t0, t1]``.

    Panels are sized so that no panel holds more than one oscillation of the
    highest significant bath harmonic, and never fewer than
    ``nodes_per_period`` nodes per period are used.
    """
    span = t1 - t0
    if span == 0:
        return 0.0
    per_period = max(math.ceil(nodes_per_period / order), _effective_harmonics(spec))
    panels = max(1, math.ceil(abs(span) / spec.period * per_period))
    x, w = roots_legendre(order)
    edges = np.linspace(t0, t1, panels + 1)
    half = (edges[1:] - edges[:-1]) / 2
    mid = (edges[1:] + edges[:-1]) / 2
    nodes = mid[:, None] + half[:, None] * x[None, :]
    vals = rate_gamma(spec, nodes)
    return float(np.sum(half[:, None] * w[None, :] * vals))


def _check_mode(spec, k):
    if int(k) != k or k < 1 or (not spec.closed_form and k > int(spec.modes)):
        raise ModeIndexOutOfRange(f"mode index {k!r} outside 1..{spec.modes}")


def _mode_params(spec, k):
    w = float(k) ** spec.s * spec.omega0
    gk = spec.h * math.exp(-spec.decay * k / 2)
    return gk, w


def bath_mode_photon_number(spec, k, t, n2_expect):
    """Mean photon number of mode ``k`` given the system's conserved ``<n^2>``.

    At finite temperature the initial thermal occupation is added; at zero
    temperature the value vanishes at every multiple of the period.
    """
    _check_mode(spec, k)
    gk, w = _mode_params(spec, k)
    phase = 2 * math.pi * np.fmod(np.asarray(t, dtype=float) / spec.period * float(k) ** spec.s, 1.0)
    val = 2 * (gk / w) ** 2 * (1 - np.cos(phase)) * n2_expect
    if spec.beta is not None:
        val = val + 1.0 / math.expm1(spec.beta * w)
    return _scalar(t, val)


def bath_mode_quadratures(spec, k, t, n_expect):
    """``(<X_k>, <P_k>)``; the pair traces a circle through the origin."""
    _check_mode(spec, k)
    gk, w = _mode_params(spec, k)
    phase = 2 * math.pi * np.fmod(np.asarray(t, dtype=float) / spec.period * float(k) ** spec.s, 1.0)
    amp = math.sqrt(2) * gk / w * n_expect
    x = amp * (np.cos(phase) - 1)
    p = -amp * np.sin(phase)
    return _scalar(t, x), _scalar(t, p)
