"""Invariant suite run by the ``verify`` subcommand.

Each check yields a measured value, the tolerance it is held to and a
pass flag. Informational checks (``gate=False``) report a quantity without
failing the run.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from . import bath as _bath
from . import exact
from .analysis import PhaseGrid, dense_series, stroboscopic_series, wigner
from .errors import NumericalGateError
from .floquet import (
    analytic_multipliers,
    divisibility_delta,
    floquet_spectrum,
    map_determinant,
    match_spectra,
    monodromy,
    propagate_map,
    propagate_state,
    trace_integral,
    wrap_to_principal,
)
from .fock import expectation, parity_operator


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool
    gate: bool = True


def _le(name, value, tol, gate=True):
    value = float(value)
    return Check(name, value, tol, bool(value <= tol), gate)


def _deriv4(f, t, h):
    return (f(t - 2 * h) - 8 * f(t - h) + 8 * f(t + h) - f(t + 2 * h)) / (12 * h)


def antisymmetry_residual(spec_num, period):
    """``max |Im L_(m,n) + Im L_(n,m)|`` modulo ``2 pi / T`` over labelled pairs."""
    idx = spec_num.pairing
    worst = 0.0
    for (m, n), i in idx.items():
        j = idx[(n, m)]
        s = spec_num.exponents[i].imag + spec_num.exponents[j].imag
        worst = max(worst, abs(float(wrap_to_principal(s, period))))
    return worst


def labelled_spectrum(sys, mono):
    """Numerical spectrum with labels borrowed from the analytic multipliers.

    Returns ``(spectrum, labels, analytic_values, max_delta)``.
    """
    spec_num = floquet_spectrum(mono)
    analytic = analytic_multipliers(sys)
    lam_an = np.array([v for _, v in analytic])
    dmax, perm = match_spectra(spec_num.multipliers, lam_an)
    labels = [analytic[p][0] for p in perm]
    labelled = type(spec_num)(spec_num.multipliers, spec_num.exponents, spec_num.period, labels)
    return labelled, labels, lam_an[perm], dmax


def run_checks(cfg, threads=1, seed=0):
    sys = cfg.system_spec()
    b = sys.bath
    T = sys.period
    rho0 = cfg.initial_density()
    rng = np.random.default_rng(seed)
    pcfg = cfg.propagation_config(threads)
    out = []

    # bath rates
    ts = rng.uniform(0, T, 20)
    per = max(
        float(np.max(np.abs(_bath.rate_gamma(b, ts + T) - _bath.rate_gamma(b, ts)))),
        float(np.max(np.abs(_bath.drive_g(b, ts + T) - _bath.drive_g(b, ts)))),
    )
    out.append(_le("rates_periodic", per, 1e-10))
    out.append(_le("gamma_period_integral", abs(_bath.integrate_gamma(b, 0.0, T)), 1e-8))
    tt = rng.uniform(0.05 * T, 0.95 * T, 10)
    h = 1e-4 * T
    scale = max(1.0, float(np.max(np.abs(_bath.rate_gamma(b, tt)))))
    dG = np.max(np.abs(_deriv4(lambda x: _bath.integral_G(b, x), tt, h) - _bath.drive_g(b, tt)))
    dGam = np.max(np.abs(_deriv4(lambda x: _bath.integral_Gamma(b, x), tt, h) - _bath.rate_gamma(b, tt) / 2))
    out.append(_le("G_derivative", dG / scale, 1e-8))
    out.append(_le("Gamma_derivative", dGam / scale, 1e-8))

    # propagation against the exact solution
    times = np.sort(rng.uniform(0, max(cfg.l_max, 1) * T, 5))
    err = 0.0
    for t in times:
        a = propagate_state(sys, rho0, t, pcfg).elements
        e = exact.evolve_exact(rho0, sys, t).elements
        err = max(err, float(np.max(np.abs(a - e))))
    out.append(_le("oracle_equivalence", err, 1e-6))

    mono = monodromy(sys, replace(pcfg, richardson_check=True))
    out.append(_le("richardson_deviation", mono.richardson_deviation, 1e-7))
    phase, logabs = map_determinant(mono)
    vol = math.exp(logabs)
    out.append(_le("det_modulus", abs(vol - 1.0), 1e-6))
    tr = trace_integral(sys, 0.0, T, pcfg)
    out.append(_le("liouville_jacobi", abs(phase * vol - cmath.exp(tr)), 1e-6))
    out.append(_le("trace_integral", abs(tr), 1e-8))
    deltas = [abs(divisibility_delta(mono, m)) for m in range(cfg.m_max + 1)]
    out.append(_le("divisibility_delta", max(deltas), 1e-9))
    two = propagate_map(sys, 0.0, 2 * T, pcfg)
    out.append(_le("floquet_composition", np.max(np.abs(two.matrix - mono.matrix @ mono.matrix)), 2e-6))

    spec_num, _, _, dmax = labelled_spectrum(sys, mono)
    out.append(_le("spectrum_match", dmax, 1e-6))
    out.append(_le("multiplier_modulus", np.max(np.abs(np.abs(spec_num.multipliers) - 1)), 1e-6))
    out.append(_le("exponent_antisymmetry", antisymmetry_residual(spec_num, T), 1e-9))

    # observables
    ent = stroboscopic_series(sys, rho0, "linear_entropy", max(cfg.l_max, 1))
    out.append(_le("stroboscopic_purification", np.max(ent.values[1:]), 1e-8))
    grid = PhaseGrid.square(1.0, 3)
    w00 = wigner(rho0, grid).values[1, 1]
    parity = expectation(rho0, parity_operator(rho0.space)).real / math.pi
    out.append(_le("wigner_parity_origin", abs(w00 - parity), 1e-10))

    inner = np.linspace(0, T, 202)[1:-1]
    mix = dense_series(sys, rho0, "linear_entropy", inner)
    out.append(Check("max_entropy_within_period", float(mix.values.max()), 0.1,
                     bool(mix.values.max() > 0.1), gate=False))
    t_end = max(cfg.l_max, 1) * T
    rr = dense_series(sys, rho0, "return_probability", np.linspace(0, t_end, 601)[1:-1])
    r_end = exact.return_probability(exact.evolve_exact(rho0, sys, t_end), rho0)
    ratio = r_end / rr.values.min() if rr.values.min() > 0 else math.inf
    out.append(Check("revival_ratio", float(ratio), 5.0, bool(ratio >= 5.0), gate=False))
    return out


def all_gates_pass(checks):
    return all(c.passed for c in checks if c.gate)


def require(checks):
    failed = [c.name for c in checks if c.gate and not c.passed]
    if failed:
        raise NumericalGateError("failed checks: " + ", ".join(failed))
