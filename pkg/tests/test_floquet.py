import cmath
import math

import numpy as np
import pytest
import scipy.linalg

from conftest import OMEGA, T, random_density, reference_system
from floqdiv.bath import G_period
from floqdiv.errors import NonConvergence, NumericalGateError, StepCountTooSmall
from floqdiv.exact import evolve_exact
from floqdiv.floquet import (
    DynamicalMap,
    FloquetSpectrum,
    PropagationConfig,
    analytic_exponent_imag,
    analytic_multipliers,
    det_value,
    divisibility_delta,
    floquet_spectrum,
    is_divisible,
    map_determinant,
    match_spectra,
    monodromy,
    principal_exponent,
    propagate_map,
    propagate_state,
    step_count,
    trace_integral,
    volume_series,
    wrap_to_principal,
)
from floqdiv.fock import DensityMatrix, FockSpace, annihilation_operator, cat_state, density_from_ket, number_operator
from floqdiv.liouville import PeriodicGenerator, commutator_superop, constant_rate_generator, dissipator_superop


@pytest.fixture(scope="module")
def sys10():
    return reference_system(10)


@pytest.fixture(scope="module")
def mono10(sys10):
    return monodromy(sys10, PropagationConfig(richardson_check=True))


def modulated_damping(dim=4, gamma0=0.3):
    """Dense, time-dependent, Markovian test generator."""
    space = FockSpace(dim)
    n = number_operator(space).elements
    b = annihilation_operator(space).elements
    terms = (commutator_superop(1.7 * n), dissipator_superop(b).elements)
    rates = (None, lambda t: gamma0 * (1 + 0.5 * np.sin(2 * np.pi * t)))
    return PeriodicGenerator(space, terms, rates, 1.0)


# --- configuration ----------------------------------------------------------

def test_step_count_too_small():
    with pytest.raises(StepCountTooSmall):
        PropagationConfig(steps_per_period=99)
    with pytest.raises(ValueError):
        PropagationConfig(scheme="euler")


def test_step_count_exact_multiples():
    assert step_count(3.0, 1.0, 2000) == 6000
    assert step_count(3.0000000000000004, 1.0, 2000) == 6000
    assert step_count(0.25, 1.0, 2000) == 500


def test_propagate_requires_forward_span(sys10):
    with pytest.raises(ValueError):
        propagate_map(sys10, 1.0, 1.0)


# --- maps -------------------------------------------------------------------

def test_zero_coupling_map_is_free_phase():
    sys = reference_system(5, omega=2.3, h=0.0)
    span = 0.731
    phi = propagate_map(sys, 0.2, 0.2 + span)
    n = np.arange(5)
    phase = np.exp(-1j * 2.3 * (n[:, None] - n[None, :]) * span).reshape(-1, order="F")
    assert np.max(np.abs(phi.matrix - np.diag(phase))) < 1e-10


def test_monodromy_reproduces_exact_state(sys10):
    rho0 = density_from_ket(cat_state(sys10.space, 0.6))
    got = monodromy(sys10).apply(rho0)
    assert np.max(np.abs(got.elements - evolve_exact(rho0, sys10, T).elements)) < 1e-6


def test_flow_property(sys10):
    first = propagate_map(sys10, 0.0, 0.5 * T)
    second = propagate_map(sys10, 0.5 * T, T)
    whole = propagate_map(sys10, 0.0, T)
    assert np.max(np.abs(first.compose(second).matrix - whole.matrix)) < 1e-8
    with pytest.raises(ValueError):
        second.compose(first)


def test_oracle_equivalence_random_states(sys10, rng):
    states = [DensityMatrix(sys10.space, random_density(rng, 10)) for _ in range(20)]
    for t in rng.uniform(0, 3 * T, 10):
        phi = propagate_map(sys10, 0.0, t)
        for rho in states:
            err = np.max(np.abs(phi.apply(rho).elements - evolve_exact(rho, sys10, t).elements))
            assert err <= 1e-6


def test_propagate_state_matches_map(sys10, rng):
    rho = DensityMatrix(sys10.space, random_density(rng, 10))
    t = 1.37
    a = propagate_state(sys10, rho, t).elements
    b = propagate_map(sys10, 0.0, t).apply(rho).elements
    assert np.max(np.abs(a - b)) < 1e-13
    assert propagate_state(sys10, rho, 0.0) is rho


def test_stroboscopic_powers(sys10, mono10):
    for m in range(2, 6):
        direct = propagate_map(sys10, 0.0, m * T).matrix
        power = np.linalg.matrix_power(mono10.matrix, m)
        assert np.max(np.abs(direct - power)) < 1e-6 * m


def test_trace_and_hermiticity_preserved(sys10, rng):
    rho = DensityMatrix(sys10.space, random_density(rng, 10))
    for t in (0.3, 1.1, 2.9):
        out = propagate_state(sys10, rho, t).elements
        assert abs(np.trace(out) - 1) < 1e-8
        assert np.max(np.abs(out - out.conj().T)) < 1e-8


def test_trace_functional_is_left_fixed_point(mono10):
    tr = np.eye(10).reshape(-1, order="F")
    assert np.max(np.abs(tr @ mono10.matrix - tr)) < 1e-10


def test_steady_subspace(mono10):
    for n in range(10):
        k = n + 10 * n
        col = mono10.matrix[:, k]
        e = np.zeros(100)
        e[k] = 1
        assert np.max(np.abs(col - e)) < 1e-8


def test_richardson_deviation_small(mono10):
    assert mono10.richardson_deviation is not None
    assert mono10.richardson_deviation <= 1e-7


def test_richardson_gate_raises():
    sys = reference_system(10)
    with pytest.raises(NonConvergence):
        monodromy(sys, PropagationConfig(steps_per_period=100, scheme="rk4", richardson_check=True))


def test_rk4_is_fourth_order():
    sys = reference_system(6)
    ref = monodromy(sys).matrix
    errs = [np.max(np.abs(monodromy(sys, PropagationConfig(steps_per_period=n, scheme="rk4")).matrix - ref))
            for n in (1000, 2000)]
    assert 12 < errs[0] / errs[1] < 20


def test_thread_count_does_not_change_result(sys10):
    one = monodromy(sys10, PropagationConfig(threads=1)).matrix
    three = monodromy(sys10, PropagationConfig(threads=3)).matrix
    assert np.array_equal(one, three)


# --- dense generators -------------------------------------------------------

def test_constant_dense_generator_matches_expm():
    gen = constant_rate_generator(FockSpace(4), 1.3, 0.25)
    phi = monodromy(gen)
    assert np.max(np.abs(phi.matrix - scipy.linalg.expm(gen.terms[0]))) < 1e-12


@pytest.mark.parametrize("scheme", ["magnus4", "rk4"])
def test_time_dependent_dense_generator(scheme):
    gen = modulated_damping()
    ref = monodromy(gen, PropagationConfig(steps_per_period=4000)).matrix
    got = monodromy(gen, PropagationConfig(steps_per_period=1000, scheme=scheme)).matrix
    assert np.max(np.abs(got - ref)) < 1e-9
    # Liouville-Jacobi for a non-trivial determinant
    tr = trace_integral(gen, 0.0, 1.0)
    assert abs(det_value(got) - cmath.exp(tr)) < 1e-9 * abs(cmath.exp(tr))


# --- determinant ------------------------------------------------------------

def test_det_identity(mono10, sys10):
    phase, logabs = map_determinant(mono10)
    assert abs(math.exp(logabs) - 1) < 1e-6
    tr = trace_integral(sys10, 0.0, T)
    assert abs(tr) < 1e-8
    assert abs(det_value(mono10) - cmath.exp(tr)) < 1e-6


def test_liouville_jacobi_at_intermediate_times(sys10):
    for t in (0.1, 0.37, 0.5, 1.25):
        phi = propagate_map(sys10, 0.0, t)
        phase, logabs = map_determinant(phi)
        tr = trace_integral(sys10, 0.0, t)
        # compare logs: |det| underflows at intermediate times
        assert abs(logabs - tr.real) <= 1e-6 * max(1.0, abs(tr.real))
        assert abs(cmath.phase(phase) - cmath.phase(cmath.exp(1j * tr.imag))) < 1e-6


def test_determinant_of_large_map_does_not_overflow():
    phi = DynamicalMap(np.diag(np.full(900, 2.0)), 0.0, 1.0, 1.0)
    phase, logabs = map_determinant(phi)
    assert phase == 1 and logabs == pytest.approx(900 * math.log(2))


# --- spectrum ---------------------------------------------------------------

def test_zero_coupling_spectrum():
    omega = 2.3
    sys = reference_system(3, omega=omega, h=0.0)
    spec = floquet_spectrum(monodromy(sys))
    assert len(spec.multipliers) == 9
    for (n, m), i in spec.pairing.items():
        assert abs(spec.multipliers[i] - np.exp(-1j * (n - m) * omega * T)) < 1e-10


def test_multipliers_on_unit_circle(mono10):
    spec = floquet_spectrum(mono10)
    assert np.max(np.abs(np.abs(spec.multipliers) - 1)) < 1e-6
    assert np.max(np.abs(spec.exponents.real)) < 1e-6


def test_spectrum_invariants(mono10):
    spec = floquet_spectrum(mono10)
    assert np.max(np.abs(np.exp(spec.exponents * T) - spec.multipliers)) < 1e-10
    im = spec.exponents.imag
    assert np.all(im > -np.pi / T) and np.all(im <= np.pi / T + 1e-12)
    assert np.all(spec.branch_index == 0)
    # closed under conjugation
    dmax, _ = match_spectra(spec.multipliers, spec.multipliers.conj())
    assert dmax < 1e-12
    # sorted by real part (rounded), then imaginary part, descending
    key = list(zip(np.round(spec.exponents.real, 12), im))
    assert key == sorted(key, reverse=True)


def test_spectrum_requires_one_period(sys10):
    with pytest.raises(ValueError):
        floquet_spectrum(propagate_map(sys10, 0.0, 0.5))


def test_spectrum_matches_analytic_small():
    sys = reference_system(3)
    spec = floquet_spectrum(monodromy(sys))
    analytic = analytic_multipliers(sys)
    dmax, _ = match_spectra(spec.multipliers, [v for _, v in analytic])
    assert dmax < 1e-6
    # the diagonal fast path labels coherences directly
    lookup = dict(analytic)
    for lab, i in spec.pairing.items():
        assert abs(spec.multipliers[i] - lookup[lab]) < 1e-6


def test_multiplier_sign_convention():
    """Numerics carry +G(T)(m^2 - n^2) for the coherence |m><n|, not the opposite sign."""
    sys = reference_system(8, omega=2.3)
    spec = floquet_spectrum(monodromy(sys))
    GT = G_period(sys.bath)
    E = sys.energies()
    plus = [np.exp(-1j * (E[m] - E[n]) * T + 1j * GT * (m * m - n * n)) for m in range(8) for n in range(8)]
    minus = [np.exp(-1j * (E[m] - E[n]) * T - 1j * GT * (m * m - n * n)) for m in range(8) for n in range(8)]
    d_plus, _ = match_spectra(spec.multipliers, plus)
    d_minus, _ = match_spectra(spec.multipliers, minus)
    assert d_plus < 1e-10
    assert d_minus > 1e-2


def test_dense_eigen_path_matches_diagonal_path(mono10):
    lam_fast = floquet_spectrum(mono10).multipliers
    # a similarity transform hides the diagonal structure from the fast path
    rng = np.random.default_rng(3)
    s = np.eye(100) + 0.01 * rng.normal(size=(100, 100))
    hidden = DynamicalMap(s @ mono10.matrix @ np.linalg.inv(s), 0.0, T, T)
    spec = floquet_spectrum(hidden)
    assert spec.labels is None
    dmax, _ = match_spectra(spec.multipliers, lam_fast)
    assert dmax < 1e-8


def test_dense_generator_spectrum_qr_vs_lapack():
    mono = monodromy(modulated_damping())
    a = floquet_spectrum(mono, method="lapack").multipliers
    b = floquet_spectrum(mono, method="qr").multipliers
    assert match_spectra(a, b)[0] < 1e-12


def test_analytic_multipliers_properties():
    sys = reference_system(6, omega=2.3)
    lam = dict(analytic_multipliers(sys))
    assert len(lam) == 36
    for m in range(6):
        assert lam[(m, m)] == 1
        for n in range(6):
            assert abs(lam[(m, n)] - np.conj(lam[(n, m)])) < 1e-15


def test_analytic_multiplier_first_coherence():
    sys = reference_system(5, modes="infinite")
    GT = T / OMEGA * (-math.log(1 - math.exp(-0.1)))
    lam = dict(analytic_multipliers(sys))[(1, 0)]
    assert abs(lam - np.exp(1j * GT)) < 1e-14
    finite = reference_system(5)
    geometric = T / OMEGA * sum(math.exp(-0.1 * k) / k for k in range(1, 61))
    assert abs(dict(analytic_multipliers(finite))[(1, 0)] - np.exp(1j * geometric)) < 1e-14


def test_exponent_antisymmetry(mono10):
    spec = floquet_spectrum(mono10)
    idx = spec.pairing
    for (m, n), i in idx.items():
        s = spec.exponents[i].imag + spec.exponents[idx[(n, m)]].imag
        assert abs(wrap_to_principal(s, T)) < 1e-9


def test_analytic_exponent_imag_wraps_to_numeric():
    sys = reference_system(5, omega=2.3)
    spec = floquet_spectrum(monodromy(sys))
    for (m, n), i in spec.pairing.items():
        expected = wrap_to_principal(analytic_exponent_imag(sys, m, n), T)
        assert abs(spec.exponents[i].imag - expected) < 1e-9


def test_wrap_to_principal():
    w = 2 * np.pi
    assert wrap_to_principal(np.pi, 1.0) == pytest.approx(np.pi)
    assert wrap_to_principal(-np.pi, 1.0) == pytest.approx(np.pi)
    assert wrap_to_principal(3 * w + 0.1, 1.0) == pytest.approx(0.1)
    assert principal_exponent(-1.0, 1.0).imag == pytest.approx(np.pi)


def test_match_spectra_handles_degeneracy():
    a = [1, 1, 1j, -1j]
    b = [1j, 1, -1j, 1]
    dmax, perm = match_spectra(a, b)
    assert dmax == 0
    assert sorted(perm) == [0, 1, 2, 3]
    with pytest.raises(ValueError):
        match_spectra([1, 2], [1])


def test_floquet_spectrum_dataclass_defaults():
    spec = FloquetSpectrum(np.ones(2), np.zeros(2), 1.0)
    assert spec.pairing is None
    assert np.array_equal(spec.branch_index, [0, 0])


# --- divisibility -----------------------------------------------------------

def test_delta_zero_for_unit_determinant(mono10):
    for m in range(11):
        d = divisibility_delta(mono10, m)
        assert abs(d) < 1e-9
        assert is_divisible(d)
    with pytest.raises(ValueError):
        divisibility_delta(mono10, -1)


def test_delta_for_damped_control():
    mono = monodromy(constant_rate_generator(FockSpace(4), 1.0, 0.05))
    vol = math.exp(map_determinant(mono)[1])
    assert vol < 1
    deltas = [divisibility_delta(mono, m) for m in range(12)]
    assert all(d < 0 for d in deltas)
    for a, b in zip(deltas, deltas[1:]):
        assert abs(b / a - vol) < 1e-12
    assert abs(deltas[-1]) < abs(deltas[0])


def test_volume_series(mono10):
    v = volume_series(mono10, 10)
    assert v[0] == 1
    assert np.max(np.abs(v - 1)) < 1e-6


def test_volume_series_damped_ratio():
    mono = monodromy(constant_rate_generator(FockSpace(3), 1.0, 0.02))
    v = volume_series(mono, 6)
    vol = math.exp(map_determinant(mono)[1])
    assert np.max(np.abs(v[1:] / v[:-1] - vol)) < 1e-12


def test_volume_series_detects_inconsistent_power_law(mono10):
    # a "monodromy" whose determinant disagrees with its powers cannot occur;
    # corrupt the tolerance instead to exercise the gate
    with pytest.raises(NumericalGateError):
        volume_series(mono10, 2, tol=-1.0)
