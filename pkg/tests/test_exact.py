import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import T, random_density, random_ket_amplitudes, reference_system
from floqdiv.errors import DimensionError
from floqdiv.exact import (
    evolve_exact,
    influence_functional,
    influence_matrix,
    linear_entropy,
    n2_expectation,
    return_probability,
)
from floqdiv.fock import DensityMatrix, FockSpace, Ket, density_from_ket, fock_state, purity


def direct_G_Gamma(t, modes=60, h=1.0, z=0.1):
    k = np.arange(1, modes + 1)
    w = 2 * np.pi * k
    c = (h * np.exp(-z * k / 2) / w) ** 2
    return float(np.sum(c * (w * t - np.sin(w * t)))), float(np.sum(c * (1 - np.cos(w * t))))


def test_influence_functional_diagonal_is_one(workload_system):
    for n in range(5):
        assert influence_functional(workload_system, n, n, 0.37) == 1


def test_influence_functional_unit_modulus_at_period(workload_system):
    F = influence_matrix(workload_system, T)
    assert np.max(np.abs(np.abs(F) - 1)) < 1e-12


def test_influence_functional_value(workload_system):
    t = 0.3 * T
    G, Gam = direct_G_Gamma(t)
    expected = np.exp(4j * G) * np.exp(-4 * Gam)
    assert abs(influence_functional(workload_system, 2, 0, t) - expected) < 1e-12
    assert influence_matrix(workload_system, t)[2, 0] == influence_functional(workload_system, 2, 0, t)


def test_influence_functional_bounded(workload_system, rng):
    for t in rng.uniform(0, 3 * T, 10):
        assert np.all(np.abs(influence_matrix(workload_system, t)) <= 1 + 1e-15)


def test_influence_functional_index_error(workload_system):
    with pytest.raises(IndexError):
        influence_functional(workload_system, 30, 0, 0.1)


def test_fock_state_is_stationary(workload_system, rng):
    rho = density_from_ket(fock_state(workload_system.space, 3))
    for t in rng.uniform(0, 3 * T, 10):
        assert np.array_equal(evolve_exact(rho, workload_system, t).elements, rho.elements)


def test_zero_coupling_is_free_rotation(rng):
    sys = reference_system(8, omega=2.7, h=0.0)
    rho0 = random_density(rng, 8)
    n = np.arange(8)
    for t in (0.3, 1.7):
        free = rho0 * np.exp(-1j * 2.7 * (n[:, None] - n[None, :]) * t)
        got = evolve_exact(DensityMatrix(sys.space, rho0), sys, t).elements
        assert np.max(np.abs(got - free)) < 1e-14


def test_cat_purifies_at_period(workload_system, cat_rho):
    assert abs(purity(evolve_exact(cat_rho, workload_system, T)) - 1) < 1e-10
    assert purity(evolve_exact(cat_rho, workload_system, 0.5 * T)) < 0.9


def test_return_probability_basics(workload_system, cat_rho, rng):
    mixed = DensityMatrix(FockSpace(30), random_density(rng, 30))
    assert return_probability(mixed, mixed) == pytest.approx(purity(mixed), abs=1e-14)
    assert return_probability(evolve_exact(cat_rho, workload_system, 0.0), cat_rho) == pytest.approx(1.0, abs=1e-14)
    fock = density_from_ket(fock_state(workload_system.space, 4))
    for t in rng.uniform(0, 3 * T, 5):
        assert return_probability(evolve_exact(fock, workload_system, t), fock) == pytest.approx(1.0, abs=1e-14)
    r = [return_probability(evolve_exact(cat_rho, workload_system, t), cat_rho) for t in np.linspace(0, 3, 31)]
    assert all(-1e-14 <= v <= 1 + 1e-14 for v in r)


def test_return_probability_dimension_mismatch(cat_rho):
    with pytest.raises(DimensionError):
        return_probability(cat_rho, DensityMatrix.maximally_mixed(FockSpace(4)))


def test_evolve_dimension_mismatch(workload_system):
    with pytest.raises(DimensionError):
        evolve_exact(DensityMatrix.maximally_mixed(FockSpace(4)), workload_system, 0.1)


def test_linear_entropy_values():
    pure = density_from_ket(fock_state(FockSpace(5), 2))
    assert abs(linear_entropy(pure)) < 1e-12
    assert linear_entropy(DensityMatrix.maximally_mixed(FockSpace(4))) == pytest.approx(0.75)


def test_cat_entropy_vanishes_at_multiples_of_period(workload_system, cat_rho):
    for l in range(1, 6):
        assert abs(linear_entropy(evolve_exact(cat_rho, workload_system, l * T))) < 1e-10


def test_n2_expectation():
    space = FockSpace(6)
    assert n2_expectation(density_from_ket(fock_state(space, 0))) == 0
    assert n2_expectation(density_from_ket(fock_state(space, 2))) == 4


def test_n2_conserved(workload_system, cat_rho, rng):
    n2 = n2_expectation(cat_rho)
    for t in rng.uniform(0, 3 * T, 50):
        assert abs(n2_expectation(evolve_exact(cat_rho, workload_system, t)) - n2) < 1e-12


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_pure_states_purify_stroboscopically(seed):
    rng = np.random.default_rng(seed)
    sys = reference_system(12)
    rho0 = density_from_ket(Ket(sys.space, random_ket_amplitudes(rng, 12)))
    for l in range(1, 6):
        assert linear_entropy(evolve_exact(rho0, sys, l * T)) <= 1e-10


def test_coherence_envelope(workload_system, rng):
    rho0 = DensityMatrix(workload_system.space, random_density(rng, 30))
    n = np.arange(30)
    for t in rng.uniform(0, 3 * T, 5):
        _, Gam = direct_G_Gamma(t)
        env = np.abs(rho0.elements) * np.exp(-Gam * (n[:, None] - n[None, :]) ** 2)
        assert np.max(np.abs(np.abs(evolve_exact(rho0, workload_system, t).elements) - env)) < 1e-12


def test_stroboscopic_composition(workload_system, cat_rho):
    once = evolve_exact(evolve_exact(cat_rho, workload_system, T), workload_system, T)
    twice = evolve_exact(cat_rho, workload_system, 2 * T)
    assert np.max(np.abs(once.elements - twice.elements)) < 1e-12


def test_hermiticity_and_trace(workload_system, rng):
    rho0 = DensityMatrix(workload_system.space, random_density(rng, 30, rank=3))
    for t in rng.uniform(0, 3 * T, 10):
        el = evolve_exact(rho0, workload_system, t).elements
        assert np.max(np.abs(el - el.conj().T)) < 1e-12
        assert abs(np.trace(el) - 1) < 1e-12
        assert np.array_equal(np.diag(el), np.diag(rho0.elements))


def test_positivity_preserved(workload_system, rng):
    rho0 = DensityMatrix(workload_system.space, random_density(rng, 30))
    for t in rng.uniform(0, 3 * T, 5):
        assert evolve_exact(rho0, workload_system, t).min_eigenvalue() > -1e-10


def test_system_spec_validates_omega():
    with pytest.raises(ValueError):
        reference_system(4, omega=0.0)
    assert reference_system(4).energies()[3] == pytest.approx(3 * 2 * math.pi)
