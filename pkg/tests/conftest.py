import math

import numpy as np
import pytest

from floqdiv.bath import BathSpec
from floqdiv.exact import SystemSpec
from floqdiv.fock import FockSpace, cat_state, density_from_ket

T = 1.0
OMEGA = 2 * math.pi


def reference_bath(**kw):
    """hT = 1, z = 0.1, 60 modes, zero temperature."""
    params = dict(h=1.0, z=0.1, omega0=OMEGA, s=1, modes=60)
    params.update(kw)
    return BathSpec(**params)


def reference_system(dim=30, omega=OMEGA, **bath_kw):
    return SystemSpec(omega, FockSpace(dim), reference_bath(**bath_kw))


def random_ket_amplitudes(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_density(rng, dim, rank=None):
    rank = rank or dim
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = a @ a.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def workload_system():
    return reference_system(30)


@pytest.fixture(scope="session")
def cat_rho():
    return density_from_ket(cat_state(FockSpace(30), 2.0))
