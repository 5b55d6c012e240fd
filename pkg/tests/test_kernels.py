import os
import subprocess
import sys

import numpy as np
import pytest

from floqdiv import kernels


def problem(seed=0, K=3, D=64, S=300):
    rng = np.random.default_rng(seed)
    C = 1j * rng.normal(size=(K, D)) - 0.1 * rng.random(size=(K, D))
    w = rng.normal(size=(S, K)) * 1e-3
    f = rng.normal(size=(S, 3, K))
    y0 = rng.normal(size=D) + 1j * rng.normal(size=D)
    return C, w, f, y0


needs_compiled = pytest.mark.skipif("compiled" not in kernels.available_backends(), reason="extension not built")


def test_magnus_fallback_matches_closed_form():
    C, w, _, y0 = problem()
    got = kernels.magnus4_diag(C, w, y0, backend="python")
    assert np.max(np.abs(got - y0 * np.exp(w.sum(axis=0) @ C))) < 1e-12


def test_rk4_fallback_constant_rate_single_step():
    C = np.array([[-1.0 + 0j]])
    f = np.ones((1, 3, 1))
    h = 0.1
    y = kernels.rk4_diag(C, f, h, np.array([1.0 + 0j]), backend="python")
    z = -h
    assert y[0] == pytest.approx(1 + z + z**2 / 2 + z**3 / 6 + z**4 / 24, abs=1e-15)


@needs_compiled
def test_backends_agree():
    C, w, f, y0 = problem(1)
    a = kernels.magnus4_diag(C, w, y0, backend="compiled")
    b = kernels.magnus4_diag(C, w, y0, backend="python")
    assert np.max(np.abs(a - b)) < 1e-12
    a = kernels.rk4_diag(C, f, 1e-3, y0, backend="compiled")
    b = kernels.rk4_diag(C, f, 1e-3, y0, backend="python")
    assert np.max(np.abs(a - b)) < 1e-12


@pytest.mark.parametrize("backend", kernels.available_backends())
def test_thread_invariance_is_bitwise(backend):
    C, w, f, y0 = problem(2, D=101)
    ref = kernels.magnus4_diag(C, w, y0, threads=1, backend=backend)
    ref_rk = kernels.rk4_diag(C, f, 1e-3, y0, threads=1, backend=backend)
    for threads in (2, 3, 8):
        assert np.array_equal(kernels.magnus4_diag(C, w, y0, threads=threads, backend=backend), ref)
        assert np.array_equal(kernels.rk4_diag(C, f, 1e-3, y0, threads=threads, backend=backend), ref_rk)


def test_input_not_modified():
    C, w, _, y0 = problem()
    keep = y0.copy()
    kernels.magnus4_diag(C, w, y0)
    assert np.array_equal(y0, keep)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.magnus4_diag(*problem()[:2], problem()[3], backend="gpu")


def test_environment_forces_fallback():
    env = dict(os.environ, FLOQDIV_KERNELS="python")
    out = subprocess.run(
        [sys.executable, "-c", "from floqdiv import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"
