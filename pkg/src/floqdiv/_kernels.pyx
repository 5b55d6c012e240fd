# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled step loops for generators that are diagonal in the Fock coherence basis.

Each vectorized coherence evolves as an independent scalar ODE
``y' = a(t) y`` with ``a(t) = sum_k f_k(t) C[k, d]``; the loops run
coherence-outer, step-inner without the GIL.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, cos, sin

cnp.import_array()


cdef inline double complex _cexp(double complex s) noexcept nogil:
    cdef double r = exp(s.real)
    return r * cos(s.imag) + 1j * (r * sin(s.imag))


def magnus4_diag(double complex[:, ::1] C, double[:, ::1] w, double complex[::1] y):
    """In place: ``y[d] *= prod_j exp(sum_k w[j, k] C[k, d])``.

    ``w[j, k]`` already holds ``h/2 (f_k(t_j^-) + f_k(t_j^+))`` at the two
    Gauss-Legendre nodes of step ``j``.
    """
    cdef Py_ssize_t K = C.shape[0], D = C.shape[1], S = w.shape[0]
    cdef Py_ssize_t d, j, k
    cdef double complex acc, s
    if y.shape[0] != D or w.shape[1] != K:
        raise ValueError("shape mismatch")
    with nogil:
        for d in range(D):
            acc = y[d]
            for j in range(S):
                s = 0
                for k in range(K):
                    s = s + w[j, k] * C[k, d]
                acc = acc * _cexp(s)
            y[d] = acc


def rk4_diag(double complex[:, ::1] C, double[:, :, ::1] f, double h, double complex[::1] y):
    """In place classical RK4; ``f[j, i, k]`` samples rate ``k`` at ``t_j + (0, h/2, h)[i]``."""
    cdef Py_ssize_t K = C.shape[0], D = C.shape[1], S = f.shape[0]
    cdef Py_ssize_t d, j, k
    cdef double complex a1, a2, a3, k1, k2, k3, k4, yy
    if y.shape[0] != D or f.shape[2] != K or f.shape[1] != 3:
        raise ValueError("shape mismatch")
    with nogil:
        for d in range(D):
            yy = y[d]
            for j in range(S):
                a1 = 0
                a2 = 0
                a3 = 0
                for k in range(K):
                    a1 = a1 + f[j, 0, k] * C[k, d]
                    a2 = a2 + f[j, 1, k] * C[k, d]
                    a3 = a3 + f[j, 2, k] * C[k, d]
                k1 = a1 * yy
                k2 = a2 * (yy + 0.5 * h * k1)
                k3 = a2 * (yy + 0.5 * h * k2)
                k4 = a3 * (yy + h * k3)
                yy = yy + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            y[d] = yy
