"""NumPy implementations of the step loops in ``_kernels.pyx``.

Same signatures and in-place semantics; vectorized over coherences, looping
over steps.
"""
import numpy as np

_BLOCK = 512


def magnus4_diag(C, w, y):
    S = w.shape[0]
    for j0 in range(0, S, _BLOCK):
        a = np.exp(w[j0 : j0 + _BLOCK] @ C)
        for row in a:
            y *= row


def rk4_diag(C, f, h, y):
    S = f.shape[0]
    for j0 in range(0, S, _BLOCK):
        fb = f[j0 : j0 + _BLOCK]
        a1 = fb[:, 0, :] @ C
        a2 = fb[:, 1, :] @ C
        a3 = fb[:, 2, :] @ C
        for j in range(fb.shape[0]):
            k1 = a1[j] * y
            k2 = a2[j] * (y + 0.5 * h * k1)
            k3 = a2[j] * (y + 0.5 * h * k2)
            k4 = a3[j] * (y + h * k3)
            y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
