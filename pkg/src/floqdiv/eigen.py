"""Eigenvalues of dense complex matrices.

``eigvals_qr`` is a compact Householder-Hessenberg + Wilkinson-shifted QR
solver used as an independent cross-check of LAPACK (``method="lapack"``,
the default), which implements the same algorithm in compiled form.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import EigensolveFailure


def hessenberg(a):
    """Upper Hessenberg form ``H = Q^H A Q`` by Householder reflections."""
    h = np.array(a, dtype=complex, copy=True)
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1 :, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x.copy()
        v[0] += phase * alpha
        v /= np.linalg.norm(v)
        h[k + 1 :, :] -= 2.0 * np.outer(v, v.conj() @ h[k + 1 :, :])
        h[:, k + 1 :] -= 2.0 * np.outer(h[:, k + 1 :] @ v, v.conj())
        h[k + 2 :, k] = 0.0
    return h


def _wilkinson(a, b, c, d):
    tr = a + d
    disc = np.sqrt((a - d) ** 2 / 4 + b * c)
    mu1, mu2 = tr / 2 + disc, tr / 2 - disc
    return mu1 if abs(mu1 - d) < abs(mu2 - d) else mu2


def _givens(a, b):
    r = np.hypot(abs(a), abs(b))
    if r == 0.0:
        return 1.0, 0.0
    return a / r, b / r


def eigvals_qr(a, max_sweeps_per_eig=60):
    """All eigenvalues of ``a`` via shifted QR on its Hessenberg form."""
    h = hessenberg(a)
    n = h.shape[0]
    eps = np.finfo(float).eps
    out = []
    hi = n - 1
    sweeps = 0
    while hi >= 0:
        if hi == 0:
            out.append(h[0, 0])
            break
        lo = hi
        while lo > 0:
            if abs(h[lo, lo - 1]) <= eps * (abs(h[lo, lo]) + abs(h[lo - 1, lo - 1])):
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            out.append(h[hi, hi])
            hi -= 1
            sweeps = 0
            continue
        sweeps += 1
        if sweeps > max_sweeps_per_eig:
            raise EigensolveFailure(f"QR iteration stalled at index {hi}")
        if sweeps % 11 == 0:
            mu = h[hi, hi] + abs(h[hi, hi - 1])  # exceptional shift
        else:
            mu = _wilkinson(h[hi - 1, hi - 1], h[hi - 1, hi], h[hi, hi - 1], h[hi, hi])
        blk = h[lo : hi + 1, lo : hi + 1]
        m = blk.shape[0]
        blk[np.diag_indices(m)] -= mu
        rots = []
        for k in range(m - 1):
            c, s = _givens(blk[k, k], blk[k + 1, k])
            g = np.array([[np.conj(c), np.conj(s)], [-s, c]])
            blk[k : k + 2, k:] = g @ blk[k : k + 2, k:]
            rots.append(g)
        for k, g in enumerate(rots):
            top = min(k + 2, m - 1) + 1
            blk[:top, k : k + 2] = blk[:top, k : k + 2] @ g.conj().T
        blk[np.diag_indices(m)] += mu
    return np.array(out[::-1])


def eigvals(a, method="lapack"):
    if method == "lapack":
        try:
            return scipy.linalg.eigvals(a)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise EigensolveFailure(str(exc)) from exc
    if method == "qr":
        return eigvals_qr(a)
    raise ValueError(f"unknown eigen method {method!r}")
