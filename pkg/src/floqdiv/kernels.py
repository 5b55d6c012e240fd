"""Backend selection for the diagonal propagation kernels.

The compiled extension is used when it was built; set
``FLOQDIV_KERNELS=python`` to force the NumPy fallback.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _fallback

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _fallback}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled

if os.environ.get("FLOQDIV_KERNELS", "").lower() == "python" or _compiled is None:
    BACKEND = "python"
else:
    BACKEND = "compiled"


def available_backends():
    return sorted(_BACKENDS)


def _module(backend):
    name = backend or BACKEND
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} not available (have {available_backends()})") from None


def _chunks(D, threads):
    threads = max(1, min(int(threads), D))
    edges = np.linspace(0, D, threads + 1).astype(int)
    return [(lo, hi) for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]


def _run(fn, C, y, threads, *args):
    """Apply ``fn`` to column chunks of ``C``/``y``; chunks are independent,
    so the result is bitwise identical for any thread count."""
    chunks = _chunks(C.shape[1], threads)
    if len(chunks) == 1:
        fn(C, *args, y)
        return y
    parts = [(np.ascontiguousarray(C[:, lo:hi]), np.ascontiguousarray(y[lo:hi])) for lo, hi in chunks]
    with ThreadPoolExecutor(len(parts)) as pool:
        list(pool.map(lambda p: fn(p[0], *args, p[1]), parts))
    for (lo, hi), (_, yp) in zip(chunks, parts):
        y[lo:hi] = yp
    return y


def magnus4_diag(C, w, y0, threads=1, backend=None):
    """Return ``y0 * prod_j exp(w[j] @ C)`` elementwise (see ``_kernels``)."""
    mod = _module(backend)
    C = np.ascontiguousarray(C, dtype=complex)
    w = np.ascontiguousarray(w, dtype=float)
    y = np.array(y0, dtype=complex, copy=True)
    return _run(lambda c, ww, yy: mod.magnus4_diag(c, ww, yy), C, y, threads, w)


def rk4_diag(C, f, h, y0, threads=1, backend=None):
    mod = _module(backend)
    C = np.ascontiguousarray(C, dtype=complex)
    f = np.ascontiguousarray(f, dtype=float)
    y = np.array(y0, dtype=complex, copy=True)
    return _run(lambda c, ff, hh, yy: mod.rk4_diag(c, ff, hh, yy), C, y, threads, f, float(h))
