"""Compare the compiled and NumPy kernel backends on the monodromy workload.

    python3 benchmarks/bench_kernels.py [--dims 10 20 30] [--repeat 3] [--threads 1]

Prints wall time per backend and the max elementwise difference between them.
"""
import argparse
import math
import time

import numpy as np

from floqdiv import kernels
from floqdiv.bath import BathSpec
from floqdiv.exact import SystemSpec
from floqdiv.floquet import PropagationConfig, monodromy
from floqdiv.fock import FockSpace


def reference(dim):
    bath = BathSpec(h=1.0, z=0.1, omega0=2 * math.pi, s=1, modes=60)
    return SystemSpec(2 * math.pi, FockSpace(dim), bath)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def kernel_only(D, steps, repeat, threads):
    """Time the bare step loops on random data of the monodromy's shape."""
    rng = np.random.default_rng(0)
    C = 1j * rng.normal(size=(3, D)) - 0.01 * rng.random(size=(3, D))
    w = rng.normal(size=(steps, 3)) / steps
    f = rng.normal(size=(steps, 3, 3))
    y0 = np.ones(D, dtype=complex)
    out = {}
    for b in kernels.available_backends():
        out[b] = (
            best_of(lambda: kernels.magnus4_diag(C, w, y0, threads, b), repeat),
            best_of(lambda: kernels.rk4_diag(C, f, 1.0 / steps, y0, threads, b), repeat),
        )
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dims", type=int, nargs="+", default=[10, 20, 30])
    ap.add_argument("--schemes", nargs="+", default=["magnus4", "rk4"])
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)} (default {kernels.BACKEND})")
    print(f"{'N_F':>4} {'scheme':>8} " + " ".join(f"{b + ' [s]':>14}" for b in backends) + f" {'speedup':>8} {'max diff':>10}")
    for dim in args.dims:
        sys_ = reference(dim)
        for scheme in args.schemes:
            res = {}
            for b in backends:
                cfg = PropagationConfig(args.steps, scheme, threads=args.threads, backend=b)
                res[b] = best_of(lambda: monodromy(sys_, cfg).matrix, args.repeat)
            cols = " ".join(f"{res[b][0]:14.4f}" for b in backends)
            if len(backends) == 2:
                speed = res["python"][0] / res["compiled"][0]
                diff = float(np.max(np.abs(res["python"][1] - res["compiled"][1])))
                print(f"{dim:>4} {scheme:>8} {cols} {speed:8.1f} {diff:10.2e}")
            else:
                print(f"{dim:>4} {scheme:>8} {cols}")

    print("\nstep loops only (D = N_F^2 coherences, 3 rate terms)")
    for dim in args.dims:
        res = kernel_only(dim * dim, args.steps, args.repeat, args.threads)
        for i, scheme in enumerate(("magnus4", "rk4")):
            cols = " ".join(f"{res[b][i][0]:14.4f}" for b in backends)
            if len(backends) == 2:
                speed = res["python"][i][0] / res["compiled"][i][0]
                diff = float(np.max(np.abs(res["python"][i][1] - res["compiled"][i][1])))
                print(f"{dim:>4} {scheme:>8} {cols} {speed:8.1f} {diff:10.2e}")
            else:
                print(f"{dim:>4} {scheme:>8} {cols}")


if __name__ == "__main__":
    main()
