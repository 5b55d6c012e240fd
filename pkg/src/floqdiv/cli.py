"""Command-line entry point.

    floqdiv <subcommand> --config <path|bundled-name> --out <dir> [--threads N] [--seed N]

Exit codes: 0 success, 2 invalid configuration, 3 numerical gate failure.
"""
from __future__ import annotations

import argparse
import cmath
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, bath as _bath, exact, kernels
from .analysis import PhaseGrid, dense_series, stroboscopic_series, wigner, wigner_norm
from .config import bundled_configs, dump_config, load_config
from .errors import NumericalGateError, ParseError, ValidationError
from .export import export_field, export_table, write_json
from .floquet import (
    divisibility_delta,
    is_divisible,
    map_determinant,
    monodromy,
    propagate_state,
    trace_integral,
    volume_series,
)
from .fock import expectation, parity_operator
from .verify import all_gates_pass, antisymmetry_residual, labelled_spectrum, run_checks

THREADS_ENV = "FLOQDIV_THREADS"
EXIT_OK, EXIT_INVALID, EXIT_GATE = 0, 2, 3
SPECTRUM_TOL = 1e-6
WIGNER_AGREEMENT_TOL = 1e-6


class Run:
    """Everything a subcommand needs: parsed config, output dir, knobs."""

    def __init__(self, cfg, out, threads, seed):
        self.cfg = cfg
        self.out = Path(out)
        self.threads = threads
        self.seed = seed
        self.sys = cfg.system_spec()
        self.rho0 = cfg.initial_density()

    def table(self, name, rows, columns):
        return export_table(rows, self.out / name, columns)


def cmd_rates(run):
    b = run.sys.bath
    t = run.cfg.t_grid.times() * run.sys.period
    cols = {
        "gamma": _bath.rate_gamma(b, t),
        "g": _bath.drive_g(b, t),
        "G": _bath.integral_G(b, t),
        "Gamma": _bath.integral_Gamma(b, t),
    }
    run.table("rates.csv", zip(t, *cols.values()), ["t", *cols])
    T = run.sys.period
    return {
        "G_period": _bath.G_period(b),
        "gamma_period_integral": _bath.integrate_gamma(b, 0.0, T),
        "gamma_max": float(cols["gamma"].max()),
        "gamma_min": float(cols["gamma"].min()),
        "closed_form": b.closed_form,
    }


def cmd_evolve(run):
    sys_, rho0, cfg = run.sys, run.rho0, run.cfg
    T = sys_.period
    t = cfg.t_grid.times() * T
    names = ("return_probability", "linear_entropy", "n2")
    dense = {n: dense_series(sys_, rho0, n, t).values for n in names}
    log_vol = [-_bath.integral_Gamma(sys_.bath, x) * _spread(sys_) for x in t]
    run.table("evolve_dense.csv", zip(t, *dense.values(), log_vol), ["t", *names, "log_volume"])

    pcfg = cfg.propagation_config(run.threads)
    strob = {n: stroboscopic_series(sys_, rho0, n, cfg.l_max, cross_check=True, cfg=pcfg).values for n in names}
    vol = stroboscopic_series(sys_, rho0, "volume", cfg.l_max, cfg=pcfg)
    ls = np.arange(cfg.l_max + 1)
    run.table("evolve_stroboscopic.csv", zip(ls, vol.t, *strob.values(), vol.values),
              ["l", "t", *names, "volume"])

    r = dense["return_probability"]
    inner = r[1:-1] if r.size > 2 else r
    return {
        "return_probability_end": float(r[-1]),
        "return_probability_min_interior": float(inner.min()),
        "revival_ratio": float(r[-1] / inner.min()) if inner.min() > 0 else math.inf,
        "linear_entropy_max": float(dense["linear_entropy"].max()),
        "stroboscopic_entropy_max": float(strob["linear_entropy"][1:].max(initial=0.0)),
    }


def _spread(sys_):
    n = sys_.space.levels.astype(float)
    return float(np.sum((n[:, None] - n[None, :]) ** 2))


def cmd_spectrum(run):
    sys_ = run.sys
    pcfg = run.cfg.propagation_config(run.threads)
    mono = monodromy(sys_, pcfg)
    spec, labels, lam_an, dmax = labelled_spectrum(sys_, mono)
    lam, L = spec.multipliers, spec.exponents
    rows = [
        (m, n, lam[i].real, lam[i].imag, L[i].real, L[i].imag, lam_an[i].real, lam_an[i].imag,
         abs(lam[i] - lam_an[i]))
        for i, (m, n) in enumerate(labels)
    ]
    run.table("spectrum.csv", rows, ["m", "n", "re_lambda", "im_lambda", "re_L", "im_L",
                                     "re_lambda_analytic", "im_lambda_analytic", "abs_delta"])
    summary = {
        "omega_T": sys_.omega * sys_.period,
        "G_period": _bath.G_period(sys_.bath),
        "max_abs_delta": dmax,
        "max_modulus_deviation": float(np.max(np.abs(np.abs(lam) - 1))),
        "antisymmetry_residual": antisymmetry_residual(spec, sys_.period),
        "richardson_deviation": mono.richardson_deviation,
        "count": len(rows),
    }
    if dmax > SPECTRUM_TOL:
        raise _Gate(f"spectrum deviates from the analytic multipliers by {dmax:.3g}", summary)
    return summary


def cmd_wigner(run):
    cfg, sys_, rho0 = run.cfg, run.sys, run.rho0
    g = cfg.grid
    grid = PhaseGrid(g.q_min, g.q_max, g.p_min, g.p_max, g.n_q, g.n_p)
    pcfg = cfg.propagation_config(run.threads)
    parity = parity_operator(rho0.space)
    fields = []
    worst = 0.0
    for i, time in enumerate(g.times):
        t = time * sys_.period
        rho = exact.evolve_exact(rho0, sys_, t)
        field = wigner(rho, grid, threads=run.threads)
        # same field from the propagated state
        other = wigner(propagate_state(sys_, rho0, t, pcfg), grid, threads=run.threads)
        diff = float(np.max(np.abs(field.values - other.values)))
        worst = max(worst, diff)
        origin = float(expectation(rho, parity).real / math.pi)
        info = {
            "norm": wigner_norm(field),
            "solver_agreement": diff,
            "parity_over_pi": origin,
            "return_probability": exact.return_probability(rho, rho0),
        }
        name = f"wigner_{i:02d}.csv"
        export_field(field, run.out / name, time=time, config_hash=cfg.digest(), extra=info)
        fields.append({"file": name, "time": time, **info})
    summary = {"fields": fields, "max_solver_disagreement": worst}
    if worst > WIGNER_AGREEMENT_TOL:
        raise _Gate(f"Wigner fields from the two solvers differ by {worst:.3g}", summary)
    return summary


def cmd_bath(run):
    cfg, sys_, rho0 = run.cfg, run.sys, run.rho0
    b = sys_.bath
    t = cfg.t_grid.times() * sys_.period
    n2 = exact.n2_expectation(rho0)
    n1 = exact.n_expectation(rho0)
    n_modes = 60 if b.closed_form else int(b.modes)
    rows = []
    floor = cfg.log_floor
    for k in range(1, n_modes + 1):
        nk = np.asarray(_bath.bath_mode_photon_number(b, k, t, n2), dtype=float)
        x, p = _bath.bath_mode_quadratures(b, k, t, n1)
        lg = np.log(np.maximum(nk, floor))
        rows.extend(zip([k] * t.size, t, nk, lg, x, p))
    run.table("bath_modes.csv", rows, ["k", "t", "N_k", "log_N_k", "X_k", "P_k"])
    return {
        "modes": n_modes,
        "samples": int(t.size),
        "n2_expectation": n2,
        "n_expectation": n1,
        "log_floor": floor,
    }


def cmd_divisibility(run):
    cfg, sys_ = run.cfg, run.sys
    pcfg = cfg.propagation_config(run.threads)
    mono = monodromy(sys_, pcfg)
    phase, logabs = map_determinant(mono)
    tr = trace_integral(sys_, 0.0, sys_.period, pcfg)
    vols = volume_series(mono, cfg.m_max)
    rows = []
    for m in range(cfg.m_max + 1):
        d = divisibility_delta(mono, m)
        rows.append((m, vols[m], d, is_divisible(d)))
    run.table("divisibility.csv", rows, ["m", "volume", "delta", "divisible"])
    det_abs = math.exp(logabs)
    return {
        "det_abs": det_abs,
        "det_phase_re": phase.real,
        "det_phase_im": phase.imag,
        "log_abs_det": logabs,
        "trace_integral_re": tr.real,
        "trace_integral_im": tr.imag,
        "liouville_jacobi_residual": abs(phase * det_abs - cmath.exp(tr)),
        "max_abs_delta": max(abs(r[2]) for r in rows),
        "richardson_deviation": mono.richardson_deviation,
    }


def cmd_verify(run):
    checks = run_checks(run.cfg, threads=run.threads, seed=run.seed)
    run.table("verify.csv", [(c.name, c.value, c.tolerance, c.passed, c.gate) for c in checks],
              ["check", "value", "tolerance", "passed", "gate"])
    summary = {
        "checks": {c.name: {"value": c.value, "tolerance": c.tolerance, "passed": c.passed, "gate": c.gate}
                   for c in checks},
        "all_gates_pass": all_gates_pass(checks),
    }
    for c in checks:
        print(f"{'PASS' if c.passed else ('FAIL' if c.gate else 'INFO')}  {c.name}  {c.value:.3e}  (tol {c.tolerance:g})")
    if not summary["all_gates_pass"]:
        raise _Gate("one or more invariant checks failed", summary)
    return summary


COMMANDS = {
    "rates": (cmd_rates, "bath rate curves gamma, g, G, Gamma on the time grid"),
    "evolve": (cmd_evolve, "dense and stroboscopic observable series"),
    "spectrum": (cmd_spectrum, "Floquet multipliers vs analytic values"),
    "wigner": (cmd_wigner, "Wigner fields at the configured times"),
    "bath": (cmd_bath, "per-mode photon numbers and quadratures"),
    "divisibility": (cmd_divisibility, "det of the monodromy, Delta_m and volume series"),
    "verify": (cmd_verify, "run the invariant suite and report pass/fail"),
}


class _Gate(NumericalGateError):
    def __init__(self, message, summary):
        super().__init__(message)
        self.summary = summary


def _default_threads():
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser():
    parser = argparse.ArgumentParser(prog="floqdiv", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"floqdiv {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True,
                       help=f"YAML config path or bundled name ({', '.join(bundled_configs())})")
        p.add_argument("--out", required=True, help="output directory (created if missing)")
        p.add_argument("--threads", type=int, default=_default_threads(),
                       help=f"worker threads (default ${THREADS_ENV} or 1)")
        p.add_argument("--seed", type=int, default=0, help="seed for randomly sampled check points")
    return parser


def _metadata(run, command, status):
    return {
        "command": command,
        "status": status,
        "version": __version__,
        "kernel_backend": kernels.BACKEND,
        "config_hash": run.cfg.digest(),
        "seed": run.seed,
    }


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    try:
        cfg = load_config(args.config)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        run = Run(cfg, out, args.threads, args.seed)
    except (ParseError, ValidationError, ValueError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID

    (out / "config.yaml").write_text(dump_config(cfg))
    fn = COMMANDS[args.command][0]
    try:
        summary = fn(run)
        status, code = "ok", EXIT_OK
    except _Gate as exc:
        summary, status, code = {**exc.summary, "error": str(exc)}, "gate_failed", EXIT_GATE
    except NumericalGateError as exc:
        summary, status, code = {"error": str(exc)}, "gate_failed", EXIT_GATE
    except ValueError as exc:
        summary, status, code = {"error": str(exc)}, "invalid", EXIT_INVALID
    write_json({**_metadata(run, args.command, status), "results": summary}, out / "summary.json")
    if code != EXIT_OK:
        print(f"{args.command}: {summary['error']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
