"""Run configuration: a YAML file per run, validated field by field.

All quantities are expressed with the bath period as the time unit
(``T = 1``, ``Omega = 2 pi``): ``system.omega`` is ``omega T``, ``bath.h`` is
``h T`` and ``bath.beta`` is ``beta / T``.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .bath import INFINITE, BathSpec
from .errors import ParseError, ValidationError
from .exact import SystemSpec
from .fock import (
    DensityMatrix,
    FockSpace,
    Ket,
    cat_state,
    coherent_state,
    density_from_ket,
    fock_state,
)
from .floquet import SCHEMES, PropagationConfig

STATE_KINDS = ("vacuum", "fock", "coherent", "cat", "amplitudes")


@dataclass(frozen=True)
class SystemConfig:
    omega: float = 2 * math.pi
    fock_dim: int = 30


@dataclass(frozen=True)
class BathConfig:
    h: float = 1.0
    z: float = 0.1
    s: int = 1
    modes: int | str = 60
    beta: float | None = None
    coupling_exponent: str = "half"


@dataclass(frozen=True)
class StateConfig:
    kind: str = "cat"
    alpha: complex | None = 2.0
    n: int | None = None
    file: str | None = None


@dataclass(frozen=True)
class PropagationSection:
    steps_per_period: int = 2000
    scheme: str = "magnus4"
    richardson_check: bool = True


@dataclass(frozen=True)
class TimeGrid:
    t_max: float = 3.0
    samples: int = 301

    def times(self):
        return np.linspace(0.0, self.t_max, self.samples)


@dataclass(frozen=True)
class GridSection:
    q_min: float = -6.0
    q_max: float = 6.0
    p_min: float = -6.0
    p_max: float = 6.0
    n_q: int = 241
    n_p: int = 241
    times: tuple = (0.0, 1.0, 2.0, 3.0)


@dataclass(frozen=True)
class RunConfig:
    system: SystemConfig = field(default_factory=SystemConfig)
    bath: BathConfig = field(default_factory=BathConfig)
    initial_state: StateConfig = field(default_factory=StateConfig)
    propagation: PropagationSection = field(default_factory=PropagationSection)
    t_grid: TimeGrid = field(default_factory=TimeGrid)
    grid: GridSection = field(default_factory=GridSection)
    l_max: int = 3
    m_max: int = 10
    log_floor: float = 1e-16
    base_dir: str | None = field(default=None, compare=False)

    def space(self):
        return FockSpace(self.system.fock_dim)

    def bath_spec(self):
        b = self.bath
        return BathSpec(
            h=b.h, z=b.z, omega0=2 * math.pi, s=b.s, modes=b.modes, beta=b.beta,
            coupling_exponent=b.coupling_exponent,
        )

    def system_spec(self):
        return SystemSpec(self.system.omega, self.space(), self.bath_spec())

    def propagation_config(self, threads=1):
        p = self.propagation
        return PropagationConfig(p.steps_per_period, p.scheme, p.richardson_check, threads)

    def initial_ket(self):
        st = self.initial_state
        space = self.space()
        if st.kind == "vacuum":
            return fock_state(space, 0)
        if st.kind == "fock":
            return fock_state(space, st.n)
        if st.kind == "coherent":
            return coherent_state(space, st.alpha)
        if st.kind == "cat":
            return cat_state(space, st.alpha)
        path = Path(st.file)
        if not path.is_absolute() and self.base_dir:
            path = Path(self.base_dir) / path
        data = np.loadtxt(path, ndmin=2)
        amps = data[:, 0] + (1j * data[:, 1] if data.shape[1] > 1 else 0)
        if amps.size > space.dim:
            raise ValidationError("initial_state.file", f"{amps.size} amplitudes exceed fock_dim {space.dim}")
        padded = np.zeros(space.dim, dtype=complex)
        padded[: amps.size] = amps
        return Ket.normalized(space, padded)

    def initial_density(self) -> DensityMatrix:
        return density_from_ket(self.initial_ket())

    def to_dict(self):
        d = asdict(self)
        d.pop("base_dir")
        a = d["initial_state"]["alpha"]
        if isinstance(a, complex):
            d["initial_state"]["alpha"] = [a.real, a.imag]
        d["grid"]["times"] = list(d["grid"]["times"])
        return d

    def digest(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


# --- parsing -----------------------------------------------------------------

def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _num(path, v, *, positive=False, nonneg=False):
    if not _is_num(v) or not math.isfinite(v):
        raise ValidationError(path, f"expected a finite number, got {v!r}")
    if positive and not v > 0:
        raise ValidationError(path, f"must be > 0, got {v!r}")
    if nonneg and not v >= 0:
        raise ValidationError(path, f"must be >= 0, got {v!r}")
    return float(v)


def _int(path, v, minimum):
    if not _is_int(v) or v < minimum:
        raise ValidationError(path, f"expected an integer >= {minimum}, got {v!r}")
    return int(v)


def _section(path, raw, cls, parsers):
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ValidationError(path, "expected a mapping")
    names = {f.name for f in fields(cls)}
    for key in raw:
        if key not in names:
            raise ValidationError(f"{path}.{key}", "unknown key")
    values = {}
    for key, value in raw.items():
        values[key] = parsers[key](f"{path}.{key}", value)
    return cls(**values)


def _alpha(path, v):
    if v is None:
        return None
    if _is_num(v):
        return complex(_num(path, v))
    if isinstance(v, list) and len(v) == 2:
        return complex(_num(path, v[0]), _num(path, v[1]))
    raise ValidationError(path, "alpha must be a number or [re, im]")


def _modes(path, v):
    if v == INFINITE:
        return INFINITE
    return _int(path, v, 1)


def _choice(options):
    def parse(path, v):
        if v not in options:
            raise ValidationError(path, f"must be one of {list(options)}, got {v!r}")
        return v
    return parse


def _bool(path, v):
    if not isinstance(v, bool):
        raise ValidationError(path, f"expected true/false, got {v!r}")
    return v


def _opt_str(path, v):
    if v is not None and not isinstance(v, str):
        raise ValidationError(path, "expected a string")
    return v


def _times(path, v):
    if not isinstance(v, list) or not v:
        raise ValidationError(path, "expected a non-empty list of times")
    return tuple(_num(f"{path}[{i}]", t, nonneg=True) for i, t in enumerate(v))


_PARSERS = {
    "system": (SystemConfig, {
        "omega": lambda p, v: _num(p, v, positive=True),
        "fock_dim": lambda p, v: _int(p, v, 2),
    }),
    "bath": (BathConfig, {
        "h": lambda p, v: _num(p, v, nonneg=True),
        "z": lambda p, v: _num(p, v, positive=True),
        "s": lambda p, v: _int(p, v, 1),
        "modes": _modes,
        "beta": lambda p, v: None if v is None else _num(p, v, positive=True),
        "coupling_exponent": _choice(("half", "full")),
    }),
    "initial_state": (StateConfig, {
        "kind": _choice(STATE_KINDS),
        "alpha": _alpha,
        "n": lambda p, v: None if v is None else _int(p, v, 0),
        "file": _opt_str,
    }),
    "propagation": (PropagationSection, {
        "steps_per_period": lambda p, v: _int(p, v, 100),
        "scheme": _choice(SCHEMES),
        "richardson_check": _bool,
    }),
    "t_grid": (TimeGrid, {
        "t_max": lambda p, v: _num(p, v, positive=True),
        "samples": lambda p, v: _int(p, v, 2),
    }),
    "grid": (GridSection, {
        "q_min": _num, "q_max": _num, "p_min": _num, "p_max": _num,
        "n_q": lambda p, v: _int(p, v, 2),
        "n_p": lambda p, v: _int(p, v, 2),
        "times": _times,
    }),
}

_SCALARS = {
    "l_max": lambda p, v: _int(p, v, 0),
    "m_max": lambda p, v: _int(p, v, 0),
    "log_floor": lambda p, v: _num(p, v, positive=True),
}


def parse_config(raw, base_dir=None):
    """Build and validate a :class:`RunConfig` from a parsed mapping."""
    if not isinstance(raw, dict):
        raise ValidationError("<root>", "configuration must be a mapping")
    for key in raw:
        if key not in _PARSERS and key not in _SCALARS:
            raise ValidationError(key, "unknown key")
    kwargs = {}
    for key, (cls, parsers) in _PARSERS.items():
        if key in raw:
            kwargs[key] = _section(key, raw[key], cls, parsers)
    for key, parser in _SCALARS.items():
        if key in raw:
            kwargs[key] = parser(key, raw[key])
    cfg = RunConfig(base_dir=None if base_dir is None else str(base_dir), **kwargs)
    _cross_validate(cfg)
    return cfg


def _cross_validate(cfg):
    b = cfg.bath
    if b.modes == INFINITE:
        if b.s != 1:
            raise ValidationError("bath.modes", "the infinite closed-form bath requires bath.s = 1")
        if b.beta is not None:
            raise ValidationError("bath.modes", "the infinite closed-form bath requires zero temperature (beta: null)")
    st = cfg.initial_state
    if st.kind in ("coherent", "cat") and st.alpha is None:
        raise ValidationError("initial_state.alpha", f"required for kind {st.kind!r}")
    if st.kind == "fock":
        if st.n is None:
            raise ValidationError("initial_state.n", "required for kind 'fock'")
        if st.n >= cfg.system.fock_dim:
            raise ValidationError("initial_state.n", f"level {st.n} outside fock_dim {cfg.system.fock_dim}")
    if st.kind == "amplitudes" and not st.file:
        raise ValidationError("initial_state.file", "required for kind 'amplitudes'")
    g = cfg.grid
    if not g.q_max > g.q_min:
        raise ValidationError("grid.q_max", "must exceed grid.q_min")
    if not g.p_max > g.p_min:
        raise ValidationError("grid.p_max", "must exceed grid.p_min")
    # constructing the state surfaces truncation problems at load time
    if st.kind in ("coherent", "cat"):
        try:
            cfg.initial_ket()
        except ValueError as exc:
            raise ValidationError("initial_state.alpha", str(exc)) from exc


def bundled_configs():
    root = resources.files("floqdiv") / "configs"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def bundled_config_path(name):
    return Path(str(resources.files("floqdiv") / "configs" / f"{name}.yaml"))


def load_config(path):
    """Load a YAML run configuration; a bare bundled name like ``paper_fig1`` also works.

    Raises
    ------
    ParseError
        Unreadable or malformed YAML.
    ValidationError
        A value violates its constraint; ``.field`` names the key.
    """
    p = Path(path)
    if not p.exists() and str(path) in bundled_configs():
        p = bundled_config_path(str(path))
    try:
        text = p.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {p}: {exc}") from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"{p}: {exc}") from exc
    return parse_config(raw if raw is not None else {}, base_dir=p.parent)


def dump_config(cfg):
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False)


def with_overrides(cfg, **sections):
    """Copy of ``cfg`` with whole sections replaced (used by tests and verify)."""
    return replace(cfg, **sections)
