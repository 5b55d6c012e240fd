import math

import numpy as np
import pytest
import yaml

from floqdiv.config import (
    RunConfig,
    bundled_config_path,
    bundled_configs,
    dump_config,
    load_config,
    parse_config,
    with_overrides,
)
from floqdiv.errors import ParseError, ValidationError


def write(tmp_path, raw, name="run.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(raw) if not isinstance(raw, str) else raw)
    return p


def test_reference_config_values():
    cfg = load_config("paper_fig1")
    assert cfg.bath.h == 1.0 and cfg.bath.z == 0.1 and cfg.bath.modes == 60
    assert cfg.initial_state.kind == "cat" and cfg.initial_state.alpha == 2
    assert cfg.system.omega == pytest.approx(2 * math.pi)
    assert cfg.system.fock_dim == 30
    assert cfg.grid.n_q == 241 and cfg.grid.q_max == 6.0


def test_bundled_names_and_path_load_identically():
    names = bundled_configs()
    assert {"paper_fig1", "paper_fig2", "zero_coupling", "infinite_bath"} <= set(names)
    assert load_config(bundled_config_path("paper_fig1")) == load_config("paper_fig1")


@pytest.mark.parametrize("name", bundled_configs())
def test_round_trip(name, tmp_path):
    cfg = load_config(name)
    again = load_config(write(tmp_path, dump_config(cfg)))
    assert again == cfg
    assert again.digest() == cfg.digest()


def test_defaults_mirror_reference_workload():
    cfg = parse_config({})
    assert cfg == RunConfig()
    assert cfg.propagation_config().scheme == "magnus4"


def test_negative_h_names_field(tmp_path):
    with pytest.raises(ValidationError) as err:
        load_config(write(tmp_path, {"bath": {"h": -1.0}}))
    assert err.value.field == "bath.h"
    assert "bath.h" in str(err.value)


def test_infinite_bath_requires_linear_dispersion(tmp_path):
    with pytest.raises(ValidationError):
        load_config(write(tmp_path, {"bath": {"modes": "infinite", "s": 2}}))
    cfg = load_config(write(tmp_path, {"bath": {"modes": "infinite"}}))
    assert cfg.bath_spec().closed_form


@pytest.mark.parametrize(
    "raw, field",
    [
        ({"colour": 1}, "colour"),
        ({"bath": {"hh": 1.0}}, "bath.hh"),
        ({"bath": {"z": 0}}, "bath.z"),
        ({"system": {"fock_dim": 1.5}}, "system.fock_dim"),
        ({"propagation": {"steps_per_period": 50}}, "propagation.steps_per_period"),
        ({"propagation": {"scheme": "euler"}}, "propagation.scheme"),
        ({"initial_state": {"kind": "squeezed"}}, "initial_state.kind"),
        ({"initial_state": {"kind": "fock"}}, "initial_state.n"),
        ({"initial_state": {"kind": "fock", "n": 30}}, "initial_state.n"),
        ({"initial_state": {"kind": "amplitudes"}}, "initial_state.file"),
        ({"system": {"fock_dim": 8}}, "initial_state.alpha"),
        ({"grid": {"q_min": 1.0, "q_max": -1.0}}, "grid.q_max"),
        ({"bath": {"coupling_exponent": "third"}}, "bath.coupling_exponent"),
    ],
)
def test_validation_errors(raw, field):
    with pytest.raises(ValidationError) as err:
        parse_config(raw)
    assert err.value.field == field


def test_malformed_yaml(tmp_path):
    with pytest.raises(ParseError):
        load_config(write(tmp_path, "bath: [1, 2\n"))


def test_missing_file(tmp_path):
    with pytest.raises(ParseError):
        load_config(tmp_path / "absent.yaml")


def test_non_mapping_root():
    with pytest.raises(ValidationError):
        parse_config([1, 2])


def test_complex_alpha(tmp_path):
    cfg = load_config(write(tmp_path, {"initial_state": {"kind": "coherent", "alpha": [1.0, -0.5]}}))
    assert cfg.initial_state.alpha == complex(1.0, -0.5)
    assert load_config(write(tmp_path, dump_config(cfg), "again.yaml")) == cfg


def test_amplitudes_file(tmp_path):
    np.savetxt(tmp_path / "amps.txt", [[1.0, 0.0], [0.0, 1.0]])
    cfg = load_config(write(tmp_path, {
        "system": {"fock_dim": 4},
        "initial_state": {"kind": "amplitudes", "file": "amps.txt"},
    }))
    amps = cfg.initial_ket().amplitudes
    assert np.allclose(amps, [1 / math.sqrt(2), 1j / math.sqrt(2), 0, 0], atol=1e-15)


def test_amplitudes_file_too_long(tmp_path):
    np.savetxt(tmp_path / "amps.txt", np.ones((5, 2)))
    cfg = load_config(write(tmp_path, {
        "system": {"fock_dim": 4},
        "initial_state": {"kind": "amplitudes", "file": "amps.txt"},
    }))
    with pytest.raises(ValidationError):
        cfg.initial_ket()


def test_overrides_change_digest():
    cfg = load_config("paper_fig1")
    other = with_overrides(cfg, l_max=5)
    assert other.l_max == 5 and other.digest() != cfg.digest()


def test_time_grid():
    t = parse_config({"t_grid": {"t_max": 2.0, "samples": 5}}).t_grid.times()
    assert np.array_equal(t, [0, 0.5, 1.0, 1.5, 2.0])
