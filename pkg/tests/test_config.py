#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# License: GPL

import pytest

from zlab import exceptions
from zlab.config import RunConfig, load_config, parse_config

_TOML = """
kind = "groundstate"
seed = 7
pairs = 4

[grid]
d = 2
n = 8

[noise]
preset = "nonconservative"
c = 0.5
"""

_YAML = """
kind: montecarlo
dt: 0.01
T: 0.05
grid:
  d: 1
  n: 16
"""


def test_defaults():
    config = parse_config({})
    assert config.kind == "simulate"
    assert config.grid.d == 4 and config.grid.n == 16
    assert config.noise.preset == "conservative"
    assert config.steps == 1000


def test_mesh_check():
    assert parse_config({"dt": 0.01, "T": 0.3}).steps == 30

    with pytest.raises(exceptions.InvalidConfig, match="multiple of dt"):
        parse_config({"dt": 0.01, "T": 0.015})


@pytest.mark.parametrize(
    "data",
    [
        {"kind": "forecast"},
        {"frame": "sideways"},
        {"paths": 0},
        {"seed": -1},
        {"noise": {"preset": "pink"}},
        {"noise": {"c_list": [1.0, -1.0]}},
        {"initial": {"recipe": "soliton"}},
        {"thresholds": {"checkpoints": [0.5, 0.2]}},
        {"variation": {"experiment": "quadratic"}},
    ],
)
def test_invalid_fields(data):
    with pytest.raises(exceptions.InvalidConfig):
        parse_config(data)


@pytest.mark.parametrize(
    "data, field",
    [
        ({"grid": {"d": "four"}}, "grid.d"),
        ({"paths": 0}, "paths"),
        ({"threads": -2}, "threads"),
        ({"seed": 2**64}, "seed"),
        ({"noise": {"preset": "pink"}}, "noise.preset"),
        ({"thresholds": {"checkpoints": [0.5, 0.2]}}, "thresholds.checkpoints"),
        ({"dt": 0.01, "T": 0.015}, "T"),
    ],
)
def test_error_names_the_field(data, field):
    with pytest.raises(exceptions.InvalidConfig) as error:
        parse_config(data)

    assert str(error.value).startswith(f"{field}: ")


def test_unknown_norm_family():
    with pytest.raises(exceptions.InvalidNormSpec):
        parse_config({"norms": {"specs": [{"family": "Q"}]}})


def test_echo_round_trip():
    config = parse_config({"seed": 3, "grid": {"d": 2, "n": 8}})
    assert RunConfig.parse_obj(config.echo()) == config


def test_updated_ignores_none():
    config = parse_config({"seed": 3})
    changed = config.updated(kind="norms", seed=None, paths=5)
    assert changed.kind == "norms"
    assert changed.seed == 3
    assert changed.paths == 5

    with pytest.raises(exceptions.InvalidConfig):
        config.updated(threads=0)


def test_noise_params():
    config = parse_config({"noise": {"c": 2.0}})
    params = config.noise.model_params()
    assert "preset" not in params and "c_list" not in params
    assert params["c"] == 2.0
    assert config.noise.model_params(0.5)["c"] == 0.5


def test_load_toml(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text(_TOML)
    config = load_config(str(path))
    assert config.kind == "groundstate"
    assert config.seed == 7
    assert config.grid.n == 8
    assert config.noise.c == 0.5


@pytest.mark.parametrize("name", ["run.yaml", "run.yml"])
def test_load_yaml(tmp_path, name):
    path = tmp_path / name
    path.write_text(_YAML)
    config = load_config(str(path))
    assert config.kind == "montecarlo"
    assert config.steps == 5
    assert config.grid.d == 1


def test_load_errors(tmp_path):
    with pytest.raises(exceptions.InvalidConfig):
        load_config(str(tmp_path / "missing.toml"))

    ini = tmp_path / "run.ini"
    ini.write_text("[grid]\n")
    with pytest.raises(exceptions.InvalidConfig):
        load_config(str(ini))

    broken = tmp_path / "broken.toml"
    broken.write_text("kind = \n")
    with pytest.raises(exceptions.InvalidConfig):
        load_config(str(broken))
