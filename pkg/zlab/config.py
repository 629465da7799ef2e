#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# License: GPL

"""
Run configuration: TOML (or YAML) files validated into pydantic models.
"""

import logging
import math
import os
from typing import Any, Dict, List, Optional

import tomli
import yaml
from pydantic import BaseModel, ValidationError, validator

from . import exceptions
from .constants import DEFAULT_D_BLOW, DEFAULT_K, DEFAULT_L, DEFAULT_M_BLOW_FACTOR
from .dynamics import FRAMES, Thresholds
from .grid import Grid
from .norms import NormSpec

logger = logging.getLogger(__name__)

KINDS = (
    "simulate",
    "montecarlo",
    "scatterprob",
    "equivalence",
    "groundstate",
    "norms",
    "variation",
)

_PRESETS = ("conservative", "nonconservative", "custom", "none")
_MESH_RTOL = 1e-9


class GridConfig(BaseModel):
    d: int = 4
    n: int = 16
    L: float = DEFAULT_L

    def build(self) -> Grid:
        return Grid(self.d, self.n, self.L)


class NoiseConfig(BaseModel):
    preset: str = "conservative"
    modes: int = 2
    wave_modes: Optional[int] = None
    amplitude: float = 1.0
    wave_amplitude: float = 1.0
    width: float = 4.0
    c: float = 1.0
    c_list: List[float] = [0.5, 1.0, 2.0, 4.0]

    @validator("preset")
    @classmethod
    def validate_preset(cls, val):
        if val not in _PRESETS:
            raise ValueError(f"unknown preset {val}")

        return val

    @validator("c_list")
    @classmethod
    def validate_c_list(cls, val):
        if any(c < 0 for c in val):
            raise ValueError(f"negative c in {val}")

        return val

    def model_params(self, c: Optional[float] = None) -> Dict[str, Any]:
        params = self.dict(exclude={"preset", "c_list"})
        if c is not None:
            params["c"] = c

        return params


class InitialDataConfig(BaseModel):
    recipe: str = "gaussian"
    params: Dict[str, Any] = {}

    @validator("recipe")
    @classmethod
    def validate_recipe(cls, val):
        if val not in ("ground_state", "gaussian", "file"):
            raise ValueError(f"unknown recipe {val}")

        return val


class ThresholdConfig(BaseModel):
    m_blow: Optional[float] = None
    m_blow_factor: float = DEFAULT_M_BLOW_FACTOR
    d_blow: float = DEFAULT_D_BLOW
    scattering_tol: float = 1e-2
    checkpoints: List[float] = []
    sigma_n: Optional[int] = None

    @validator("checkpoints")
    @classmethod
    def validate_checkpoints(cls, val):
        if list(val) != sorted(val):
            raise ValueError("checkpoints must be sorted")

        return val

    def build(self) -> Thresholds:
        return Thresholds(
            m_blow=self.m_blow, m_blow_factor=self.m_blow_factor, d_blow=self.d_blow
        )


class SweepConfig(BaseModel):
    estimates: Optional[List[str]] = None
    samples: int = 8
    d: int = 2
    n: int = 16
    L: float = 2 * math.pi
    window: float = 4.0
    steps: int = 32
    K: int = DEFAULT_K
    c: float = 1.0
    bound: float = 0.5
    constant_h: bool = False


class NormConfig(BaseModel):
    block: Optional[str] = None
    specs: List[NormSpec] = []
    sweep: Optional[SweepConfig] = None


class VariationConfig(BaseModel):
    experiment: str = "vp"
    source: str = "gbm"
    path_file: Optional[str] = None
    c: float = 1.0
    p: float = 3.0
    alpha: float = 1.0 / 3.0
    horizons: List[float] = [20.0, 40.0]
    M: int = 200
    dt: float = 1e-2
    c_list: List[float] = [0.5, 1.0, 2.0, 4.0]
    C_prime: float = 2.0
    tail_horizon: float = 4.0
    tail_steps: int = 800

    @validator("experiment")
    @classmethod
    def validate_experiment(cls, val):
        if val not in ("vp", "tail", "path"):
            raise ValueError(f"unknown experiment {val}")

        return val

    @validator("source")
    @classmethod
    def validate_source(cls, val):
        if val not in ("gbm", "bm", "file"):
            raise ValueError(f"unknown source {val}")

        return val


class RunConfig(BaseModel):
    kind: str = "simulate"
    seed: int = 0
    paths: int = 1
    threads: int = 1
    dt: float = 1e-3
    T: float = 1.0
    frame: str = "direct"
    coupling: float = 1.0
    record_every: int = 1
    dt_levels: int = 3
    lambdas: List[float] = [0.5, 1.0, 2.0]
    pairs: int = 1000
    out: str = "zlab-out"
    grid: GridConfig = GridConfig()
    noise: NoiseConfig = NoiseConfig()
    initial: InitialDataConfig = InitialDataConfig()
    thresholds: ThresholdConfig = ThresholdConfig()
    norms: NormConfig = NormConfig()
    variation: VariationConfig = VariationConfig()

    @validator("kind")
    @classmethod
    def validate_kind(cls, val):
        if val not in KINDS:
            raise ValueError(f"unknown experiment {val} {KINDS}")

        return val

    @validator("seed")
    @classmethod
    def validate_seed(cls, val):
        if not 0 <= val < 2**64:
            raise ValueError(f"must fit in 64 bits ({val})")

        return val

    @validator("paths", "threads", "record_every", "dt_levels")
    @classmethod
    def validate_positive(cls, val):
        if val < 1:
            raise ValueError(f"expected a positive integer, found {val}")

        return val

    @validator("frame")
    @classmethod
    def validate_frame(cls, val):
        if val not in FRAMES:
            raise ValueError(f"unknown frame {val} {FRAMES}")

        return val

    @validator("T")
    @classmethod
    def validate_mesh(cls, val, values):
        dt = values.get("dt")
        if dt is None or not dt > 0:
            raise ValueError(f"needs a positive dt ({dt})")

        steps = val / dt
        if val <= 0 or abs(steps - round(steps)) > _MESH_RTOL * max(steps, 1.0):
            raise ValueError(f"{val} is not a multiple of dt={dt}")

        return val

    @property
    def steps(self) -> int:
        return int(round(self.T / self.dt))

    def echo(self) -> dict:
        return self.dict()

    def updated(self, **changes) -> "RunConfig":
        "Copy with top-level overrides (None values are ignored)."
        data = self.dict()
        data.update({key: val for key, val in changes.items() if val is not None})
        return parse_config(data)


def _field_path(error: ValidationError) -> str:
    return "; ".join(
        f"{'.'.join(str(part) for part in item['loc'])}: {item['msg']}"
        for item in error.errors()
    )


def parse_config(data: dict) -> RunConfig:
    """
    :raises exceptions.InvalidConfig: with the dotted path of the bad field
    """
    try:
        return RunConfig.parse_obj(data or {})
    except ValidationError as error:
        raise exceptions.InvalidConfig(_field_path(error)) from None


def load_config(path: str) -> RunConfig:
    """Load a TOML (.toml) or YAML (.yaml, .yml) run configuration.

    :raises exceptions.InvalidConfig
    """
    extension = os.path.splitext(path)[1].lower()
    try:
        if extension == ".toml":
            with open(path, "rb") as f:
                data = tomli.load(f)
        elif extension in (".yaml", ".yml"):
            with open(path) as f:
                data = yaml.safe_load(f)
        else:
            raise exceptions.InvalidConfig(f"Unknown configuration format: {path}")
    except (OSError, tomli.TOMLDecodeError, yaml.YAMLError) as error:
        raise exceptions.InvalidConfig(f"Can't read {path}: {error}") from None

    logger.debug("Loaded configuration: %s", path)
    return parse_config(data)
