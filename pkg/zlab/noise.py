#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# License: GPL

"""
Wiener processes W_j(t, x) = Σ_k i φ_k^{(j)}(x) β_k^{(j)}(t), their derived
coefficients and the stochastic convolution of the additive wave noise.

Brownian increments come from a counter-based generator: the Philox key packs
(seed, path index, refinement level, process, mode) and the counter is the
mesh step, so any window of any path can be regenerated on its own.
"""

import logging
import math
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, validator

from . import exceptions
from .grid import Field, Grid
from .spectral import gradient, laplacian

logger = logging.getLogger(__name__)

_PRESETS = ("conservative", "nonconservative", "custom", "none")

_MESH_RTOL = 1e-9

_TWO_POW_53 = 2.0**-53


def _stream_id(index: int, level: int, process: int, mode: int) -> int:
    if not (0 <= index < 2**32 and 0 <= level < 2**8):
        raise exceptions.InvalidNoiseModel(f"Path index/level out of range: {index}")

    if process not in (1, 2) or not 0 <= mode < 2**16:
        raise exceptions.InvalidNoiseModel(f"Invalid stream ({process}, {mode})")

    return (index << 32) | (level << 24) | (process << 16) | mode


def standard_normals(
    seed: int, index: int, level: int, process: int, mode: int, start: int, count: int
) -> np.ndarray:
    """Standard normal draws for mesh steps start..start+count-1.

    Draw k only depends on the key and on start + k.
    """
    if not 0 <= seed < 2**64:
        raise exceptions.InvalidNoiseModel(f"Seed must fit in 64 bits: {seed}")

    stream = _stream_id(index, level, process, mode)
    bit_generator = np.random.Philox(key=seed | (stream << 64), counter=start)
    raw = bit_generator.random_raw(4 * count).reshape(count, 4)
    uniform = ((raw[:, :2] >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_POW_53
    return np.sqrt(-2.0 * np.log(uniform[:, 0])) * np.cos(2 * np.pi * uniform[:, 1])


class NoisePath:
    """Brownian increments Δβ_k^{(j)} on the mesh k·dt, k < steps.

    :param seed: base seed
    :param dt: mesh step
    :param steps: number of increments
    :param modes: (number of modes of W₁, number of modes of W₂)
    :param index: path index inside a Monte-Carlo run
    """

    def __init__(
        self,
        seed: int,
        dt: float,
        steps: int,
        modes: Tuple[int, int],
        index: int = 0,
        level: int = 0,
        offset: int = 0,
        increments: Optional[Dict[int, np.ndarray]] = None,
    ):
        if not dt > 0 or steps < 0:
            raise exceptions.InvalidNoiseModel(f"Invalid mesh: dt={dt}, steps={steps}")

        self.seed = int(seed)
        self.dt = float(dt)
        self.steps = int(steps)
        self.modes = (int(modes[0]), int(modes[1]))
        self.index = int(index)
        self.level = int(level)
        self.offset = int(offset)

        if increments is None:
            increments = {
                process: self._generate(process, count)
                for process, count in zip((1, 2), self.modes)
            }

        self.increments = increments

    def __repr__(self):
        return (
            f"<NoisePath seed={self.seed} index={self.index} dt={self.dt:.4g} "
            f"steps={self.steps} level={self.level} offset={self.offset}>"
        )

    def _generate(self, process: int, count: int) -> np.ndarray:
        columns = [
            standard_normals(
                self.seed, self.index, self.level, process, mode, self.offset,
                self.steps,
            )
            for mode in range(count)
        ]
        if not columns:
            return np.zeros((self.steps, 0))

        return math.sqrt(self.dt) * np.stack(columns, axis=1)

    @property
    def T(self) -> float:
        return self.dt * self.steps

    @property
    def origin(self) -> float:
        "Absolute time of the path's zero."
        return self.dt * self.offset

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.steps + 1)

    def step_of(self, t: float) -> int:
        """Mesh index of the (path-local) time t.

        :raises exceptions.OffMeshTime
        """
        step = round(t / self.dt)
        if abs(step * self.dt - t) > _MESH_RTOL * max(1.0, abs(t)):
            raise exceptions.OffMeshTime(f"t={t} is not on the mesh (dt={self.dt})")

        if not 0 <= step <= self.steps:
            raise exceptions.OffMeshTime(f"t={t} outside [0, {self.T}]")

        return int(step)

    def delta(self, process: int, step: int) -> np.ndarray:
        "Increments of every mode of process over [step·dt, (step+1)·dt]."
        return self.increments[process][step]

    @cached_property
    def _values(self) -> Dict[int, np.ndarray]:
        out = {}
        for process, inc in self.increments.items():
            zero = np.zeros((1, inc.shape[1]))
            out[process] = np.concatenate([zero, np.cumsum(inc, axis=0)])

        return out

    def values(self, process: int) -> np.ndarray:
        "β on the whole mesh, shaped (steps + 1, modes)."
        return self._values[process]

    def beta(self, process: int, step: int) -> np.ndarray:
        return self._values[process][step]

    def refined(self) -> "NoisePath":
        """Brownian bridge refinement to the mesh dt/2.

        The refined path takes the same values on the coarse mesh.
        """
        halves = {}
        for process, inc in self.increments.items():
            level = self.level + 1
            bridge = [
                standard_normals(
                    self.seed, self.index, level, process, mode, self.offset,
                    self.steps,
                )
                for mode in range(inc.shape[1])
            ]
            bridge = np.stack(bridge, axis=1) if bridge else np.zeros_like(inc)
            spread = 0.5 * math.sqrt(self.dt) * bridge
            fine = np.empty((2 * self.steps, inc.shape[1]))
            fine[0::2] = 0.5 * inc + spread
            fine[1::2] = 0.5 * inc - spread
            halves[process] = fine

        return NoisePath(
            self.seed,
            self.dt / 2,
            2 * self.steps,
            self.modes,
            self.index,
            self.level + 1,
            2 * self.offset,
            halves,
        )

    def restarted(self, sigma: float) -> "NoisePath":
        "Increment path β(σ + ·) − β(σ) (σ is path-local)."
        start = self.step_of(sigma)
        return NoisePath(
            self.seed,
            self.dt,
            self.steps - start,
            self.modes,
            self.index,
            self.level,
            self.offset + start,
            {process: inc[start:] for process, inc in self.increments.items()},
        )


class NoiseModel(BaseModel):
    "Spatial modes of the multiplicative (W₁) and additive (W₂) noise."

    grid: Grid
    modes1: List[np.ndarray] = []
    modes2: List[np.ndarray] = []
    preset: str = "custom"

    class Config:
        arbitrary_types_allowed = True
        allow_mutation = False

    @validator("modes1", "modes2", each_item=True)
    @classmethod
    def _check_mode(cls, val):
        if not np.all(np.isfinite(val)):
            raise exceptions.InvalidNoiseModel("Noise modes must be finite")

        return np.asarray(val, dtype=np.complex128)

    @validator("modes2")
    @classmethod
    def _check_real(cls, val):
        for mode in val:
            if np.max(np.abs(mode.imag), initial=0.0) > 0:
                raise exceptions.InvalidNoiseModel("Modes of W₂ must be real")

        return val

    @validator("preset")
    @classmethod
    def _check_preset(cls, val):
        if val not in _PRESETS:
            raise exceptions.InvalidNoiseModel(f"Unknown preset: {val}")

        return val

    @property
    def counts(self) -> Tuple[int, int]:
        return len(self.modes1), len(self.modes2)

    @property
    def is_empty(self) -> bool:
        return self.counts == (0, 0)

    @property
    def is_real(self) -> bool:
        "True when every φ^{(1)} is real (pathwise mass conservation)."
        return all(np.max(np.abs(m.imag), initial=0.0) == 0 for m in self.modes1)

    @property
    def mu(self) -> np.ndarray:
        "μ = ½ Σ|φ_k^{(1)}|²."
        out = np.zeros(self.grid.shape)
        for mode in self.modes1:
            out += 0.5 * np.abs(mode) ** 2

        return out

    @property
    def mu_hat_field(self) -> np.ndarray:
        "½(Σ|φ_k|² − Σφ_k²); zero for real modes."
        out = np.zeros(self.grid.shape, dtype=np.complex128)
        for mode in self.modes1:
            out += 0.5 * (np.abs(mode) ** 2 - mode**2)

        return out

    @property
    def constant_mode(self) -> Optional[complex]:
        "The value of φ₁^{(1)} if it is the only mode and spatially constant."
        if len(self.modes1) != 1:
            return None

        mode = self.modes1[0]
        if np.max(np.abs(mode - mode.flat[0])) > 0:
            return None

        return complex(mode.flat[0])

    @property
    def mu_hat(self) -> Optional[complex]:
        phi = self.constant_mode
        if phi is None:
            return None

        return 0.5 * (abs(phi) ** 2 - phi**2)

    def hypothesis_report(self) -> Dict[str, float]:
        """The three summability quantities on the grid.

        The lateral integral uses, per axis, the maximum of |∇φ| over the
        transverse coordinates summed along the axis times the spacing.
        """
        grid = self.grid
        h4 = sum(Field(grid, m).hs_norm(4.0) ** 2 for m in self.modes1)
        h2 = sum(Field(grid, m).hs_norm(2.0) ** 2 for m in self.modes2)

        lateral = 0.0
        for mode in self.modes1:
            partials = gradient(Field(grid, mode))
            slope = np.sqrt(sum(np.abs(p.values) ** 2 for p in partials))
            for axis in range(grid.d):
                others = tuple(a for a in range(grid.d) if a != axis)
                envelope = slope.max(axis=others) if others else slope
                lateral += float(envelope.sum() * grid.spacing)

        return {
            "h4_modes1": float(h4),
            "lateral_modes1": float(lateral),
            "h2_modes2": float(h2),
        }

    def new_path(self, seed: int, dt: float, steps: int, index: int = 0) -> NoisePath:
        return NoisePath(seed, dt, steps, self.counts, index)


def _periodic_gaussian(grid: Grid, width: float, shift: float) -> np.ndarray:
    "Gaussian of the periodic distance to the point shift·e₁."
    first = (grid.coords[0] - shift + grid.L / 2) % grid.L - grid.L / 2
    squared = first**2 + sum(x**2 for x in grid.coords[1:])
    return np.broadcast_to(np.exp(-squared / (2 * width**2)), grid.shape).copy()


def build_noise_model(
    grid: Grid,
    preset: str = "conservative",
    modes: int = 2,
    wave_modes: Optional[int] = None,
    amplitude: float = 1.0,
    wave_amplitude: float = 1.0,
    width: float = 4.0,
    c: float = 1.0,
    custom1: Sequence = (),
    custom2: Sequence = (),
) -> NoiseModel:
    """Build a noise model from a preset.

    conservative: φ_k^{(1)} = amplitude·2^{-k}·G_k and φ_k^{(2)} =
    wave_amplitude·2^{-k}·G_k with periodized Gaussians G_k of the given width
    centred at (k−1)·width along the first axis. nonconservative: the single
    constant mode φ₁^{(1)} = ic and no wave noise. custom: explicit modes
    (arrays or Fields). none: deterministic dynamics.

    :raises exceptions.InvalidNoiseModel
    """
    if preset == "none":
        return NoiseModel(grid=grid, preset=preset)

    if preset == "nonconservative":
        if c < 0:
            raise exceptions.InvalidNoiseModel(f"c must be nonnegative: {c}")

        mode = np.full(grid.shape, 1j * c, dtype=np.complex128)
        return NoiseModel(grid=grid, modes1=[mode], preset=preset)

    if preset == "conservative":
        wave_modes = modes if wave_modes is None else wave_modes
        if modes < 0 or wave_modes < 0 or not width > 0:
            raise exceptions.InvalidNoiseModel("Invalid conservative parameters")

        modes1 = [
            amplitude * 2.0**-k * _periodic_gaussian(grid, width, (k - 1) * width)
            for k in range(1, modes + 1)
        ]
        modes2 = [
            wave_amplitude * 2.0**-k * _periodic_gaussian(grid, width, (k - 1) * width)
            for k in range(1, wave_modes + 1)
        ]
        return NoiseModel(grid=grid, modes1=modes1, modes2=modes2, preset=preset)

    if preset == "custom":
        unwrap = [m.values if isinstance(m, Field) else np.asarray(m) for m in custom1]
        unwrap2 = [m.values if isinstance(m, Field) else np.asarray(m) for m in custom2]
        for mode in unwrap + unwrap2:
            if mode.shape != grid.shape:
                raise exceptions.InvalidNoiseModel(f"Mode shape {mode.shape} != {grid}")

        return NoiseModel(grid=grid, modes1=unwrap, modes2=unwrap2, preset=preset)

    raise exceptions.InvalidNoiseModel(f"Unknown preset: {preset}")


def _check_path(model: NoiseModel, path: NoisePath):
    if path.modes != model.counts:
        raise exceptions.InvalidNoiseModel(
            f"Path has {path.modes} modes, model needs {model.counts}"
        )


def brownian_value(path: NoisePath, process: int, mode: int, t: float) -> float:
    """β_mode^{(process)}(t) for a (path-local) mesh time t.

    :raises exceptions.OffMeshTime
    """
    return float(path.beta(process, path.step_of(t))[mode])


def _combine(model_modes: List[np.ndarray], weights: np.ndarray, grid: Grid):
    out = np.zeros(grid.shape, dtype=np.complex128)
    for mode, weight in zip(model_modes, weights):
        out += 1j * mode * weight

    return out


def w1_values(model: NoiseModel, path: NoisePath, step: int) -> np.ndarray:
    return _combine(model.modes1, path.beta(1, step), model.grid)


def w1_field(model: NoiseModel, path: NoisePath, t: float) -> Field:
    "W₁(t, ·) = Σ i φ_k^{(1)} β_k^{(1)}(t)."
    _check_path(model, path)
    return Field(model.grid, w1_values(model, path, path.step_of(t)))


def w1_increment(model: NoiseModel, path: NoisePath, step: int) -> np.ndarray:
    return _combine(model.modes1, path.delta(1, step), model.grid)


def w2_increment(model: NoiseModel, path: NoisePath, step: int) -> Field:
    "ΔW₂ = Σ i φ_k^{(2)} Δβ_k^{(2)} over [step·dt, (step+1)·dt]."
    _check_path(model, path)
    return Field(model.grid, _combine(model.modes2, path.delta(2, step), model.grid))


def geometric_bm(path: NoisePath, c: float, t: float, mode: int = 0) -> float:
    "h_c(t) = exp(−2cβ(t) − 2c²t) with β = β_mode^{(1)}."
    return math.exp(-2 * c * brownian_value(path, 1, mode, t) - 2 * c**2 * t)


def geometric_bm_series(path: NoisePath, c: float, mode: int = 0) -> np.ndarray:
    "h_c over the whole mesh."
    return np.exp(-2 * c * path.values(1)[:, mode] - 2 * c**2 * path.times)


def wave_source_spectrum(model: NoiseModel, path: NoisePath, step: int) -> np.ndarray:
    "Spectrum of −iΔW₂(step) = Σ φ_k^{(2)} Δβ_k^{(2)}."
    source = np.zeros(model.grid.shape, dtype=np.complex128)
    for mode, weight in zip(model.modes2, path.delta(2, step)):
        source += mode * weight

    return np.fft.fftn(source, norm="ortho")


def stochastic_convolution(model: NoiseModel, path: NoisePath, t: float) -> Field:
    """𝒯_t(W₂) = −i∫₀^t e^{i(t−s)|∇|} dW₂(s), left-point rule on the mesh."""
    _check_path(model, path)
    steps = path.step_of(t)
    grid = model.grid
    out = np.zeros(grid.shape, dtype=np.complex128)
    if not model.modes2:
        return Field(grid, out)

    for step in range(steps):
        lag = (steps - step) * path.dt
        out += np.exp(1j * lag * grid.kabs) * wave_source_spectrum(model, path, step)

    return Field(grid, out, "spectral").physical()


def convolution_increment(
    model: NoiseModel, path: NoisePath, sigma: float, t: float
) -> Field:
    "𝒯_{σ+t,σ}(W₂): the convolution of the noise increments after σ."
    return stochastic_convolution(model, path.restarted(sigma), t)


class ConvolutionTracker:
    """Running stochastic convolution, 𝒯_{t+dt} = e^{idt|∇|}(𝒯_t − iΔW₂(t)).

    :param start: mesh step the tracker starts from
    """

    def __init__(self, model: NoiseModel, path: NoisePath, start: int = 0):
        _check_path(model, path)
        self.model = model
        self.path = path
        self.step = start
        self._propagator = np.exp(1j * path.dt * model.grid.kabs)
        self._spectrum = stochastic_convolution(
            model, path, start * path.dt
        ).coefficients.copy()

    @property
    def value(self) -> Field:
        return Field(self.model.grid, self._spectrum, "spectral").physical()

    def advance(self) -> Field:
        if self.model.modes2:
            source = wave_source_spectrum(self.model, self.path, self.step)
            self._spectrum = self._propagator * (self._spectrum + source)

        self.step += 1
        return self.value


def lower_order_coeffs(
    model: NoiseModel, path: NoisePath, t: float
) -> Tuple[List[Field], Field]:
    """b = 2∇W₁ and c = Σ_j (∂_j W₁)² + ΔW₁ at time t."""
    return coefficients_at(model, path.beta(1, path.step_of(t)))


def coefficients_at(
    model: NoiseModel, beta: np.ndarray
) -> Tuple[List[Field], Field]:
    "b and c for W₁ = Σ i φ_k β_k with the given Brownian values."
    w1 = Field(model.grid, _combine(model.modes1, beta, model.grid))
    partials = gradient(w1)
    b = [2.0 * p for p in partials]
    c = Field(model.grid, sum(p.values**2 for p in partials) + laplacian(w1).values)
    return b, c


def lil_statistic(
    path: NoisePath,
    T: Optional[float] = None,
    mode: int = 0,
    t_min: float = math.e**math.e,
) -> float:
    """max over t_min < t ≤ T of β(t)/sqrt(2t log log t).

    :param t_min: lower cutoff (log log t ≥ 1 past e^e)
    """
    T = path.T if T is None else T
    times = path.times
    mask = (times > t_min) & (times <= T + _MESH_RTOL)
    if not mask.any():
        raise exceptions.InvalidPath(f"No mesh times in ({t_min}, {T}]")

    t = times[mask]
    beta = path.values(1)[mask, mode]
    return float(np.max(beta / np.sqrt(2 * t * np.log(np.log(t)))))
