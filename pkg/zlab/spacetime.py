#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# License: GPL

import logging
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid

from . import exceptions
from .constants import TAPER_FRACTION
from .grid import Field, Grid
from .spectral import DyadicLadder, smooth_step

logger = logging.getLogger(__name__)

_MIN_TEMPORAL_SAMPLES = 4


class SpaceTimeBlock:
    """A field sampled on the uniform time mesh t0 + k·dt, k = 0..M-1.

    Non-periodic blocks are zero padded by one block length before any
    temporal Fourier transform. `windowed` marks blocks that already carry
    the time taper.
    """

    def __init__(
        self,
        grid: Grid,
        data,
        dt: float,
        t0: float = 0.0,
        periodic: bool = False,
        windowed: bool = False,
    ):
        data = np.asarray(data, dtype=np.complex128)
        if data.ndim != grid.d + 1 or data.shape[1:] != grid.shape:
            raise exceptions.GridMismatch(
                f"Block shape {data.shape} does not match {grid}"
            )

        if not dt > 0:
            raise exceptions.BlockTooShort(f"Time step must be positive: {dt}")

        self.grid = grid
        self.data = data
        self.dt = float(dt)
        self.t0 = float(t0)
        self.periodic = periodic
        self.windowed = windowed

    def __repr__(self):
        return (
            f"<SpaceTimeBlock M={self.samples} dt={self.dt:.4g} "
            f"periodic={self.periodic} on {self.grid}>"
        )

    @classmethod
    def from_fields(
        cls, fields: Sequence[Field], dt: float, t0: float = 0.0, periodic=False
    ) -> "SpaceTimeBlock":
        if not fields:
            raise exceptions.BlockTooShort("No snapshots given")

        grid = fields[0].grid
        return cls(grid, np.stack([f.values for f in fields]), dt, t0, periodic)

    @classmethod
    def free_flow(
        cls,
        field: Field,
        dt: float,
        samples: int,
        kind: str = "schrodinger",
        t0: float = 0.0,
        periodic: bool = False,
    ) -> "SpaceTimeBlock":
        """Sample e^{itΔ}f (kind="schrodinger") or e^{it|∇|}f (kind="wave").

        :param samples: number of snapshots
        """
        grid = field.grid
        times = t0 + dt * np.arange(samples)
        if kind == "schrodinger":
            phase = -np.multiply.outer(times, grid.ksq)
        elif kind == "wave":
            phase = np.multiply.outer(times, grid.kabs)
        else:
            raise ValueError(f"Unknown flow: {kind}")

        axes = tuple(range(1, grid.d + 1))
        spectra = np.exp(1j * phase) * field.coefficients
        data = np.fft.ifftn(spectra, axes=axes, norm="ortho")
        return cls(grid, data, dt, t0, periodic)

    @property
    def samples(self) -> int:
        return self.data.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.samples)

    @property
    def duration(self) -> float:
        return self.samples * self.dt

    @property
    def spatial_axes(self) -> Tuple[int, ...]:
        return tuple(range(1, self.grid.d + 1))

    def snapshot(self, k: int) -> Field:
        return Field(self.grid, self.data[k])

    def snapshots(self) -> List[Field]:
        return [self.snapshot(k) for k in range(self.samples)]

    def like(self, data) -> "SpaceTimeBlock":
        return SpaceTimeBlock(
            self.grid, data, self.dt, self.t0, self.periodic, self.windowed
        )

    def restrict(self, start: int, stop: int) -> "SpaceTimeBlock":
        "Sub-window of snapshots start..stop-1."
        if not 0 <= start < stop <= self.samples:
            raise exceptions.BlockTooShort(f"Invalid window [{start}, {stop})")

        return SpaceTimeBlock(
            self.grid, self.data[start:stop], self.dt, self.t0 + start * self.dt
        )

    def extend_zero(self, before: int = 0, after: int = 0) -> "SpaceTimeBlock":
        pad = [(before, after)] + [(0, 0)] * self.grid.d
        return SpaceTimeBlock(
            self.grid, np.pad(self.data, pad), self.dt, self.t0 - before * self.dt
        )

    def taper_window(self, fraction: float = TAPER_FRACTION) -> np.ndarray:
        "Flat-top window with mollified ramps over the first/last fraction."
        position = (np.arange(self.samples) + 0.5) / self.samples
        ramp = max(fraction, 1e-12)
        distance = np.minimum(position, 1.0 - position)
        return 1.0 - smooth_step(distance, 0.0, ramp)

    def tapered(self, fraction: float = TAPER_FRACTION) -> "SpaceTimeBlock":
        window = self.taper_window(fraction)
        shape = (self.samples,) + (1,) * self.grid.d
        data = self.data * window.reshape(shape)
        return SpaceTimeBlock(self.grid, data, self.dt, self.t0, windowed=True)

    def spatial_multiplier(self, symbol: np.ndarray) -> "SpaceTimeBlock":
        "Apply a spatial Fourier multiplier to every snapshot."
        axes = self.spatial_axes
        spectra = np.fft.fftn(self.data, axes=axes, norm="ortho") * symbol
        return self.like(np.fft.ifftn(spectra, axes=axes, norm="ortho"))

    def map_snapshots(self, func: Callable[[Field], Field]) -> "SpaceTimeBlock":
        return self.like(np.stack([func(f).values for f in self.snapshots()]))

    def _check(self, other: "SpaceTimeBlock"):
        if other.grid != self.grid or other.data.shape != self.data.shape:
            raise exceptions.GridMismatch("Blocks live on different meshes")

    def __add__(self, other: "SpaceTimeBlock") -> "SpaceTimeBlock":
        self._check(other)
        return self.like(self.data + other.data)

    def __sub__(self, other: "SpaceTimeBlock") -> "SpaceTimeBlock":
        self._check(other)
        return self.like(self.data - other.data)

    def __mul__(self, other) -> "SpaceTimeBlock":
        if isinstance(other, SpaceTimeBlock):
            self._check(other)
            return self.like(self.data * other.data)

        if np.ndim(other) == 1:
            shape = (self.samples,) + (1,) * self.grid.d
            return self.like(self.data * np.reshape(other, shape))

        return self.like(self.data * other)

    __rmul__ = __mul__

    def conj(self) -> "SpaceTimeBlock":
        return self.like(np.conj(self.data))

    def real(self) -> "SpaceTimeBlock":
        return self.like(self.data.real.astype(np.complex128))

    # Direct (window) evaluations

    def lp_snapshots(self, q: float) -> np.ndarray:
        "‖u(t_k)‖_{L^q_x} for every snapshot."
        values = np.abs(self.data).reshape(self.samples, -1)
        if np.isinf(q):
            return values.max(axis=1)

        return (self.grid.cell * np.sum(values**q, axis=1)) ** (1.0 / q)

    def mixed_norm(self, r: float, q: float) -> float:
        "‖u‖_{L^r_t L^q_x} over the window."
        inner = self.lp_snapshots(q)
        if np.isinf(r):
            return float(inner.max())

        return float((self.dt * np.sum(inner**r)) ** (1.0 / r))


def _padded_length(block: SpaceTimeBlock) -> int:
    return block.samples if block.periodic else 2 * block.samples


def temporal_frequencies(block: SpaceTimeBlock) -> np.ndarray:
    "Angular temporal frequencies τ of the (padded) transform."
    return 2 * np.pi * np.fft.fftfreq(_padded_length(block), d=block.dt)


def to_spacetime(block: SpaceTimeBlock) -> np.ndarray:
    "Space-time spectrum (spatial and temporal unitary DFT, zero padded)."
    spectra = np.fft.fftn(block.data, axes=block.spatial_axes, norm="ortho")
    return np.fft.fft(spectra, n=_padded_length(block), axis=0, norm="ortho")


def from_spacetime(spectrum: np.ndarray, block: SpaceTimeBlock) -> SpaceTimeBlock:
    "Inverse of to_spacetime, cropped back to the block window."
    data = np.fft.ifft(spectrum, axis=0, norm="ortho")[: block.samples]
    return block.like(np.fft.ifftn(data, axes=block.spatial_axes, norm="ortho"))


def apply_spacetime_multiplier(
    block: SpaceTimeBlock, symbol: Callable[[np.ndarray, Grid], np.ndarray]
) -> SpaceTimeBlock:
    """Multiply the space-time spectrum by symbol(τ, grid).

    :param symbol: callable receiving τ shaped (M', 1, ..., 1) and the grid,
        returning an array broadcastable to the space-time spectrum
    """
    if block.samples < _MIN_TEMPORAL_SAMPLES:
        raise exceptions.BlockTooShort(
            f"Temporal operators need >= {_MIN_TEMPORAL_SAMPLES} samples, "
            f"found {block.samples}"
        )

    tau = temporal_frequencies(block).reshape((-1,) + (1,) * block.grid.d)
    return from_spacetime(to_spacetime(block) * symbol(tau, block.grid), block)


def modulation_project(
    block: SpaceTimeBlock,
    lam: float,
    kind: str = "C",
    ladder: Optional[DyadicLadder] = None,
) -> SpaceTimeBlock:
    """C_λ, C_{≤λ} or C_{>λ}: localize the distance |τ + |ξ|²| to the
    paraboloid, measured in units of κ².
    """
    ladder = ladder or DyadicLadder.for_grid(block.grid)
    ladder.check(lam, "le", bounded=False)
    kind = "P" if kind == "C" else kind
    unit = ladder.unit**2

    def symbol(tau, grid):
        distance = np.abs(tau + grid.ksq) / unit
        return ladder.profile(lam, kind, distance, inhomogeneous=False)

    return apply_spacetime_multiplier(block, symbol)


def temporal_project(
    block: SpaceTimeBlock,
    lam: float,
    kind: str = "P",
    ladder: Optional[DyadicLadder] = None,
) -> SpaceTimeBlock:
    "P^{(t)}_λ, P^{(t)}_{≤λ} or P^{(t)}_{>λ} on |τ| (units of κ²)."
    ladder = ladder or DyadicLadder.for_grid(block.grid)
    ladder.check(lam, "le", bounded=False)
    kind = "P" if kind == "C" else kind
    unit = ladder.unit**2

    def symbol(tau, grid):
        return ladder.profile(lam, kind, np.abs(tau) / unit, inhomogeneous=False)

    return apply_spacetime_multiplier(block, symbol)


def schrodinger_operator(block: SpaceTimeBlock) -> SpaceTimeBlock:
    "(i∂_t + Δ)u via the symbol −(τ + |ξ|²)."
    return apply_spacetime_multiplier(block, lambda tau, grid: -(tau + grid.ksq))


def wave_operator(block: SpaceTimeBlock) -> SpaceTimeBlock:
    "(i∂_t + |∇|)v via the symbol |ξ| − τ."
    return apply_spacetime_multiplier(block, lambda tau, grid: grid.kabs - tau)


def _duhamel(block: SpaceTimeBlock, dispersion: np.ndarray) -> SpaceTimeBlock:
    axes = block.spatial_axes
    shape = (block.samples,) + (1,) * block.grid.d
    elapsed = (block.times - block.t0).reshape(shape)
    spectra = np.fft.fftn(block.data, axes=axes, norm="ortho")
    interaction = np.exp(-1j * elapsed * dispersion) * spectra
    integral = cumulative_trapezoid(interaction, dx=block.dt, axis=0, initial=0.0)
    out = -1j * np.exp(1j * elapsed * dispersion) * integral
    return block.like(np.fft.ifftn(out, axes=axes, norm="ortho"))


def duhamel_schrodinger(block: SpaceTimeBlock) -> SpaceTimeBlock:
    "I₀[g](t) = −i∫_{t0}^t e^{i(t−s)Δ} g(s) ds (trapezoid rule)."
    return _duhamel(block, -block.grid.ksq)


def duhamel_wave(block: SpaceTimeBlock) -> SpaceTimeBlock:
    "J₀[h](t) = −i∫_{t0}^t e^{i(t−s)|∇|} h(s) ds (trapezoid rule)."
    return _duhamel(block, block.grid.kabs)


def save_block(block: SpaceTimeBlock, path: str):
    np.savez(
        path,
        data=block.data,
        dt=block.dt,
        t0=block.t0,
        periodic=block.periodic,
        windowed=block.windowed,
        d=block.grid.d,
        n=block.grid.n,
        L=block.grid.L,
    )
    logger.debug("Saved %s: %s", block, path)


def load_block(path: str) -> SpaceTimeBlock:
    """
    :raises exceptions.InvalidFieldFile
    """
    try:
        with np.load(path) as content:
            grid = Grid(int(content["d"]), int(content["n"]), float(content["L"]))
            return SpaceTimeBlock(
                grid,
                content["data"],
                float(content["dt"]),
                float(content["t0"]),
                bool(content["periodic"]),
                "windowed" in content.files and bool(content["windowed"]),
            )
    except (OSError, KeyError, ValueError) as error:
        raise exceptions.InvalidFieldFile(f"Unreadable block file: {error}") from None
