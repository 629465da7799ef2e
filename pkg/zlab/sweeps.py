#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# License: GPL

"""
Empirical constants of the linear, bilinear and trilinear estimates: the
observed ratio left/right over randomized band-limited inputs.
"""

import logging
import math
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import exceptions
from .constants import DEFAULT_K
from .grid import Field, Grid
from .groundstate import threshold_norm
from .norms import (
    d_norm,
    lateral_norm,
    n_norm,
    n_total,
    s_norm,
    s_total,
    y_total,
)
from .spacetime import SpaceTimeBlock, duhamel_wave
from .spectral import (
    DyadicLadder,
    bessel_symbol,
    lateral_project,
    lp_project,
    schrodinger_propagate,
)
from .variation import (
    SampledPath,
    besov_time_norm,
    brownian_path,
    gbm_from_brownian,
    l6_norm,
)

logger = logging.getLogger(__name__)

ESTIMATES = (
    "linear_schrodinger",
    "linear_wave",
    "profile_control",
    "bilinear_vu",
    "bilinear_vu_endpoint",
    "bilinear_wave_endpoint",
    "trilinear",
    "uniform",
    "local_smoothing",
    "norm_chain",
    "norm_chain_upper",
    "bernstein_n",
)

_ENDPOINT = (0.5, 0.0)
_ENERGY = (1.0, 0.25)


class SweepContext:
    """Grid, time mesh and RNG keys shared by the estimates of one sweep.

    :param window: duration of every space-time block
    :param steps: snapshots per block
    """

    def __init__(
        self,
        grid: Grid,
        window: float = 4.0,
        steps: int = 32,
        K: int = DEFAULT_K,
        seed: int = 0,
        c: float = 1.0,
        bound: float = 0.5,
        constant_h: bool = False,
    ):
        if steps < 4:
            raise exceptions.BlockTooShort(f"Sweeps need >= 4 snapshots: {steps}")

        if not 0 < bound < 1:
            raise exceptions.InvalidConfig(f"Bound must lie in (0, 1): {bound}")

        self.grid = grid
        self.ladder = DyadicLadder.for_grid(grid, K)
        self.window = float(window)
        self.steps = int(steps)
        self.seed = int(seed)
        self.c = float(c)
        self.bound = float(bound)
        self.constant_h = constant_h

    def __repr__(self):
        return f"<SweepContext {self.grid} window={self.window} steps={self.steps}>"

    @property
    def dt(self) -> float:
        return self.window / self.steps

    def rng(self, estimate: str, sample: int) -> np.random.Generator:
        stream = ESTIMATES.index(estimate) << 32 | sample
        return np.random.Generator(np.random.Philox(key=self.seed | stream << 64))

    def random_field(self, rng, lam: Optional[int] = None) -> Field:
        "Complex Gaussian data, P_λ-localized when λ is given, unit L² norm."
        shape = self.grid.shape
        noise = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        field = Field(self.grid, noise)
        if lam is not None:
            field = lp_project(field, lam, "P", self.ladder)
        else:
            # H^1-like decay so every band contributes
            field = Field(
                self.grid, field.coefficients / (1.0 + self.grid.ksq), "spectral"
            ).physical()

        return field * (1.0 / max(field.l2_norm(), 1e-300))

    def free_block(self, field: Field, kind: str = "schrodinger") -> SpaceTimeBlock:
        return SpaceTimeBlock.free_flow(field, self.dt, self.steps, kind).tapered()


def w14_norm(block: SpaceTimeBlock) -> float:
    "‖v‖_{L²_t W^{1,4}_x}."
    symbol = bessel_symbol(1.0)(*block.grid.wavenumbers)
    return block.spatial_multiplier(symbol).mixed_norm(2, 4)


def _ratio(left: float, right: float) -> float:
    return left / right if right > 0 else 0.0


def h_factor(h: SampledPath) -> float:
    "‖h‖_{L⁶} + ‖h‖_{B^{1/8}_{6,∞}}."
    return l6_norm(h) + besov_time_norm(h)


def bilinear_wave_ratio(phi: SpaceTimeBlock, psi: SpaceTimeBlock, ladder) -> float:
    "‖J₀|∇|(φ̄ψ)‖_{𝕐} / (‖φ‖_{S^{1,¼}}‖ψ‖_{S^{1,¼}})."
    product = (phi.conj() * psi).spatial_multiplier(phi.grid.kabs)
    left = y_total(duhamel_wave(product), (0.25, 0.5), ladder)
    right = s_total(phi, _ENERGY, ladder) * s_total(psi, _ENERGY, ladder)
    return _ratio(left, right)


def trilinear_ratio(
    phi: SpaceTimeBlock, psi: SpaceTimeBlock, h: SampledPath, ladder
) -> float:
    "‖J₀(h|∇|(φ̄ψ))‖_{𝕐} / ((‖h‖_{L⁶} + ‖h‖_{B^{1/8}_{6,∞}})‖φ‖‖ψ‖)."
    product = (phi.conj() * psi).spatial_multiplier(phi.grid.kabs) * h.values
    left = y_total(duhamel_wave(product), (0.25, 0.5), ladder)
    right = s_total(phi, _ENERGY, ladder) * s_total(psi, _ENERGY, ladder)
    return _ratio(left, right * h_factor(h))


def potential_flow(
    u0: Field, v0: Field, dt: float, steps: int, substeps: int = 4
) -> SpaceTimeBlock:
    """i∂_t u + Δu = Re(e^{it|∇|}v₀)u by Strang splitting, sampled every dt."""
    grid = u0.grid
    h = dt / substeps
    wave_spectrum = v0.coefficients
    snapshots = [u0]
    u = u0
    for k in range(1, steps):
        for j in range(substeps):
            t_mid = (k - 1) * dt + (j + 0.5) * h
            potential = Field(
                grid, wave_spectrum * np.exp(1j * t_mid * grid.kabs), "spectral"
            ).values.real
            u = schrodinger_propagate(u, 0.5 * h)
            u = Field(grid, np.exp(-1j * h * potential) * u.values)
            u = schrodinger_propagate(u, 0.5 * h)
        snapshots.append(u)

    return SpaceTimeBlock.from_fields(snapshots, dt)


def _linear_schrodinger(ctx: SweepContext, sample: int) -> List[float]:
    rng = ctx.rng("linear_schrodinger", sample)
    ratios = []
    for lam in ctx.ladder.lambdas:
        f = ctx.random_field(rng, lam)
        if f.l2_norm() == 0:
            continue

        block = ctx.free_block(f)
        ratios.append(s_norm(block, lam, _ENERGY, ctx.ladder) / (lam * f.l2_norm()))

    return ratios


def _linear_wave(ctx: SweepContext, sample: int) -> List[float]:
    g = ctx.random_field(ctx.rng("linear_wave", sample))
    return [y_total(ctx.free_block(g, "wave"), (0.25, 0.5), ctx.ladder) / g.l2_norm()]


def profile_control_series(
    d: int = 4,
    n: int = 8,
    levels: int = 4,
    width: float = 1.0 / 6.0,
    samples: int = 8,
    L0: float = 1.0,
) -> Dict[str, list]:
    """‖e^{itΔ}u₀‖_{D(I)}/‖u₀‖_{H¹} for windows |I| shrinking with the data.

    Level j uses the box L0·2^{−j}, a Gaussian of width width·L0·2^{−j} and
    the window |I| = (width·L0)²·4^{−j}.
    """
    windows, ratios = [], []
    for j in range(levels):
        L = L0 * 2.0**-j
        grid = Grid(d, n, L)
        sigma = width * L
        u0 = Field(grid, np.exp(-grid.radius**2 / (2 * sigma**2)))
        u0 = u0 * (1.0 / u0.h1_norm())
        window = sigma**2
        block = SpaceTimeBlock.free_flow(u0, window / samples, samples)
        windows.append(window)
        ratios.append(d_norm(block))

    return {"windows": windows, "ratios": ratios}


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def _profile_control(ctx: SweepContext, sample: int) -> List[float]:
    rng = ctx.rng("profile_control", sample)
    series = profile_control_series(d=4, n=8, width=rng.uniform(0.12, 0.2))
    return [
        ratio / window**0.25
        for window, ratio in zip(series["windows"], series["ratios"])
    ]


def _pair(ctx: SweepContext, estimate: str, sample: int):
    rng = ctx.rng(estimate, sample)
    u = ctx.free_block(ctx.random_field(rng))
    v = ctx.free_block(ctx.random_field(rng), "wave")
    return rng, u, v


def _bilinear_vu(ctx: SweepContext, sample: int) -> List[float]:
    _, u, v = _pair(ctx, "bilinear_vu", sample)
    left = n_total(v.real() * u, _ENERGY, ctx.ladder)
    wave = min(y_total(v, (0.25, 0.5), ctx.ladder), w14_norm(v))
    return [_ratio(left, wave * s_total(u, _ENERGY, ctx.ladder))]


def _bilinear_vu_endpoint(ctx: SweepContext, sample: int) -> List[float]:
    _, u, v = _pair(ctx, "bilinear_vu_endpoint", sample)
    left = n_total(v.real() * u, _ENDPOINT, ctx.ladder)
    right = y_total(v, (0.0, 0.0), ctx.ladder) * math.sqrt(
        d_norm(u) * s_total(u, _ENDPOINT, ctx.ladder)
    )
    return [_ratio(left, right)]


def _bilinear_wave_endpoint(ctx: SweepContext, sample: int) -> List[float]:
    rng = ctx.rng("bilinear_wave_endpoint", sample)
    u = ctx.free_block(ctx.random_field(rng))
    w = ctx.free_block(ctx.random_field(rng))
    product = (u * w).spatial_multiplier(ctx.grid.kabs)
    left = y_total(duhamel_wave(product), (0.0, 0.0), ctx.ladder)
    right = math.sqrt(d_norm(u) * d_norm(w)) * math.sqrt(
        s_total(u, _ENDPOINT, ctx.ladder) * s_total(w, _ENDPOINT, ctx.ladder)
    )
    return [_ratio(left, right)]


def sample_h(ctx: SweepContext, sample: int, times: np.ndarray) -> SampledPath:
    "h_c along the block times, or h ≡ 1."
    elapsed = times - times[0]
    if ctx.constant_h:
        return SampledPath(elapsed, np.ones_like(elapsed))

    beta = brownian_path(ctx.seed, ctx.dt, ctx.steps - 1, index=sample)
    return gbm_from_brownian(beta, ctx.c)


def _trilinear(ctx: SweepContext, sample: int) -> List[float]:
    rng = ctx.rng("trilinear", sample)
    phi = ctx.free_block(ctx.random_field(rng))
    psi = ctx.free_block(ctx.random_field(rng))
    h = sample_h(ctx, sample, phi.times)
    return [trilinear_ratio(phi, psi, h, ctx.ladder)]


def _uniform(ctx: SweepContext, sample: int) -> List[float]:
    rng = ctx.rng("uniform", sample)
    u0 = ctx.random_field(rng)
    v0 = ctx.random_field(rng).real()
    v0 = v0 * (ctx.bound * threshold_norm() / max(v0.l2_norm(), 1e-300))
    block = potential_flow(u0, v0, ctx.dt, ctx.steps).tapered()
    return [s_total(block, _ENDPOINT, ctx.ladder) / u0.hs_norm(0.5)]


def _local_smoothing(ctx: SweepContext, sample: int) -> List[float]:
    rng = ctx.rng("local_smoothing", sample)
    ratios = []
    for mu in ctx.ladder.lambdas[1:]:
        f = ctx.random_field(rng)
        localized = lateral_project(f, mu, 0, ctx.ladder)
        block = SpaceTimeBlock.free_flow(localized, ctx.dt, ctx.steps)
        ratios.append(lateral_norm(block, 0, np.inf, 2) * math.sqrt(mu) / f.l2_norm())

    return ratios


def _norm_chain(ctx: SweepContext, sample: int) -> List[float]:
    u = ctx.free_block(ctx.random_field(ctx.rng("norm_chain", sample)))
    return [_ratio(d_norm(u), s_total(u, _ENDPOINT, ctx.ladder))]


def _norm_chain_upper(ctx: SweepContext, sample: int) -> List[float]:
    u = ctx.free_block(ctx.random_field(ctx.rng("norm_chain_upper", sample)))
    return [
        _ratio(s_total(u, _ENDPOINT, ctx.ladder), s_total(u, _ENERGY, ctx.ladder))
    ]


def _bernstein_n(ctx: SweepContext, sample: int) -> List[float]:
    rng = ctx.rng("bernstein_n", sample)
    ratios = []
    for lam in ctx.ladder.lambdas:
        g = ctx.free_block(ctx.random_field(rng, lam))
        forcing = g * rng.standard_normal(ctx.steps)
        right = lam * forcing.mixed_norm(2, 4.0 / 3.0)
        ratios.append(_ratio(n_norm(forcing, lam, _ENERGY, ctx.ladder), right))

    return ratios


_ESTIMATORS: Dict[str, Callable[[SweepContext, int], List[float]]] = {
    "linear_schrodinger": _linear_schrodinger,
    "linear_wave": _linear_wave,
    "profile_control": _profile_control,
    "bilinear_vu": _bilinear_vu,
    "bilinear_vu_endpoint": _bilinear_vu_endpoint,
    "bilinear_wave_endpoint": _bilinear_wave_endpoint,
    "trilinear": _trilinear,
    "uniform": _uniform,
    "local_smoothing": _local_smoothing,
    "norm_chain": _norm_chain,
    "norm_chain_upper": _norm_chain_upper,
    "bernstein_n": _bernstein_n,
}


def sweep_ratios(ctx: SweepContext, estimate: str, samples: int) -> List[float]:
    """Observed ratios left/right of one estimate over the sample.

    :raises exceptions.InvalidConfig: unknown estimate
    """
    try:
        estimator = _ESTIMATORS[estimate]
    except KeyError:
        raise exceptions.InvalidConfig(
            f"Unknown estimate: {estimate} {ESTIMATES}"
        ) from None

    ratios = []
    for sample in range(samples):
        ratios.extend(estimator(ctx, sample))

    return ratios


def estimate_row(ctx: SweepContext, estimate: str, samples: int) -> dict:
    ratios = np.asarray(sweep_ratios(ctx, estimate, samples))
    row = {
        "estimate": estimate,
        "samples": samples,
        "max": float(ratios.max()) if ratios.size else 0.0,
        "median": float(np.median(ratios)) if ratios.size else 0.0,
        "slope": None,
    }
    if estimate == "profile_control":
        series = profile_control_series()
        row["slope"] = loglog_slope(series["windows"], series["ratios"])

    logger.info(
        "Estimate %s: max %.4g, median %.4g", estimate, row["max"], row["median"]
    )
    return row


def estimate_constant_sweep(
    ctx: SweepContext, estimates: Sequence[str] = ESTIMATES, samples: int = 8
) -> List[dict]:
    "One row per estimate: estimate, samples, max, median and the fitted slope."
    return [estimate_row(ctx, estimate, samples) for estimate in estimates]

