#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# License: GPL

"""
Adapted function-space norms evaluated directly on space-time blocks.

Frequencies are measured in ladder units: spatial ones in κ = 2π/L, temporal
ones and the Schrödinger operator in κ², the half-wave operator in κ. With
L = 2π every unit is 1.
"""

import logging
import math
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, validator

from . import exceptions
from .constants import DEFAULT_K
from .spacetime import (
    SpaceTimeBlock,
    apply_spacetime_multiplier,
    modulation_project,
    temporal_project,
)
from .spectral import DyadicLadder, bessel_symbol, is_dyadic, lateral_phi

logger = logging.getLogger(__name__)

SCHRODINGER_REGIMES = ((1.0, 0.25), (0.5, 0.0))
WAVE_REGIMES = ((0.25, 0.5), (0.0, 0.0))
FAMILIES = ("S", "N", "Wwave", "X", "G", "D", "lateral")

Regime = Tuple[float, float]


def _regime(s: Union[float, Regime]) -> Regime:
    if isinstance(s, tuple):
        pair = (float(s[0]), float(s[1]))
    else:
        pair = next((r for r in SCHRODINGER_REGIMES if r[0] == float(s)), (s, None))

    if pair not in SCHRODINGER_REGIMES:
        raise exceptions.InvalidNormSpec(f"Unsupported (s, a) regime: {s}")

    return pair


def _wave_regime(pair: Regime) -> Regime:
    pair = (float(pair[0]), float(pair[1]))
    if pair not in WAVE_REGIMES:
        raise exceptions.InvalidNormSpec(f"Unsupported (α, β) regime: {pair}")

    return pair


def _ladder(block: SpaceTimeBlock, ladder: Optional[DyadicLadder]) -> DyadicLadder:
    return ladder or DyadicLadder.for_grid(block.grid)


def band(block: SpaceTimeBlock, lam: float, ladder: Optional[DyadicLadder] = None):
    "P_λ applied to every snapshot (λ = 1 is the inhomogeneous P_{≤1})."
    ladder = _ladder(block, ladder)
    ladder.check(lam, "P")
    return block.spatial_multiplier(
        ladder.profile(lam, "P", block.grid.kabs / ladder.unit)
    )


def _low_modulation(block, lam, ladder) -> SpaceTimeBlock:
    return modulation_project(block, (lam / ladder.K) ** 2, "le", ladder)


def _weighted_operator(
    block: SpaceTimeBlock,
    lam: float,
    a: float,
    ladder: DyadicLadder,
    schrodinger: bool = True,
) -> SpaceTimeBlock:
    "((λ+|∂_t|)/(λ²+|∂_t|))^a (i∂_t+Δ)u, or the bare weight for schrodinger=False."
    unit = ladder.unit**2

    def symbol(tau, grid):
        tau_units = np.abs(tau) / unit
        weight = ((lam + tau_units) / (lam**2 + tau_units)) ** a
        if not schrodinger:
            return weight

        return weight * (-(tau + grid.ksq) / unit)

    return apply_spacetime_multiplier(block, symbol)


def _schrodinger_l2(block: SpaceTimeBlock, ladder: DyadicLadder) -> float:
    unit = ladder.unit**2
    op = apply_spacetime_multiplier(block, lambda tau, grid: -(tau + grid.ksq) / unit)
    return op.mixed_norm(2, 2)


def s_norm(
    block: SpaceTimeBlock,
    lam: float,
    s: Union[float, Regime] = (1.0, 0.25),
    ladder: Optional[DyadicLadder] = None,
    project: bool = True,
) -> float:
    """‖P_λu‖_{S^{s,a}_λ} on the block window.

    S^{1,¼}: λ‖u‖_{L^∞L²} + λ‖C_{≤(λ/K)²}u‖_{L²L⁴}
    + ‖((λ+|∂_t|)/(λ²+|∂_t|))^{¼}(i∂_t+Δ)u‖_{L²}.

    S^{½,0}: λ^{½}‖u‖_{L^∞L²} + λ^{½}‖u‖_{L²L⁴} + λ^{−½}‖(i∂_t+Δ)u‖_{L²}.

    :raises exceptions.BlockTooShort
    :raises exceptions.InvalidProjector
    """
    s, a = _regime(s)
    ladder = _ladder(block, ladder)
    u = band(block, lam, ladder) if project else block

    if s == 1.0:
        return (
            lam * u.mixed_norm(np.inf, 2)
            + lam * _low_modulation(u, lam, ladder).mixed_norm(2, 4)
            + _weighted_operator(u, lam, a, ladder).mixed_norm(2, 2)
        )

    root = math.sqrt(lam)
    return (
        root * u.mixed_norm(np.inf, 2)
        + root * u.mixed_norm(2, 4)
        + _schrodinger_l2(u, ladder) / root
    )


def n_norm(
    block: SpaceTimeBlock,
    lam: float,
    s: Union[float, Regime] = (1.0, 0.25),
    ladder: Optional[DyadicLadder] = None,
    project: bool = True,
) -> float:
    """‖P_λF‖_{N^{s,a}_λ}.

    N^{1,¼}: λ‖C_{≤(λ/K)²}F‖_{L²L^{4/3}} + ‖((λ+|∂_t|)/(λ²+|∂_t|))^{¼}F‖_{L²}.

    N^{½,0}: λ^{½}‖C_{≤(λ/K)²}F‖_{L²L^{4/3}} + λ^{−½}‖F‖_{L²}.
    """
    s, a = _regime(s)
    ladder = _ladder(block, ladder)
    f = band(block, lam, ladder) if project else block
    low = _low_modulation(f, lam, ladder).mixed_norm(2, 4.0 / 3.0)

    if s == 1.0:
        weighted = _weighted_operator(f, lam, a, ladder, schrodinger=False)
        return lam * low + weighted.mixed_norm(2, 2)

    root = math.sqrt(lam)
    return root * low + f.mixed_norm(2, 2) / root


def wave_norm(
    block: SpaceTimeBlock,
    lam: float,
    pair: Regime = (0.25, 0.5),
    ladder: Optional[DyadicLadder] = None,
    project: bool = True,
) -> float:
    """‖P_λv‖_{W^{0,α,β}_λ}.

    W^{0,¼,½}: ‖v‖_{L^∞L²} + λ^{−¼}‖(λ+|∂_t|)^{¼}P^{(t)}_{≤(λ/K)²}v‖_{L^∞L²}
    + λ^{−½}‖(i∂_t+|∇|)v‖_{L²}.

    W^{0,0,0}: ‖v‖_{L^∞L²} + ‖P^{(t)}_{≤(λ/K)²}v‖_{L^∞L²}
    + λ^{−1}‖(i∂_t+|∇|)v‖_{L²}.
    """
    alpha, beta = _wave_regime(pair)
    ladder = _ladder(block, ladder)
    v = band(block, lam, ladder) if project else block
    low = temporal_project(v, (lam / ladder.K) ** 2, "le", ladder)
    unit = ladder.unit

    if alpha:
        weight_unit = unit**2
        low = apply_spacetime_multiplier(
            low, lambda tau, grid: (lam + np.abs(tau) / weight_unit) ** alpha
        )
        low_term = lam ** (-alpha) * low.mixed_norm(np.inf, 2)
    else:
        low_term = low.mixed_norm(np.inf, 2)

    op = apply_spacetime_multiplier(v, lambda tau, grid: (grid.kabs - tau) / unit)
    high_term = lam ** (beta - 1.0) * op.mixed_norm(2, 2)
    return v.mixed_norm(np.inf, 2) + low_term + high_term


def _assemble(values: List[float]) -> float:
    return float(math.sqrt(sum(v**2 for v in values)))


def s_total(block, s=(1.0, 0.25), ladder=None) -> float:
    "ℓ² sum of the dyadic pieces ‖P_λu‖_{S^{s,a}_λ}, λ = 1..top."
    ladder = _ladder(block, ladder)
    return _assemble([s_norm(block, lam, s, ladder) for lam in ladder.lambdas])


def n_total(block, s=(1.0, 0.25), ladder=None) -> float:
    ladder = _ladder(block, ladder)
    return _assemble([n_norm(block, lam, s, ladder) for lam in ladder.lambdas])


def y_total(block, pair=(0.25, 0.5), ladder=None) -> float:
    "𝕐 assembly of the wave component; the λ = 1 piece is P_{≤1}."
    ladder = _ladder(block, ladder)
    return _assemble([wave_norm(block, lam, pair, ladder) for lam in ladder.lambdas])


def lateral_norm(block: SpaceTimeBlock, axis: int, p: float, q: float) -> float:
    """‖f‖_{L^{p,q}_e}: outer ℓ^p over the e-axis of the L^q norm over time
    and the transverse hyperplane.

    :raises exceptions.InvalidNormSpec: axis outside the grid
    """
    grid = block.grid
    if not 0 <= axis < grid.d:
        raise exceptions.InvalidNormSpec(f"Axis {axis} outside 0..{grid.d - 1}")

    if p < 1 or q < 1:
        raise exceptions.InvalidNormSpec(f"Exponents must be >= 1: p={p}, q={q}")

    values = np.moveaxis(np.abs(block.data), axis + 1, 0)
    values = values.reshape(grid.n, -1)
    transverse = block.dt * grid.spacing ** (grid.d - 1)
    if np.isinf(q):
        inner = values.max(axis=1)
    else:
        inner = (transverse * np.sum(values**q, axis=1)) ** (1.0 / q)

    if np.isinf(p):
        return float(inner.max())

    return float((grid.spacing * np.sum(inner**p)) ** (1.0 / p))


def _lateral_band(block, lam, axis, ladder) -> SpaceTimeBlock:
    component = np.broadcast_to(block.grid.wavenumbers[axis], block.grid.shape)
    return block.spatial_multiplier(lateral_phi(component / (ladder.unit * lam)))


def x_norm(
    block: SpaceTimeBlock, s: Union[float, Regime] = 1.0, ladder=None
) -> float:
    """𝕏^s assembly: S^{s,a}_λ plus, for λ > 1, the lateral pieces
    Σ_j λ^{s+½}‖P_{λ,e_j}C_{≤(λ/K)²}P_λu‖_{L^{∞,2}_{e_j}}.
    """
    s, a = _regime(s)
    ladder = _ladder(block, ladder)
    pieces = []
    for lam in ladder.lambdas:
        u = band(block, lam, ladder)
        value = s_norm(u, lam, (s, a), ladder, project=False)
        if lam > 1:
            low = _low_modulation(u, lam, ladder)
            value += lam ** (s + 0.5) * sum(
                lateral_norm(_lateral_band(low, lam, axis, ladder), axis, np.inf, 2)
                for axis in range(block.grid.d)
            )
        pieces.append(value)

    return _assemble(pieces)


def _g_functional(
    first: SpaceTimeBlock, second: SpaceTimeBlock, s, ladder: DyadicLadder
) -> float:
    "Σ_{λ≥2}‖P_λF₁‖²_{N_λ} + Σ_jΣ_{λ≥2} λ^{2s−1}‖P_λF₂‖²_{L^{1,2}_{e_j}}."
    total = 0.0
    weight = 2 * s[0] - 1
    for lam in ladder.lambdas[1:]:
        total += n_norm(first, lam, s, ladder) ** 2
        f2 = band(second, lam, ladder)
        if np.any(f2.data):
            total += lam**weight * sum(
                lateral_norm(f2, axis, 1, 2) ** 2 for axis in range(second.grid.d)
            )

    return total


def _angular_part(block, axis, ladder) -> SpaceTimeBlock:
    "Σ_{λ≥2} P_{λ,e_j}∏_{l<j}(1 − P_{λ,e_l})P_λF."
    grid = block.grid
    symbol = np.zeros(grid.shape)
    for lam in ladder.lambdas[1:]:
        profile = ladder.profile(lam, "P", grid.kabs / ladder.unit)
        for other in range(axis + 1):
            component = np.broadcast_to(grid.wavenumbers[other], grid.shape)
            phi = lateral_phi(component / (ladder.unit * lam))
            profile = profile * (phi if other == axis else 1.0 - phi)
        symbol = symbol + profile

    return block.spatial_multiplier(symbol)


def _high_modulation(block, ladder) -> SpaceTimeBlock:
    out = block.like(np.zeros_like(block.data))
    for lam in ladder.lambdas[1:]:
        f = band(block, lam, ladder)
        out = out + modulation_project(f, (lam / ladder.K) ** 2, "gt", ladder)

    return out


def g_candidates(
    block: SpaceTimeBlock, s: Union[float, Regime] = 1.0, ladder=None
) -> Dict[str, float]:
    """The 𝔾^s functional for each decomposition F = F₁ + F₂ in the family:
    F₂ = 0, F₂ = F, F₂ = the high-modulation part and F₂ = the angular piece
    of every axis.
    """
    s = _regime(s)
    ladder = _ladder(block, ladder)
    base = n_norm(block, 1, s, ladder) ** 2
    zero = block.like(np.zeros_like(block.data))

    seconds = {
        "zero": zero,
        "all": block,
        "high_modulation": _high_modulation(block, ladder),
    }
    for axis in range(block.grid.d):
        seconds[f"angular_{axis}"] = _angular_part(block, axis, ladder)

    out = {}
    for name, second in seconds.items():
        out[name] = math.sqrt(base + _g_functional(block - second, second, s, ladder))
        logger.debug("𝔾 candidate %s: %.6g", name, out[name])

    return out


def g_norm_upper(
    block: SpaceTimeBlock, s: Union[float, Regime] = 1.0, ladder=None
) -> float:
    "Upper bound of ‖F‖_{𝔾^s}: the minimum over g_candidates."
    return min(g_candidates(block, s, ladder).values())


def d_norm(block: SpaceTimeBlock) -> float:
    "‖u‖_{L²_t W^{½,4}_x} (physical ⟨∇⟩)."
    symbol = bessel_symbol(0.5)(*block.grid.wavenumbers)
    return block.spatial_multiplier(symbol).mixed_norm(2, 4)


class NormSpec(BaseModel):
    family: str
    s: float = 1.0
    a: Optional[float] = None
    alpha: float = 0.25
    beta: Optional[float] = None
    lambdas: Optional[List[int]] = None
    K: int = DEFAULT_K
    axis: int = 0
    p: float = 2.0
    q: float = 2.0

    @validator("family")
    @classmethod
    def validate_family(cls, val):
        if val not in FAMILIES:
            raise exceptions.InvalidNormSpec(f"Unknown family: {val} {FAMILIES}")

        return val

    @validator("a", always=True)
    @classmethod
    def validate_regime(cls, val, values):
        s = values.get("s", 1.0)
        return _regime(s if val is None else (s, val))[1]

    @validator("beta", always=True)
    @classmethod
    def validate_wave_regime(cls, val, values):
        alpha = values.get("alpha", 0.25)
        if val is None:
            val = dict(WAVE_REGIMES).get(alpha, -1.0)

        return _wave_regime((alpha, val))[1]

    @validator("K")
    @classmethod
    def validate_k(cls, val):
        if not is_dyadic(val) or val < 2:
            raise exceptions.InvalidNormSpec(f"K must be a power of two >= 2: {val}")

        return val

    @validator("lambdas")
    @classmethod
    def validate_lambdas(cls, val):
        if val is not None and not all(is_dyadic(lam) and lam >= 1 for lam in val):
            raise exceptions.InvalidNormSpec(f"λ-range must be dyadic: {val}")

        return val

    @validator("p", "q")
    @classmethod
    def validate_exponent(cls, val):
        if val < 1:
            raise exceptions.InvalidNormSpec(f"Exponents must be >= 1: {val}")

        return val

    @property
    def regime(self) -> Regime:
        return (self.s, self.a)

    def ladder_for(self, block: SpaceTimeBlock) -> DyadicLadder:
        ladder = DyadicLadder.for_grid(block.grid, self.K)
        for lam in self.lambdas or []:
            try:
                ladder.check(lam)
            except exceptions.InvalidProjector as error:
                raise exceptions.InvalidNormSpec(str(error)) from None

        return ladder


_PER_BAND: Dict[str, Callable] = {
    "S": lambda spec, block, lam, ladder: s_norm(block, lam, spec.regime, ladder),
    "N": lambda spec, block, lam, ladder: n_norm(block, lam, spec.regime, ladder),
    "Wwave": lambda spec, block, lam, ladder: wave_norm(
        block, lam, (spec.alpha, spec.beta), ladder
    ),
}


def evaluate(spec: NormSpec, block: SpaceTimeBlock) -> List[dict]:
    """Rows {family, lambda, value}; per-band families end with a "total" row.

    :raises exceptions.InvalidNormSpec
    """
    ladder = spec.ladder_for(block)
    if spec.family in _PER_BAND:
        lambdas = spec.lambdas or ladder.lambdas
        values = [_PER_BAND[spec.family](spec, block, lam, ladder) for lam in lambdas]
        rows = [
            {"family": spec.family, "lambda": lam, "value": value}
            for lam, value in zip(lambdas, values)
        ]
        total = _assemble(values)
        rows.append({"family": spec.family, "lambda": "total", "value": total})
        return rows

    if spec.family == "X":
        value = x_norm(block, spec.regime, ladder)
    elif spec.family == "G":
        value = g_norm_upper(block, spec.regime, ladder)
    elif spec.family == "D":
        value = d_norm(block)
    else:
        value = lateral_norm(block, spec.axis, spec.p, spec.q)

    return [{"family": spec.family, "lambda": "total", "value": value}]
