#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# License: GPL

"""
Fourier multipliers, exact linear propagators and the Littlewood-Paley,
lateral and paraproduct machinery on periodic grids.

Dyadic frequencies are measured in units of the fundamental wavenumber
κ = 2π/L of the grid.
"""

import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid

from . import exceptions
from .cache import region
from .constants import DEFAULT_K, TABLE_SAMPLES
from .grid import Field, Grid, SymbolLike

logger = logging.getLogger(__name__)

_SPATIAL_KINDS = ("P", "le", "gt", "fattened")

_MIN_DYADIC = 2.0**-30


def laplacian_symbol(*xi):
    return -sum(x**2 for x in xi)


def riesz_symbol(s: float = 1.0):
    """Symbol of |∇|^s. The zero mode is 0 for s != 0 and passed through for
    s = 0."""

    def symbol(*xi):
        kabs = np.sqrt(sum(x**2 for x in xi))
        if s == 0:
            return np.ones_like(kabs)

        out = np.zeros_like(kabs)
        nonzero = kabs > 0
        out[nonzero] = kabs[nonzero] ** s
        return out

    return symbol


def bessel_symbol(s: float = 1.0):
    "Symbol of ⟨∇⟩^s = (1 + |ξ|²)^{s/2}."

    def symbol(*xi):
        return (1.0 + sum(x**2 for x in xi)) ** (s / 2)

    return symbol


def _symbol_values(grid: Grid, m: SymbolLike) -> np.ndarray:
    if callable(m):
        xi = tuple(np.broadcast_to(x, grid.shape) for x in grid.wavenumbers)
        return np.broadcast_to(m(*xi), grid.shape)

    return np.broadcast_to(np.asarray(m), grid.shape)


def apply_multiplier(field: Field, m: SymbolLike) -> Field:
    """Multiply the spectral data by m(ξ). The result keeps the input
    representation.

    :param field:
    :type field: Field
    :param m: callable taking the wavenumber components, or an array over
        the grid
    :rtype: Field
    """
    spectral = field.spectral()
    values = spectral.data * _symbol_values(field.grid, m)
    out = Field(field.grid, values, "spectral")
    return out if field.rep == "spectral" else out.physical()


def schrodinger_propagate(field: Field, t: float) -> Field:
    "e^{itΔ}: spectral multiplication by e^{−it|ξ|²}."
    return apply_multiplier(field, np.exp(-1j * t * field.grid.ksq))


def wave_propagate(field: Field, t: float) -> Field:
    "e^{it|∇|}: spectral multiplication by e^{it|ξ|}."
    return apply_multiplier(field, np.exp(1j * t * field.grid.kabs))


def laplacian(field: Field) -> Field:
    return apply_multiplier(field, -field.grid.ksq)


def abs_grad(field: Field) -> Field:
    return apply_multiplier(field, field.grid.kabs)


def gradient(field: Field) -> List[Field]:
    "Spectral partial derivatives ∂_j f, j = 1..d (physical fields)."
    spectral = field.spectral()
    grid = field.grid
    return [
        Field(grid, 1j * np.broadcast_to(xi, grid.shape) * spectral.data, "spectral")
        .physical()
        for xi in grid.wavenumbers
    ]


def dealias(field: Field) -> Field:
    "2/3-rule truncation: keep |k_j| <= n/3 on every axis."
    return apply_multiplier(field, field.grid.dealias_mask)


@region.cache_on_arguments()
def _transition_table(samples: int = TABLE_SAMPLES) -> Tuple[np.ndarray, ...]:
    """Normalized primitive of the mollifier exp(−1/(1−s²)) on [−1, 1]."""
    grid = np.linspace(-1.0, 1.0, samples)
    bump = np.zeros_like(grid)
    inner = np.abs(grid) < 1
    bump[inner] = np.exp(-1.0 / (1.0 - grid[inner] ** 2))
    primitive = cumulative_trapezoid(bump, grid, initial=0.0)
    primitive /= primitive[-1]
    grid.flags.writeable = False
    primitive.flags.writeable = False
    logger.debug("Tabulated transition profile with %d samples", samples)
    return grid, primitive


def smooth_step(r, a: float, b: float) -> np.ndarray:
    """Even profile equal to 1 on |r| <= a, 0 on |r| >= b, smooth and
    monotone in between.

    :param r: array of radii
    :param a: plateau end
    :param b: support end
    """
    r = np.abs(np.asarray(r, dtype=float))
    grid, primitive = _transition_table()
    s = 2.0 * (r - a) / (b - a) - 1.0
    out = 1.0 - np.interp(s, grid, primitive)
    out = np.where(r <= a, 1.0, out)
    return np.where(r >= b, 0.0, out)


def eta0(r) -> np.ndarray:
    "The base Littlewood-Paley profile: 1 on |r| <= 5/4, 0 on |r| >= 8/5."
    return smooth_step(r, 1.25, 1.6)


def lateral_phi(r) -> np.ndarray:
    "0 on |r| <= 1/8 and |r| >= 4, 1 on 1/4 <= |r| <= 2."
    return (1.0 - smooth_step(r, 0.125, 0.25)) * smooth_step(r, 2.0, 4.0)


def is_dyadic(value: float) -> bool:
    if value <= 0 or not math.isfinite(value):
        return False

    mantissa, _ = math.frexp(value)
    return mantissa == 0.5


class DyadicLadder:
    """Dyadic frequencies 1, 2, ..., top with the profiles χ_λ, χ_{≤λ}.

    :param top: largest dyadic frequency (a power of two)
    :param unit: frequency unit the dimensionless radius is measured in
    :param K: projector constant separating low and high pieces
    """

    def __init__(self, top: int, unit: float = 1.0, K: int = DEFAULT_K):
        if not is_dyadic(top) or top < 1:
            raise exceptions.InvalidProjector(f"Ladder top must be dyadic: {top}")

        if not is_dyadic(K) or K < 2:
            raise exceptions.InvalidProjector(f"K must be a power of two >= 2: {K}")

        self.top = int(top)
        self.unit = float(unit)
        self.K = int(K)

    def __repr__(self):
        return f"<DyadicLadder top={self.top} unit={self.unit:.6g} K={self.K}>"

    @classmethod
    def for_grid(cls, grid: Grid, K: int = DEFAULT_K) -> "DyadicLadder":
        "Smallest ladder whose χ_{≤top} is 1 on every grid mode."
        top = 1
        while 1.25 * top < grid.lattice_max:
            top *= 2

        return cls(top, grid.kappa, K)

    @property
    def lambdas(self) -> List[int]:
        return [2**j for j in range(int(math.log2(self.top)) + 1)]

    def check(self, lam: float, kind: str = "P", bounded: bool = True):
        if not is_dyadic(lam) or lam < _MIN_DYADIC:
            raise exceptions.InvalidProjector(f"Not a dyadic frequency: {lam}")

        if kind in ("P", "fattened") and lam < 1:
            raise exceptions.InvalidProjector(f"P_λ needs λ >= 1, found {lam}")

        if bounded and lam > self.top:
            raise exceptions.InvalidProjector(
                f"λ={lam} beyond the resolvable range (top {self.top})"
            )

    @staticmethod
    def chi_le(lam: float, r) -> np.ndarray:
        return eta0(np.asarray(r) / lam)

    @staticmethod
    def chi(lam: float, r, inhomogeneous: bool = True) -> np.ndarray:
        "χ_λ; with inhomogeneous=True the λ = 1 piece is χ_{≤1}."
        r = np.asarray(r)
        if inhomogeneous and lam == 1:
            return eta0(r)

        return eta0(r / lam) - eta0(2.0 * r / lam)

    def profile(self, lam: float, kind: str, r, inhomogeneous: bool = True):
        if kind == "P":
            return self.chi(lam, r, inhomogeneous)

        if kind == "le":
            return self.chi_le(lam, r)

        if kind == "gt":
            return 1.0 - self.chi_le(lam, r)

        if kind == "fattened":
            members = [m for m in (lam / 2, lam, 2 * lam) if 1 <= m <= self.top]
            return sum(self.chi(m, r, inhomogeneous) for m in members)

        raise exceptions.InvalidProjector(f"Unknown projector kind: {kind}")


def _ladder(field: Field, ladder: Optional[DyadicLadder]) -> DyadicLadder:
    return ladder or DyadicLadder.for_grid(field.grid)


def lp_project(
    field: Field, lam: float, kind: str = "P", ladder: Optional[DyadicLadder] = None
) -> Field:
    """Littlewood-Paley projection P_λ, P_{≤λ}, P_{>λ} or the fattened P̃_λ.

    :raises exceptions.InvalidProjector: λ not dyadic or beyond the ladder
    """
    if kind not in _SPATIAL_KINDS:
        raise exceptions.InvalidProjector(f"Unknown projector kind: {kind}")

    ladder = _ladder(field, ladder)
    ladder.check(lam, kind)
    radius = field.grid.kabs / ladder.unit
    return apply_multiplier(field, ladder.profile(lam, kind, radius))


def lateral_project(
    field: Field, N: float, axis: int, ladder: Optional[DyadicLadder] = None
) -> Field:
    "P_{N,e}: multiply by φ_N(ξ·e) for the coordinate direction e = e_axis."
    ladder = _ladder(field, ladder)
    ladder.check(N, "P", bounded=False)
    if not 0 <= axis < field.grid.d:
        raise exceptions.InvalidProjector(f"Axis {axis} outside 0..{field.grid.d - 1}")

    component = np.broadcast_to(field.grid.wavenumbers[axis], field.grid.shape)
    return apply_multiplier(field, lateral_phi(component / (ladder.unit * N)))


def decompose_angular(
    field: Field, N: float, ladder: Optional[DyadicLadder] = None
) -> List[Field]:
    """Split P_N f into d pieces P_{N,e_j} ∏_{l<j}(1 − P_{N,e_l}) P_N f.

    For N > 1 the pieces sum to P_N f.
    """
    ladder = _ladder(field, ladder)
    grid = field.grid
    rest = lp_project(field, N, "P", ladder).spectral().data
    pieces = []
    for axis in range(grid.d):
        component = np.broadcast_to(grid.wavenumbers[axis], grid.shape)
        phi = lateral_phi(component / (ladder.unit * N))
        pieces.append(Field(grid, phi * rest, "spectral").physical())
        rest = (1.0 - phi) * rest

    return pieces


def paraproduct(
    f: Field, g: Field, ladder: Optional[DyadicLadder] = None
) -> Tuple[Field, Field, Field]:
    """Low-high, high-high and high-low pieces of the product f·g.

    LH = Σ_{λ≥K} P_{≤λ/K} f · P_λ g, HL the mirror image, HH the remaining
    pairs with |log₂(λ₁/λ₂)| < log₂ K. The pieces add up to f·g.
    """
    if f.grid != g.grid:
        raise exceptions.GridMismatch(f"{f.grid} != {g.grid}")

    ladder = _ladder(f, ladder)
    K = ladder.K
    bands_f = {lam: lp_project(f, lam, "P", ladder).values for lam in ladder.lambdas}
    bands_g = {lam: lp_project(g, lam, "P", ladder).values for lam in ladder.lambdas}

    low_high = np.zeros(f.grid.shape, dtype=np.complex128)
    high_low = np.zeros_like(low_high)
    high_high = np.zeros_like(low_high)

    for lam in ladder.lambdas:
        if lam < K:
            continue

        low_high += lp_project(f, lam // K, "le", ladder).values * bands_g[lam]
        high_low += bands_f[lam] * lp_project(g, lam // K, "le", ladder).values

    log_k = int(math.log2(K))
    for lam1 in ladder.lambdas:
        for lam2 in ladder.lambdas:
            if abs(int(math.log2(lam1)) - int(math.log2(lam2))) < log_k:
                high_high += bands_f[lam1] * bands_g[lam2]

    return Field(f.grid, low_high), Field(f.grid, high_high), Field(f.grid, high_low)
