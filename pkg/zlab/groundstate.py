#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# License: GPL

"""
The Aubin-Talenti ground state W(x) = (1 + |x|²/8)^{-1}, the Zakharov energy
and the thresholds derived from them.
"""

import logging
import math
from typing import TYPE_CHECKING, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel
from scipy.integrate import quad

from . import exceptions
from .cache import region
from .grid import Field, Grid
from .noise import NoiseModel, NoisePath, stochastic_convolution, w1_field
from .spectral import laplacian

if TYPE_CHECKING:
    from .dynamics import ZakharovState

logger = logging.getLogger(__name__)

# |S³|, the area of the unit sphere in four dimensions
_SPHERE_AREA = 2 * math.pi**2

_QUAD_TOL = 1e-10


def aubin_talenti(r, lam: float = 1.0):
    "W_λ(r) = λ(1 + (λr)²/8)^{-1}."
    return lam / (1.0 + (lam * np.asarray(r)) ** 2 / 8.0)


def _radial_derivatives(r: float, lam: float) -> Tuple[float, float, float]:
    "W_λ, W_λ' and W_λ'' at radius r."
    q = 1.0 + (lam * r) ** 2 / 8.0
    first = -(lam**3) * r / (4.0 * q**2)
    second = -(lam**3) / (4.0 * q**2) + (lam**5) * r**2 / (8.0 * q**3)
    return lam / q, first, second


def _radial_integral(density, epsabs: float = 0.0) -> float:
    value, error = quad(
        lambda r: _SPHERE_AREA * density(r) * r**3,
        0.0,
        np.inf,
        epsabs=epsabs,
        epsrel=_QUAD_TOL,
        limit=500,
    )
    logger.debug("Radial quadrature: %.16g (error estimate %.3g)", value, error)
    return value


@region.cache_on_arguments()
def radial_constants(lam: float = 1.0) -> Dict[str, float]:
    """Ground-state constants in four dimensions by adaptive radial quadrature.

    Every entry is an independent integral: ‖W_λ²‖², ‖∇W_λ‖², e_Z(W_λ, −W_λ²)
    and ‖W_λ³‖² (the residual normalisation).
    """
    if not lam > 0:
        raise exceptions.InvalidConfig(f"λ must be positive: {lam}")

    def energy_density(r):
        w, dw, _ = _radial_derivatives(r, lam)
        # ½|∇W|² + ¼|−W²|² + ½(−W²)W²
        return 0.5 * dw**2 + 0.25 * w**4 - 0.5 * w**4

    return {
        "w_sq_norm_sq": _radial_integral(lambda r: aubin_talenti(r, lam) ** 4),
        "grad_norm_sq": _radial_integral(lambda r: _radial_derivatives(r, lam)[1] ** 2),
        "energy": _radial_integral(energy_density),
        "w_cube_norm_sq": _radial_integral(lambda r: aubin_talenti(r, lam) ** 6),
    }


def threshold_norm() -> float:
    "‖W²‖_{L²}."
    return math.sqrt(radial_constants(1.0)["w_sq_norm_sq"])


def threshold_energy() -> float:
    "e_Z(W, −W²)."
    return radial_constants(1.0)["energy"]


def radial_residual(lam: float = 1.0) -> float:
    "‖ΔW_λ + W_λ³‖/‖W_λ³‖ with the radial Laplacian W'' + 3W'/r."

    def residual_sq(r):
        w, dw, d2w = _radial_derivatives(r, lam)
        radial = d2w + 3.0 * dw / r if r > 0 else 4.0 * d2w
        return (radial + w**3) ** 2

    numerator = _radial_integral(residual_sq, epsabs=1e-24)
    return math.sqrt(max(numerator, 0.0) / radial_constants(lam)["w_cube_norm_sq"])


def box_for_tail(lam: float = 1.0, tail: float = 1e-3) -> float:
    "Side L such that W_λ(L/2) = tail·W_λ(0)."
    return 2.0 * math.sqrt(8.0 * (1.0 / tail - 1.0)) / lam


def ground_state_field(lam: float, grid: Grid) -> Tuple[Field, Field, float]:
    """(W_λ, −W_λ²) restricted to the grid and the periodization tail
    W_λ(L/2)/W_λ(0).
    """
    w = grid.sample(lambda *x: aubin_talenti(np.sqrt(sum(c**2 for c in x)), lam))
    tail = float(aubin_talenti(grid.L / 2, lam) / lam)
    if tail > 1e-3:
        logger.info("Ground state on %s keeps a periodization tail of %.3g", grid, tail)

    return w, Field(grid, -w.values**2), tail


def ground_state_residual(lam: float, grid: Grid) -> float:
    "‖ΔW_λ + W_λ³‖/‖W_λ³‖ on the grid (spectral Laplacian)."
    w, _, _ = ground_state_field(lam, grid)
    cube = Field(grid, w.values**3)
    return (laplacian(w) + cube).l2_norm() / cube.l2_norm()


def energy(u: Field, v: Field) -> float:
    """Zakharov energy ∫ ½|∇u|² + ¼|v|² + ½Re(v)|u|².

    :raises exceptions.GridMismatch
    """
    if u.grid != v.grid:
        raise exceptions.GridMismatch(f"{u.grid} != {v.grid}")

    potential = u.grid.cell * np.sum(v.values.real * np.abs(u.values) ** 2)
    return float(0.5 * u.grad_norm() ** 2 + 0.25 * v.l2_norm() ** 2 + 0.5 * potential)


class VariationalReport(BaseModel):
    energy: float
    g_norm: float
    grad_sq: float
    threshold_norm: float
    hypotheses_met: bool
    mass_bound: Optional[float] = None
    gradient_bound: Optional[float] = None
    mass_ok: Optional[bool] = None
    gradient_ok: Optional[bool] = None

    @property
    def holds(self) -> bool:
        if not self.hypotheses_met:
            return True

        return bool(self.mass_ok and self.gradient_ok)


def _leq(left: float, right: float, slack: float) -> bool:
    return left <= right + slack * max(1.0, abs(right))


def variational_check(f: Field, g: Field, slack: float = 1e-12) -> VariationalReport:
    """Constraints below the ground state.

    When e_Z(f, g) < ¼‖W²‖² and ‖g‖ ≤ ‖W²‖ the pair must satisfy
    ‖g‖² ≤ 4e_Z and ‖∇f‖² ≤ ½‖W²‖(4e_Z − ‖g‖²)/(‖W²‖ − ‖g‖) ≤ ‖W²‖².
    """
    w = threshold_norm()
    e_z = energy(f, g)
    g_norm = g.l2_norm()
    grad_sq = f.grad_norm() ** 2
    met = e_z < 0.25 * w**2 and g_norm < w

    report = VariationalReport(
        energy=e_z, g_norm=g_norm, grad_sq=grad_sq, threshold_norm=w, hypotheses_met=met
    )
    if not met:
        logger.debug("Hypotheses not met: e_Z=%.6g, ‖g‖=%.6g", e_z, g_norm)
        return report

    bound = 0.5 * w * (4 * e_z - g_norm**2) / (w - g_norm)
    report.mass_bound = 4 * e_z
    report.gradient_bound = bound
    report.mass_ok = _leq(g_norm**2, 4 * e_z, slack)
    report.gradient_ok = _leq(grad_sq, bound, slack) and _leq(bound, w**2, slack)
    return report


def _band_limited(grid: Grid, rng: np.random.Generator, band: float) -> Field:
    radius = grid.kabs / grid.kappa
    mask = (radius >= band / 2) & (radius <= band)
    noise = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    field = Field(grid, noise * mask, "spectral").physical()
    return field * (1.0 / max(field.l2_norm(), 1e-300))


def sobolev_ratio(f: Field) -> float:
    "‖∇f‖²/‖f‖²_{L⁴}; at least ‖W²‖ for the sharp Sobolev inequality. 0 for f = 0."
    lp = f.lp_norm(4)
    if lp == 0:
        return 0.0

    return f.grad_norm() ** 2 / lp**2


def sample_subthreshold_pairs(
    grid: Grid,
    count: int,
    seed: int = 0,
    band: float = 8.0,
    max_attempts: Optional[int] = None,
) -> Iterator[Tuple[Field, Field]]:
    """Band-limited random pairs (f, g) inside the sub-threshold region.

    Shapes violating the sharp Sobolev inequality on the grid are rejected;
    amplitudes are drawn so that ‖g‖ < 0.9‖W²‖ and e_Z(f, g) < ¼‖W²‖².

    :param band: outer radius of the spectral annulus (units of 2π/L)
    :raises exceptions.NumericalAbort: too many rejections
    """
    rng = np.random.Generator(np.random.Philox(seed))
    w = threshold_norm()
    max_attempts = max_attempts or 100 * count + 100
    produced = 0
    attempts = 0

    while produced < count:
        attempts += 1
        if attempts > max_attempts:
            raise exceptions.NumericalAbort(
                f"Only {produced}/{count} pairs after {max_attempts} attempts"
            )

        f = _band_limited(grid, rng, band)
        if sobolev_ratio(f) < w:
            continue

        g = _band_limited(grid, rng, band) * (0.9 * w * rng.uniform())
        interaction = grid.cell * np.sum(g.values.real * np.abs(f.values) ** 2)
        quadratic = 0.5 * (f.grad_norm() ** 2 + interaction)
        room = 0.25 * (w**2 - g.l2_norm() ** 2)
        scale = math.sqrt(rng.uniform() * room / quadratic)
        produced += 1
        yield f * scale, g

    logger.debug("Sampled %d pairs in %d attempts", count, attempts)


class ThresholdReading(BaseModel):
    t: float
    value: float
    threshold: float
    crossed: bool


def sigma_star_functional(
    state: "ZakharovState", model: NoiseModel, path: NoisePath, n: int
) -> ThresholdReading:
    """e_Z(e^{−W₁(t)}X(t), Y(t) − 𝒯_t(W₂)) against e_Z(W, −W²) − 1/n.

    :raises exceptions.FrameMismatch: state not in the direct frame
    """
    if state.frame != "direct":
        raise exceptions.FrameMismatch(f"Expected a direct state, found {state.frame}")

    if n < 1:
        raise exceptions.InvalidConfig(f"n must be a positive integer: {n}")

    local = state.t - path.origin
    factor = np.exp(-w1_field(model, path, local).values)
    u = Field(state.X.grid, factor * state.X.values)
    v = state.Y - stochastic_convolution(model, path, local)
    value = energy(u, v)
    threshold = threshold_energy() - 1.0 / n
    return ThresholdReading(
        t=state.t, value=value, threshold=threshold, crossed=value >= threshold
    )


def constant_table(lambdas: Sequence[float] = (0.5, 1.0, 2.0)) -> List[dict]:
    "Rows of the ground-state constant table."
    rows = []
    for lam in lambdas:
        constants = radial_constants(lam)
        rows.append(
            {
                "lambda": lam,
                "w_sq_norm_sq": constants["w_sq_norm_sq"],
                "grad_norm_sq": constants["grad_norm_sq"],
                "energy": constants["energy"],
                "quarter_w_sq_norm_sq": 0.25 * constants["w_sq_norm_sq"],
                "radial_residual": radial_residual(lam),
            }
        )

    return rows
