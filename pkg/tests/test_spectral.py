#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# License: GPL

import numpy as np
import pytest

from zlab import exceptions
from zlab.grid import Field
from zlab.spectral import (
    DyadicLadder,
    apply_multiplier,
    dealias,
    decompose_angular,
    eta0,
    is_dyadic,
    laplacian,
    lateral_phi,
    lateral_project,
    lp_project,
    paraproduct,
    riesz_symbol,
    schrodinger_propagate,
    wave_propagate,
)


def _plane_wave(grid, *k):
    return grid.sample(
        lambda *x: np.exp(1j * grid.kappa * sum(kj * xj for kj, xj in zip(k, x)))
    )


def _close(a: Field, b: Field, tol=1e-12):
    scale = max(b.l2_norm(), 1.0)
    return (a - b).l2_norm() <= tol * scale


def test_identity_multiplier(field2):
    assert _close(apply_multiplier(field2, 1.0), field2)


def test_multiplier_keeps_representation(field2):
    spectral = field2.spectral()
    assert apply_multiplier(spectral, 2.0).rep == "spectral"
    assert apply_multiplier(field2, 2.0).rep == "physical"


def test_laplacian_of_plane_wave(grid2):
    wave = _plane_wave(grid2, 3, 2)
    expected = wave * (-(grid2.kappa**2) * 13)
    assert _close(laplacian(wave), expected, 1e-10)


def test_riesz_zero_mode(grid2):
    one = Field(grid2, np.ones(grid2.shape))
    assert apply_multiplier(one, riesz_symbol(1.0)).l2_norm() == 0
    assert _close(apply_multiplier(one, riesz_symbol(0.0)), one)


@pytest.mark.parametrize("t", [0.0, 0.3, -2.5])
def test_propagators_are_unitary(field2, t):
    norm = field2.l2_norm()
    assert schrodinger_propagate(field2, t).l2_norm() == pytest.approx(norm, rel=1e-12)
    assert wave_propagate(field2, t).l2_norm() == pytest.approx(norm, rel=1e-12)


def test_propagator_at_zero(field2):
    assert _close(schrodinger_propagate(field2, 0.0), field2)
    assert _close(wave_propagate(field2, 0.0), field2)


def test_plane_wave_evolution(grid2):
    wave = _plane_wave(grid2, 1, 4)
    t = 0.7
    ksq = grid2.kappa**2 * 17
    expected = wave * np.exp(-1j * ksq * t)
    assert _close(schrodinger_propagate(wave, t), expected, 1e-10)


def test_profiles():
    r = np.linspace(0, 3, 601)
    values = eta0(r)
    assert np.all((values >= 0) & (values <= 1))
    assert np.all(values[r <= 1.25] == 1)
    assert np.all(values[r >= 1.6] == 0)
    assert np.all(np.diff(values) <= 0)
    assert np.all(lateral_phi(np.array([0.25, 1.0, 2.0])) == 1)
    assert np.all(lateral_phi(np.array([0.1, 4.5])) == 0)


def test_is_dyadic():
    assert is_dyadic(1) and is_dyadic(0.25) and is_dyadic(64)
    assert not is_dyadic(3) and not is_dyadic(0) and not is_dyadic(-2)


def test_ladder_reaches_every_mode(grid2):
    ladder = DyadicLadder.for_grid(grid2)
    assert ladder.lambdas == [1, 2, 4, 8, 16, 32]
    assert np.all(ladder.chi_le(ladder.top, grid2.kabs / ladder.unit) == 1)


def test_telescoping_profile():
    ladder = DyadicLadder(16)
    r = np.linspace(0, 30, 1201)
    total = sum(ladder.chi(lam, r) for lam in ladder.lambdas)
    assert np.allclose(total, ladder.chi_le(16, r), atol=1e-14)


def test_resolution_of_identity(field2):
    ladder = DyadicLadder.for_grid(field2.grid)
    total = field2.grid.field()
    for lam in ladder.lambdas:
        total = total + lp_project(field2, lam, "P", ladder)

    assert _close(total, field2)


def test_low_high_split(field2):
    low = lp_project(field2, 4, "le")
    high = lp_project(field2, 4, "gt")
    assert _close(low + high, field2)


def test_plane_wave_passes_its_band(grid2):
    wave = _plane_wave(grid2, 4, 0)
    assert _close(lp_project(wave, 4), wave)
    assert lp_project(wave, 16).l2_norm() <= 1e-12 * wave.l2_norm()


def test_band_support(field2):
    lam = 8
    projected = lp_project(field2.spectral(), lam).data
    radius = field2.grid.kabs / field2.grid.kappa
    outside = (radius <= 5 * lam / 8) | (radius >= 1.6 * lam)
    assert np.all(projected[outside] == 0)


def test_fattened_projector(field2):
    fattened = lp_project(field2, 4, "fattened")
    expected = sum(
        (lp_project(field2, lam) for lam in (2, 4, 8)), field2.grid.field()
    )
    assert _close(fattened, expected)


def test_projectors_commute_with_propagators(field2):
    for lam in (1, 4, 16):
        one = lp_project(schrodinger_propagate(field2, 0.8), lam)
        two = schrodinger_propagate(lp_project(field2, lam), 0.8)
        assert (one - two).l2_norm() <= 1e-12 * field2.l2_norm()


@pytest.mark.parametrize("lam, kind", [(3, "P"), (64, "P"), (0.5, "P"), (2, "X")])
def test_invalid_projector(field2, lam, kind):
    with pytest.raises(exceptions.InvalidProjector):
        lp_project(field2, lam, kind)


def test_lateral_axis_checked(field2):
    with pytest.raises(exceptions.InvalidProjector):
        lateral_project(field2, 4, 2)


def test_angular_decomposition_2d(field2):
    for N in (2, 4, 8):
        pieces = decompose_angular(field2, N)
        total = sum(pieces, field2.grid.field())
        assert len(pieces) == 2
        assert _close(total, lp_project(field2, N))


def test_angular_decomposition_4d(grid4, make_field):
    field = make_field(grid4)
    pieces = decompose_angular(field, 4)
    total = sum(pieces, grid4.field())
    assert len(pieces) == 4
    assert _close(total, lp_project(field, 4))


def test_angular_product_vanishes_on_annulus():
    # every lattice point with N/2 < |k| < 2N has one coordinate in [N/4, 2N]
    N = 4
    axis = np.arange(-2 * N, 2 * N + 1)
    points = np.stack(np.meshgrid(axis, axis, axis, axis, indexing="ij"), -1)
    points = points.reshape(-1, 4)
    radius = np.sqrt((points**2).sum(axis=1))
    annulus = points[(radius > N / 2) & (radius < 2 * N)]
    phi = lateral_phi(annulus / N)
    assert np.all(np.prod(1.0 - phi, axis=1) == 0)


def test_paraproduct_pieces_add_up(grid2, make_field):
    f = make_field(grid2)
    g = make_field(grid2)
    low_high, high_high, high_low = paraproduct(f, g)
    product = Field(grid2, f.values * g.values)
    assert _close(low_high + high_high + high_low, product, 1e-10)


def test_dealias(field2):
    kept = dealias(field2.spectral()).data
    mask = field2.grid.dealias_mask
    assert np.all(kept[~mask] == 0)
    assert np.allclose(kept[mask], field2.coefficients[mask], atol=1e-14)
