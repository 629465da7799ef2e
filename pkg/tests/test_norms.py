#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# License: GPL

import math

import numpy as np
import pytest

from zlab import exceptions
from zlab.norms import (
    NormSpec,
    band,
    d_norm,
    evaluate,
    g_candidates,
    g_norm_upper,
    lateral_norm,
    n_norm,
    n_total,
    s_norm,
    s_total,
    wave_norm,
    x_norm,
    y_total,
)
from zlab.spacetime import (
    SpaceTimeBlock,
    apply_spacetime_multiplier,
    temporal_project,
)
from zlab.spectral import DyadicLadder

_SAMPLES = 128
_DT = 2 * math.pi / _SAMPLES


def _plane_wave(grid):
    return grid.sample(lambda x, y: np.exp(1j * x))


@pytest.fixture
def schrodinger_wave(unit_grid):
    "e^{i(x − t)} over one period."
    return SpaceTimeBlock.free_flow(
        _plane_wave(unit_grid), _DT, _SAMPLES, "schrodinger", periodic=True
    )


@pytest.fixture
def half_wave(unit_grid):
    "e^{i(x + t)} over one period."
    return SpaceTimeBlock.free_flow(
        _plane_wave(unit_grid), _DT, _SAMPLES, "wave", periodic=True
    )


@pytest.fixture
def noisy_block(unit_grid, rng):
    shape = (8,) + unit_grid.shape
    data = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return SpaceTimeBlock(unit_grid, data, 0.1)


@pytest.mark.parametrize("regime", [(1.0, 0.25), (0.5, 0.0), 1.0, 0.5])
def test_free_plane_wave_s_norm(schrodinger_wave, regime):
    assert s_norm(schrodinger_wave, 1, regime) == pytest.approx(4 * math.pi, rel=1e-9)


def test_free_plane_wave_other_bands(schrodinger_wave):
    assert s_norm(schrodinger_wave, 2) == pytest.approx(0, abs=1e-9)
    assert s_total(schrodinger_wave) == pytest.approx(4 * math.pi, rel=1e-9)


@pytest.mark.parametrize("pair", [(0.25, 0.5), (0.0, 0.0)])
def test_free_half_wave_norm(half_wave, pair):
    assert wave_norm(half_wave, 1, pair) == pytest.approx(2 * math.pi, rel=1e-9)
    assert y_total(half_wave, pair) == pytest.approx(2 * math.pi, rel=1e-9)


def test_unsupported_regimes(noisy_block):
    with pytest.raises(exceptions.InvalidNormSpec):
        s_norm(noisy_block, 1, 0.75)

    with pytest.raises(exceptions.InvalidNormSpec):
        n_norm(noisy_block, 1, (1.0, 0.5))

    with pytest.raises(exceptions.InvalidNormSpec):
        wave_norm(noisy_block, 1, (0.25, 0.0))


def test_norms_are_homogeneous(noisy_block):
    doubled = noisy_block * 2.0
    for lam in (1, 2, 4):
        assert s_norm(doubled, lam) == pytest.approx(2 * s_norm(noisy_block, lam))
        assert n_norm(doubled, lam) == pytest.approx(2 * n_norm(noisy_block, lam))
        assert wave_norm(doubled, lam) == pytest.approx(
            2 * wave_norm(noisy_block, lam)
        )


@pytest.mark.parametrize("pair", [(0.0, 0.0), (0.25, 0.5)])
def test_wave_operator_weight(noisy_block, pair):
    alpha, beta = pair
    lam = 2
    ladder = DyadicLadder.for_grid(noisy_block.grid)
    v = band(noisy_block, lam, ladder)
    low = temporal_project(v, (lam / ladder.K) ** 2, "le", ladder)
    low = apply_spacetime_multiplier(
        low, lambda tau, grid: (lam + np.abs(tau) / ladder.unit**2) ** alpha
    )
    op = apply_spacetime_multiplier(
        v, lambda tau, grid: (grid.kabs - tau) / ladder.unit
    )
    expected = (
        v.mixed_norm(np.inf, 2)
        + lam ** (-alpha) * low.mixed_norm(np.inf, 2)
        + lam ** (beta - 1.0) * op.mixed_norm(2, 2)
    )
    assert wave_norm(noisy_block, lam, pair, ladder) == pytest.approx(expected)


def test_lateral_norm_with_equal_exponents(noisy_block):
    for axis in (0, 1):
        assert lateral_norm(noisy_block, axis, 2, 2) == pytest.approx(
            noisy_block.mixed_norm(2, 2), rel=1e-12
        )


def test_lateral_norm_orders(noisy_block):
    # ℓ² along the axis is at most √L times ℓ^∞
    upper = lateral_norm(noisy_block, 0, np.inf, 2)
    lower = lateral_norm(noisy_block, 0, 2, 2)
    assert upper >= lower / math.sqrt(noisy_block.grid.L)


@pytest.mark.parametrize("axis, p, q", [(2, 2, 2), (-1, 2, 2), (0, 0.5, 2)])
def test_lateral_norm_checks(noisy_block, axis, p, q):
    with pytest.raises(exceptions.InvalidNormSpec):
        lateral_norm(noisy_block, axis, p, q)


def test_x_norm_dominates_s_norm(noisy_block):
    assert x_norm(noisy_block) >= s_total(noisy_block)


def test_g_zero_candidate_is_n_norm(noisy_block):
    candidates = g_candidates(noisy_block)
    assert set(candidates) == {
        "zero",
        "all",
        "high_modulation",
        "angular_0",
        "angular_1",
    }
    assert candidates["zero"] == pytest.approx(n_total(noisy_block), rel=1e-12)
    assert g_norm_upper(noisy_block) <= candidates["zero"]


def test_d_norm_of_constant(unit_grid):
    block = SpaceTimeBlock(unit_grid, np.ones((10,) + unit_grid.shape), 0.1)
    area = (2 * math.pi) ** 2
    assert d_norm(block) == pytest.approx(math.sqrt(1.0 * math.sqrt(area)))


def test_spec_defaults():
    spec = NormSpec(family="S")
    assert spec.regime == (1.0, 0.25)
    assert NormSpec(family="S", s=0.5).a == 0.0
    assert NormSpec(family="Wwave", alpha=0.0).beta == 0.0


@pytest.mark.parametrize(
    "params",
    [
        {"family": "Q"},
        {"family": "S", "s": 0.75},
        {"family": "S", "a": 0.5},
        {"family": "Wwave", "alpha": 0.5},
        {"family": "S", "K": 3},
        {"family": "S", "lambdas": [1, 3]},
        {"family": "lateral", "p": 0.5},
    ],
)
def test_spec_validation(params):
    with pytest.raises(exceptions.InvalidNormSpec):
        NormSpec(**params)


def test_spec_range_beyond_grid(noisy_block):
    with pytest.raises(exceptions.InvalidNormSpec):
        evaluate(NormSpec(family="S", lambdas=[1, 64]), noisy_block)


def test_evaluate_per_band(schrodinger_wave):
    rows = evaluate(NormSpec(family="S", lambdas=[1, 2]), schrodinger_wave)
    assert [row["lambda"] for row in rows] == [1, 2, "total"]
    assert rows[-1]["value"] == pytest.approx(4 * math.pi, rel=1e-9)


@pytest.mark.parametrize("family", ["X", "G", "D", "lateral"])
def test_evaluate_single_value(noisy_block, family):
    rows = evaluate(NormSpec(family=family), noisy_block)
    assert len(rows) == 1
    assert rows[0]["family"] == family
    assert rows[0]["value"] > 0
