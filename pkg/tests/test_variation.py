#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# License: GPL

import itertools
import math

import numpy as np
import pytest

from zlab import exceptions
from zlab.noise import NoisePath
from zlab.variation import (
    SampledPath,
    besov_bands,
    besov_time_norm,
    brownian_path,
    embedding_bands,
    extend_gbm,
    extend_gbm_tail,
    gbm_from_brownian,
    gbm_tail_experiment,
    gbm_tail_sample,
    gbm_vp_experiment,
    hoelder_norm,
    interpolation_ratio,
    l6_norm,
    lp_time_norm,
    p_variation,
    read_path_csv,
    tail_statistics,
    tail_threshold,
    vp_norm,
    write_table_csv,
)


def _brute_force_variation(values, p):
    best = 0.0
    indices = range(len(values))
    for size in range(2, len(values) + 1):
        for chosen in itertools.combinations(indices, size):
            jumps = np.abs(np.diff(values[list(chosen)])) ** p
            best = max(best, float(jumps.sum()))

    return best ** (1.0 / p)


def _constant(value=3.0, stop=2.0, steps=64):
    times = np.linspace(0, stop, steps + 1)
    return SampledPath(times, np.full(times.shape, value))


@pytest.mark.parametrize(
    "times, values",
    [([0, 1], [1.0]), ([0, 1, 1], [0.0, 1.0, 2.0]), ([0, 1], [0.0, np.nan])],
)
def test_invalid_paths(times, values):
    with pytest.raises(exceptions.InvalidPath):
        SampledPath(times, values)


def test_interpolation_and_restriction():
    path = SampledPath([0.0, 1.0, 2.0], [0.0, 2.0, 0.0])
    assert path(0.5) == pytest.approx(1.0)
    window = path.restrict((0.5, 1.5))
    assert window.times.tolist() == [0.5, 1.0, 1.5]
    assert window.values.tolist() == [1.0, 2.0, 1.0]

    with pytest.raises(exceptions.InvalidPath):
        path.restrict((1.0, 1.0))


def test_zigzag_variation():
    path = SampledPath([0, 1, 2, 3], [0.0, 1.0, 0.0, 1.0])
    for p in (1.0, 2.0, 3.0):
        assert p_variation(path, p) == pytest.approx(3 ** (1 / p))


def test_monotone_path_variation():
    path = SampledPath(np.arange(6), np.array([0.0, 0.5, 1.5, 2.0, 2.2, 4.0]))
    assert p_variation(path, 2.0) == pytest.approx(4.0)


@pytest.mark.parametrize("p", [1.0, 2.0, 2.5, 4.0])
def test_variation_matches_brute_force(rng, p):
    values = rng.standard_normal(9)
    path = SampledPath(np.arange(9), values)
    assert p_variation(path, p) == pytest.approx(_brute_force_variation(values, p))


def test_variation_checks():
    path = SampledPath([0, 1], [0.0, 1.0])
    with pytest.raises(exceptions.InvalidPath):
        p_variation(path, 0.5)

    assert p_variation(SampledPath([0.0], [4.0]), 2) == 0


def test_constant_path_norms():
    path = _constant(3.0)
    assert p_variation(path, 3) == 0
    assert vp_norm(path, 3) == pytest.approx(3.0)
    assert hoelder_norm(path, 0.5) == 0
    assert lp_time_norm(path, 2) == pytest.approx(3.0 * math.sqrt(2.0))
    assert lp_time_norm(path, np.inf) == 3.0
    assert l6_norm(path) == pytest.approx(3.0 * 2.0 ** (1 / 6))


def test_lp_time_norm_of_a_ramp():
    path = SampledPath(np.linspace(0, 1, 9), np.linspace(0, 1, 9))
    assert lp_time_norm(path, 1) == pytest.approx(0.5, rel=1e-12)
    assert lp_time_norm(path, 1, (0.0, 0.5)) == pytest.approx(0.125, rel=1e-12)


def test_hoelder_norm():
    path = SampledPath(np.linspace(0, 1, 11), 2 * np.linspace(0, 1, 11))
    assert hoelder_norm(path, 1.0) == pytest.approx(2.0)
    with pytest.raises(exceptions.InvalidPath):
        hoelder_norm(path, 1.5)


def test_constant_path_sits_in_the_low_block():
    path = _constant(3.0)
    rows = besov_bands(path)
    assert rows[0]["lambda"] == 1
    assert rows[0]["value"] == pytest.approx(l6_norm(path), rel=1e-12)
    assert all(row["value"] < 1e-10 for row in rows[1:])
    assert besov_time_norm(path) == pytest.approx(l6_norm(path), rel=1e-12)
    assert besov_bands(path, homogeneous=True)[0]["lambda"] == 2


def test_besov_needs_intervals():
    with pytest.raises(exceptions.InvalidPath):
        besov_bands(SampledPath([0.0, 1.0], [0.0, 1.0]))


def test_oscillation_moves_to_high_bands():
    times = np.linspace(0, 8 * np.pi, 513)
    path = SampledPath(times, np.sin(16 * times))
    rows = {row["lambda"]: row["value"] for row in besov_bands(path, s=0.0)}
    assert rows[16] > 10 * rows[1]
    assert rows[16] > 10 * rows[64]


def test_embedding_bands_keys():
    path = brownian_path(1, 0.01, 200)
    out = embedding_bands(path)
    assert set(out) == {"vp", "max_band", "bands"}
    assert out["vp"] > 0
    assert all(row["lambda"] >= 2 for row in out["bands"])


def test_interpolation_ratio_is_finite():
    path = gbm_from_brownian(brownian_path(2, 0.01, 400), 1.0)
    ratio = interpolation_ratio(path)
    assert math.isfinite(ratio) and ratio > 0


def test_brownian_path_matches_noise_engine():
    path = brownian_path(17, 0.02, 50, index=3)
    noise = NoisePath(17, 0.02, 50, (1, 0), index=3)
    assert path.values[0] == 0
    assert np.allclose(path.values, noise.values(1)[:, 0], atol=1e-14)


def test_gbm_prefix():
    h = gbm_from_brownian(brownian_path(5, 0.01, 100), 1.0)
    extended = extend_gbm(h)
    assert extended.start == -1.0
    assert extended(-0.5) == pytest.approx(0.5)
    assert p_variation(extended, 3, (-1.0, 0.0)) == pytest.approx(1.0)

    with pytest.raises(exceptions.InvalidPath):
        extend_gbm_tail(h, 0.0)

    with pytest.raises(exceptions.InvalidPath):
        extend_gbm(extended)


def test_vp_experiment_rows():
    rows = gbm_vp_experiment(c=1.0, horizons=(0.5, 1.0), M=4, dt=0.05, seed=2)
    assert [row["horizon"] for row in rows] == [0.5, 1.0]
    assert rows[0]["median"] <= rows[1]["median"]
    assert all(row["samples"] == 4 for row in rows)

    extended = gbm_vp_experiment(horizons=(1.0,), M=4, dt=0.05, extended=True)
    assert extended[0]["median"] >= 1.0


def test_vp_experiment_checks():
    with pytest.raises(exceptions.InvalidPath):
        gbm_vp_experiment(horizons=(2.0, 1.0), M=1)

    with pytest.raises(exceptions.InvalidPath):
        gbm_vp_experiment(process="levy", M=1)


@pytest.mark.slow
def test_gbm_variation_saturates_while_bm_grows():
    gbm = gbm_vp_experiment(c=1.0, horizons=(10.0, 20.0, 40.0), M=200)
    bm = gbm_vp_experiment(horizons=(10.0, 20.0, 40.0), M=200, process="bm")
    gbm_growth = gbm[-1]["median"] / gbm[0]["median"]
    bm_growth = bm[-1]["median"] / bm[0]["median"]
    assert gbm_growth < 1.1
    assert bm_growth > 1.5


def test_tail_threshold():
    assert tail_threshold(1.0, 3.0) == pytest.approx(1.0)
    assert tail_threshold(2.0**12, 3.0) == pytest.approx(2.0)


def test_tail_sample_carries_the_prefix():
    h = gbm_tail_sample(2.0, seed=3, index=1, steps=32)
    assert h.start == pytest.approx(-0.25)
    assert h.stop == pytest.approx(1.0)
    assert h(-0.125) == pytest.approx(0.5)
    assert h(0.0) == pytest.approx(1.0)


def test_tail_streams_differ_per_c():
    one = gbm_tail_sample(1.0, seed=3, index=0, stream=0, steps=32)
    two = gbm_tail_sample(1.0, seed=3, index=0, stream=1, steps=32)
    assert np.array_equal(one.times, two.times)
    assert not np.allclose(one.values[2:], two.values[2:])


def test_tail_experiment_rows():
    rows = gbm_tail_experiment((1.0, 4.0), M=4, steps=64)
    assert [row["c"] for row in rows] == [1.0, 4.0]
    for stream, row in enumerate(rows):
        assert 0 <= row["probability"] <= 1
        assert row["median"] > 0
        assert row["threshold"] == pytest.approx(tail_threshold(row["c"], 2.0))
        values = [
            tail_statistics(gbm_tail_sample(row["c"], 0, index, stream, steps=64))
            for index in range(4)
        ]
        assert row["median"] == pytest.approx(np.median(values), rel=1e-12)


@pytest.mark.slow
def test_tail_statistics_decay_with_c():
    rows = gbm_tail_experiment((0.5, 1.0, 2.0, 4.0), M=200)
    assert rows[0]["median"] > rows[-1]["median"]
    assert rows[0]["probability"] >= rows[-1]["probability"]


def test_path_csv(tmp_path):
    out = str(tmp_path / "path.csv")
    write_table_csv([{"t": 0.0, "x": 1.0}, {"t": 0.5, "x": -1.0}], out)
    path = read_path_csv(out)
    assert path.times.tolist() == [0.0, 0.5]
    assert path.values.tolist() == [1.0, -1.0]

    broken = str(tmp_path / "broken.csv")
    write_table_csv([{"t": 0.0, "y": 1.0}], broken)
    with pytest.raises(exceptions.InvalidPath):
        read_path_csv(broken)
