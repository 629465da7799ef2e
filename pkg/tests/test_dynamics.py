#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# License: GPL

import math

import numpy as np
import pytest

from zlab import exceptions
from zlab.dynamics import (
    Outcome,
    Thresholds,
    Trajectory,
    ZakharovState,
    detect_blowup,
    first_crossing,
    glue,
    initial_state,
    mass_martingale_factor,
    refined_restart,
    restart_inverse,
    scattering_check,
    simulate,
    step_direct,
    to_direct,
    to_rescaled,
)
from zlab.grid import Field, Grid, save_field
from zlab.noise import build_noise_model, geometric_bm
from zlab.spectral import schrodinger_propagate, wave_propagate


@pytest.fixture
def bump2(grid2):
    return initial_state(
        grid2, "gaussian", amplitude=0.5, width=4.0, wave_amplitude=0.2
    )


def _rows(size: float):
    return [
        {
            "t": 0.1 * k,
            "mass": 1.0,
            "energy": 0.0,
            "h1_X": size,
            "l2_Y": 0.0,
            "d_accum": 0.0,
        }
        for k in range(3)
    ]


def test_state_checks(grid2, unit_grid):
    with pytest.raises(exceptions.GridMismatch):
        ZakharovState(grid2.field(), unit_grid.field())

    with pytest.raises(exceptions.FrameMismatch):
        ZakharovState(grid2.field(), grid2.field(), frame="sideways")


def test_initial_recipes(grid2, tmp_path):
    state = initial_state(grid2, "gaussian", amplitude=2.0, wave_amplitude=1.0)
    assert state.X.values[0, 0] == pytest.approx(2.0)
    assert np.all(state.Y.values.imag == 0)

    ground = initial_state(grid2, "ground_state", a=0.5, b=0.0)
    assert ground.X.values[0, 0] == pytest.approx(0.5)
    assert ground.Y.l2_norm() == 0

    path = str(tmp_path / "x.bin")
    save_field(state.X, path)
    loaded = initial_state(grid2, "file", x_path=path)
    assert np.array_equal(loaded.X.values, state.X.values)
    assert loaded.Y.l2_norm() == 0

    with pytest.raises(exceptions.GridMismatch):
        initial_state(Grid(2, 16, grid2.L), "file", x_path=path)

    with pytest.raises(exceptions.InvalidConfig):
        initial_state(grid2, "soliton")


def test_linear_flow_is_exact(grid2, bump2):
    model = build_noise_model(grid2, "none")
    path = model.new_path(0, 0.05, 10)
    state = bump2
    for _ in range(6):
        state = step_direct(state, model, path, coupling=0.0)

    assert state.t == pytest.approx(0.3)
    expected_X = schrodinger_propagate(bump2.X, 0.3)
    expected_Y = wave_propagate(bump2.Y, 0.3)
    assert (state.X - expected_X).l2_norm() <= 1e-12 * bump2.X.l2_norm()
    assert (state.Y - expected_Y).l2_norm() <= 1e-12 * bump2.Y.l2_norm()


def test_step_checks(grid2, bump2, conservative2):
    path = conservative2.new_path(1, 0.01, 4)
    rescaled = ZakharovState(bump2.X, bump2.Y, frame="conservative")
    with pytest.raises(exceptions.FrameMismatch):
        step_direct(rescaled, conservative2, path)

    with pytest.raises(exceptions.OffMeshTime):
        step_direct(bump2, conservative2, path, dt=0.02)

    with pytest.raises(exceptions.OffMeshTime):
        simulate(bump2, conservative2, path, 5)


def test_real_noise_conserves_mass(bump2, conservative2):
    path = conservative2.new_path(4, 0.01, 20)
    traj = simulate(bump2, conservative2, path, 20)
    mass = traj.series("mass")
    assert len(mass) == 21
    assert np.max(np.abs(mass - mass[0])) <= 1e-10 * mass[0]


def test_constant_mode_mass_follows_geometric_bm(grid2, bump2):
    c = 0.6
    model = build_noise_model(grid2, "nonconservative", c=c)
    path = model.new_path(8, 0.01, 20)
    traj = simulate(bump2, model, path, 20, thresholds=Thresholds(m_blow=1e9))
    mass = traj.series("mass")
    for k in (5, 12, 20):
        t = 0.01 * k
        expected = geometric_bm(path, c, t)
        assert mass[k] / mass[0] == pytest.approx(expected, rel=1e-9)
        assert mass_martingale_factor(model, path, t) == pytest.approx(
            expected, rel=1e-12
        )


def test_mass_factor_needs_constant_mode(conservative2):
    path = conservative2.new_path(1, 0.1, 2)
    with pytest.raises(exceptions.FrameMismatch):
        mass_martingale_factor(conservative2, path, 0.1)


def _max_energy_drift(dt: float, steps: int) -> float:
    grid = Grid(2, 64, 2 * math.pi * 3)
    state = initial_state(
        grid, "gaussian", amplitude=1.0, width=1.5, wave_amplitude=0.5
    )
    model = build_noise_model(grid, "none")
    traj = simulate(state, model, model.new_path(0, dt, steps), steps)
    energy = traj.series("energy")
    return float(np.max(np.abs(energy - energy[0])))


def test_energy_drift_is_second_order():
    coarse = _max_energy_drift(0.01, 50)
    fine = _max_energy_drift(0.005, 100)
    assert fine < coarse
    assert coarse / fine >= 2.5


@pytest.mark.slow
def test_energy_drift_small_steps():
    assert _max_energy_drift(1e-4, 5000) <= 1e-6


def test_non_finite_state_blows_up_at_once(grid2, conservative2):
    X = grid2.field()
    X.data[2, 3] = np.nan
    path = conservative2.new_path(1, 0.01, 5)
    traj = simulate(ZakharovState(X, grid2.field()), conservative2, path, 5)
    assert traj.outcome.kind == "blowup"
    assert traj.outcome.time == 0.0


def test_threshold_crossing_blows_up(bump2, conservative2):
    path = conservative2.new_path(1, 0.01, 5)
    traj = simulate(bump2, conservative2, path, 5, thresholds=Thresholds(m_blow=1e-6))
    assert traj.outcome.kind == "blowup"
    assert traj.outcome.time == pytest.approx(0.01)
    assert str(traj.outcome) == "blowup(0.01)"


def test_frame_maps_are_inverse(bump2, conservative2):
    path = conservative2.new_path(2, 0.01, 10)
    later = ZakharovState(bump2.X, bump2.Y, t=0.07)
    rescaled = to_rescaled(later, conservative2, path)
    assert rescaled.frame == "conservative"
    assert rescaled.mass() == pytest.approx(later.mass(), rel=1e-12)
    back = to_direct(rescaled, conservative2, path)
    assert back.distance(later) <= 1e-12 * later.norm()

    with pytest.raises(exceptions.FrameMismatch):
        to_direct(later, conservative2, path)

    with pytest.raises(exceptions.FrameMismatch):
        to_rescaled(rescaled, conservative2, path)


def test_conservative_frame_needs_real_modes(bump2, grid2):
    model = build_noise_model(grid2, "nonconservative", c=1.0)
    path = model.new_path(2, 0.01, 10)
    with pytest.raises(exceptions.FrameMismatch):
        to_rescaled(bump2, model, path, "conservative")


def test_rescaled_integration_matches_direct(bump2, conservative2):
    path = conservative2.new_path(6, 0.001, 10)
    direct = simulate(bump2, conservative2, path, 10)
    start = to_rescaled(bump2, conservative2, path)
    rescaled = simulate(start, conservative2, path, 10)
    one = direct.checkpoint(0.01)
    two = rescaled.checkpoint(0.01)
    assert two.frame == "direct"
    assert one.distance(two) <= 1e-2 * one.norm()


def test_restart_at_sigma(bump2, conservative2):
    path = conservative2.new_path(3, 0.01, 10)
    traj = simulate(bump2, conservative2, path, 10, checkpoints=[0.05])
    at_sigma = traj.checkpoint(0.05)

    restarted = refined_restart(at_sigma, 0.05, conservative2, path)
    assert restarted.frame == "conservative"
    assert restarted.origin == pytest.approx(0.05)
    assert np.allclose(restarted.X.values, at_sigma.X.values, atol=1e-14)
    assert np.allclose(restarted.Y.values, at_sigma.Y.values, atol=1e-14)

    inverse = restart_inverse(restarted, 0.05, conservative2, path)
    expected = to_rescaled(at_sigma, conservative2, path)
    assert inverse.distance(expected) <= 1e-12 * expected.norm()

    with pytest.raises(exceptions.OffMeshTime):
        refined_restart(at_sigma, 0.04, conservative2, path)


def test_glue_has_no_jump(bump2, conservative2):
    path = conservative2.new_path(3, 0.01, 10)
    first = simulate(bump2, conservative2, path, 10, checkpoints=[0.05])
    restarted = refined_restart(first.checkpoint(0.05), 0.05, conservative2, path)
    second = simulate(restarted, conservative2, path.restarted(0.05), 5)

    glued = glue(first, second, 0.05)
    assert glued.jump <= 1e-12
    times = glued.times
    assert np.all(np.diff(times) > 0)
    assert times[-1] == pytest.approx(0.1)


def test_checkpoint_lookup():
    with pytest.raises(exceptions.OffMeshTime):
        Trajectory().checkpoint(0.5)


def test_trajectory_csv(bump2, conservative2, tmp_path):
    path = conservative2.new_path(1, 0.01, 3)
    traj = simulate(bump2, conservative2, path, 3)
    out = str(tmp_path / "trajectory.csv")
    traj.to_csv(out)
    restored = Trajectory.from_csv(out)
    assert np.allclose(restored.series("mass"), traj.series("mass"))

    broken = tmp_path / "broken.csv"
    broken.write_text("t,mass\n0.0,1.0\n")
    with pytest.raises(exceptions.InvalidFieldFile):
        Trajectory.from_csv(str(broken))


def test_detect_blowup():
    assert detect_blowup(Trajectory(_rows(1.0))).kind == "global"
    assert detect_blowup(Trajectory()).kind == "undecided"

    crossed = detect_blowup(Trajectory(_rows(1.0)), Thresholds(m_blow=0.5))
    assert crossed == Outcome(kind="blowup", time=0.0)

    growing = _rows(1.0)
    growing[-1]["h1_X"] = 700.0
    assert detect_blowup(Trajectory(growing)).kind == "undecided"

    growing[-1]["h1_X"] = float("nan")
    assert detect_blowup(Trajectory(growing)) == Outcome(kind="blowup", time=0.2)


def test_norm_limit():
    assert Thresholds().norm_limit(0.1) == 1e3
    assert Thresholds(m_blow_factor=10).norm_limit(5.0) == 50
    assert Thresholds(m_blow=3.0).norm_limit(5.0) == 3.0


def test_free_flow_scatters(grid2, bump2):
    model = build_noise_model(grid2, "none")
    path = model.new_path(0, 0.05, 12)
    traj = simulate(bump2, model, path, 12, checkpoints=[0.2, 0.4], coupling=0.0)
    report = scattering_check(traj, model, path)
    assert report.times == pytest.approx([0.2, 0.4, 0.6])
    assert report.scatters
    assert report.max_difference <= 1e-10
    assert report.decay_constant is None

    with pytest.raises(exceptions.InvalidConfig):
        scattering_check(traj, model, path, checkpoints=[0.2, 0.4])


def test_first_crossing(unit_grid):
    model = build_noise_model(unit_grid, "none")
    path = model.new_path(0, 0.1, 4)
    one = Field(unit_grid, np.ones(unit_grid.shape))
    quiet = ZakharovState(unit_grid.field(), unit_grid.field())
    loud = ZakharovState(unit_grid.field(), one * 2.0, t=0.1)

    assert first_crossing(Trajectory(checkpoints={0.0: quiet}), model, path, 1) is None
    both = Trajectory(checkpoints={0.0: quiet, 0.1: loud})
    assert first_crossing(both, model, path, 1) == pytest.approx(0.1)
