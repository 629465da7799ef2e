#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# License: GPL

"""
Split-step integration of the stochastic Zakharov system

    i dX + ΔX dt = Re(Y)X dt − iμX dt + iX dW₁
    i dY + |∇|Y dt = −|∇||X|² dt + dW₂

and of its pathwise rescaled equivalents.

Frames:
    direct           (X, Y)
    conservative     (u, v) = (e^{−W₁}X, Y − 𝒯_t(W₂)), real noise modes
    nonconservative  (z, v) = (e^{μ̂t−W₁}X, Y − 𝒯_t(W₂)), one constant mode
"""

import logging
import math
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel

from . import exceptions
from .constants import DEFAULT_D_BLOW, DEFAULT_M_BLOW_FACTOR
from .grid import Field, Grid, load_field
from .groundstate import energy, ground_state_field, sigma_star_functional
from .noise import (
    ConvolutionTracker,
    NoiseModel,
    NoisePath,
    coefficients_at,
    stochastic_convolution,
    w1_increment,
    w1_values,
    wave_source_spectrum,
)
from .spectral import gradient, schrodinger_propagate, wave_propagate
from .utils import read_csv, write_csv

logger = logging.getLogger(__name__)

FRAMES = ("direct", "conservative", "nonconservative")

_TIME_TOL = 1e-9

Factor = Union[np.ndarray, complex]


class ZakharovState:
    """Schrödinger and wave components at time t in a given frame.

    :param origin: absolute time the rescaling of the frame starts from
    """

    def __init__(
        self,
        X: Field,
        Y: Field,
        t: float = 0.0,
        frame: str = "direct",
        origin: float = 0.0,
    ):
        if X.grid != Y.grid:
            raise exceptions.GridMismatch(f"{X.grid} != {Y.grid}")

        if frame not in FRAMES:
            raise exceptions.FrameMismatch(f"Unknown frame: {frame}")

        self.X = X
        self.Y = Y
        self.t = float(t)
        self.frame = frame
        self.origin = float(origin)

    def __repr__(self):
        return f"<ZakharovState {self.frame} t={self.t:.6g} on {self.grid}>"

    @property
    def grid(self) -> Grid:
        return self.X.grid

    def is_finite(self) -> bool:
        return self.X.is_finite() and self.Y.is_finite()

    def mass(self) -> float:
        return self.X.l2_norm() ** 2

    def energy(self) -> float:
        return energy(self.X, self.Y)

    def norm(self) -> float:
        "‖X‖_{H¹} + ‖Y‖_{L²}."
        return self.X.h1_norm() + self.Y.l2_norm()

    def distance(self, other: "ZakharovState") -> float:
        "‖X − X'‖_{H¹} + ‖Y − Y'‖_{L²}."
        return (self.X - other.X).h1_norm() + (self.Y - other.Y).l2_norm()


class Thresholds(BaseModel):
    "Finite surrogates for the blow-up alternative."

    m_blow: Optional[float] = None
    m_blow_factor: float = DEFAULT_M_BLOW_FACTOR
    d_blow: float = DEFAULT_D_BLOW

    def norm_limit(self, initial_norm: float) -> float:
        if self.m_blow is not None:
            return self.m_blow

        return self.m_blow_factor * max(initial_norm, 1.0)


class Outcome(BaseModel):
    kind: str = "undecided"
    time: Optional[float] = None

    def __str__(self):
        return f"blowup({self.time:.6g})" if self.kind == "blowup" else self.kind


class Trajectory:
    "Diagnostic series, direct-frame checkpoints and the run outcome."

    COLUMNS = ("t", "mass", "energy", "h1_X", "l2_Y", "d_accum")

    def __init__(
        self,
        rows: Optional[List[dict]] = None,
        checkpoints: Optional[Dict[float, ZakharovState]] = None,
        outcome: Optional[Outcome] = None,
    ):
        self.rows = rows or []
        self.checkpoints = checkpoints or {}
        self.outcome = outcome or Outcome()
        self.norm_limit: Optional[float] = None
        self.jump: Optional[float] = None

    def __repr__(self):
        return f"<Trajectory rows={len(self.rows)} outcome={self.outcome}>"

    def series(self, column: str) -> np.ndarray:
        return np.array([row[column] for row in self.rows], dtype=float)

    @property
    def times(self) -> np.ndarray:
        return self.series("t")

    @property
    def checkpoint_times(self) -> List[float]:
        return sorted(self.checkpoints)

    def record(self, state: ZakharovState, d_accum: float) -> dict:
        row = {
            "t": state.t,
            "mass": state.mass(),
            "energy": state.energy(),
            "h1_X": state.X.h1_norm(),
            "l2_Y": state.Y.l2_norm(),
            "d_accum": d_accum,
        }
        self.rows.append(row)
        return row

    def checkpoint(self, t: float) -> ZakharovState:
        for time, state in self.checkpoints.items():
            if abs(time - t) <= _TIME_TOL * max(1.0, abs(t)):
                return state

        raise exceptions.OffMeshTime(f"No checkpoint at t={t}")

    def mark_blowup(self, t: float):
        self.outcome = Outcome(kind="blowup", time=t)

    def to_csv(self, path: str):
        write_csv(self.rows, path, self.COLUMNS)

    @classmethod
    def from_csv(cls, path: str) -> "Trajectory":
        rows = read_csv(path)
        for row in rows:
            missing = set(cls.COLUMNS) - set(row)
            if missing:
                raise exceptions.InvalidFieldFile(f"Missing columns: {missing}")

        return cls(rows=rows)


class LinearFlow:
    "Half-step propagators e^{i(dt/2)Δ} and e^{i(dt/2)|∇|} for one grid."

    def __init__(self, grid: Grid, dt: float):
        self.grid = grid
        self.dt = dt
        self.schrodinger = np.exp(-0.5j * dt * grid.ksq)
        self.wave = np.exp(0.5j * dt * grid.kabs)


class StepCoefficients:
    """Lower-order terms of a rescaled frame over one step.

    :param b: drift vector field (conservative frame) or None
    :param c: scalar potential (conservative frame)
    :param potential: Re 𝒯_t(W₂)
    :param h: wave forcing multiplier (nonconservative frame)
    """

    def __init__(self, b=None, c=0.0, potential=0.0, h: float = 1.0):
        self.b = b
        self.c = c
        self.potential = potential
        self.h = h

    def average(self, other: "StepCoefficients") -> "StepCoefficients":
        b = None
        if self.b is not None:
            b = [0.5 * (one + two) for one, two in zip(self.b, other.b)]

        return StepCoefficients(
            b,
            0.5 * (self.c + other.c),
            0.5 * (self.potential + other.potential),
            0.5 * (self.h + other.h),
        )


def _constant_phi(model: NoiseModel) -> complex:
    if not model.modes1:
        return 0j

    phi = model.constant_mode
    if phi is None:
        raise exceptions.FrameMismatch(
            "The nonconservative frame needs a single spatially constant mode"
        )

    return phi


def _check_frame(model: NoiseModel, frame: str):
    if frame == "conservative":
        if not model.is_real:
            raise exceptions.FrameMismatch("The conservative frame needs real modes")
    elif frame == "nonconservative":
        _constant_phi(model)
    else:
        raise exceptions.FrameMismatch(f"Not a rescaled frame: {frame}")


def frame_factor(model: NoiseModel, path: NoisePath, frame: str, step: int) -> Factor:
    "e^{−W₁} (conservative) or the scalar e^{μ̂t−W₁} (nonconservative)."
    w1 = w1_values(model, path, step)
    if frame == "conservative":
        return np.exp(-w1)

    mu_hat = model.mu_hat or 0j
    return complex(np.exp(mu_hat * step * path.dt - w1.flat[0]))


def mass_martingale_factor(model: NoiseModel, path: NoisePath, t: float) -> float:
    "h(t) = |X(t)|²/|z(t)|² = |e^{W₁(t)−μ̂t}|² for a constant-mode model."
    _check_frame(model, "nonconservative")
    factor = frame_factor(model, path, "nonconservative", path.step_of(t))
    return 1.0 / abs(factor) ** 2


class RescaledCoefficients:
    """Pathwise coefficients of a rescaled frame, advanced step by step.

    Each step uses the average of the coefficients at both ends.
    """

    def __init__(self, model: NoiseModel, path: NoisePath, frame: str, start: int = 0):
        _check_frame(model, frame)
        self.model = model
        self.path = path
        self.frame = frame
        self.step = start
        self._tracker = ConvolutionTracker(model, path, start) if model.modes2 else None
        self._current = self._evaluate()

    def _evaluate(self) -> StepCoefficients:
        potential = 0.0
        if self._tracker is not None:
            potential = self._tracker.value.values.real

        if self.frame == "conservative":
            if not self.model.modes1:
                return StepCoefficients(potential=potential)

            b, c = coefficients_at(self.model, self.path.beta(1, self.step))
            return StepCoefficients([p.values for p in b], c.values, potential)

        return StepCoefficients(potential=potential, h=1.0 / abs(self.factor()) ** 2)

    def factor(self) -> Factor:
        return frame_factor(self.model, self.path, self.frame, self.step)

    def convolution(self) -> Optional[Field]:
        return self._tracker.value if self._tracker is not None else None

    def advance(self) -> StepCoefficients:
        before = self._current
        if self._tracker is not None:
            self._tracker.advance()

        self.step += 1
        self._current = self._evaluate()
        return before.average(self._current)


def _local_step(state: ZakharovState, path: NoisePath) -> int:
    return path.step_of(state.t - path.origin)


def _mesh_step(state: ZakharovState, path: NoisePath, dt: Optional[float]) -> int:
    if dt is not None and abs(dt - path.dt) > _TIME_TOL * path.dt:
        raise exceptions.OffMeshTime(f"Step {dt} differs from the noise mesh {path.dt}")

    step = _local_step(state, path)
    if step >= path.steps:
        raise exceptions.OffMeshTime(f"No noise beyond t={path.origin + path.T}")

    return step


def _spectrum(grid: Grid, values: np.ndarray) -> np.ndarray:
    return Field(grid, values).coefficients


def _physical(grid: Grid, spectrum: np.ndarray) -> Field:
    return Field(grid, spectrum, "spectral").physical()


def _wave_source(grid: Grid, density: np.ndarray, dt: float) -> np.ndarray:
    "Spectrum of i·dt·|∇|(density), dealiased."
    return 1j * dt * grid.kabs * grid.dealias_mask * _spectrum(grid, density)


def step_direct(
    state: ZakharovState,
    model: NoiseModel,
    path: NoisePath,
    dt: Optional[float] = None,
    flow: Optional[LinearFlow] = None,
    coupling: float = 1.0,
) -> ZakharovState:
    """One Strang step: half linear flows, nonlinear substep, exact noise
    substep, half linear flows.

    :param coupling: multiplies both nonlinear terms (0 gives linear flows)
    :raises exceptions.NonFiniteField
    """
    if state.frame != "direct":
        raise exceptions.FrameMismatch(f"Expected a direct state, found {state.frame}")

    step = _mesh_step(state, path, dt)
    grid = state.grid
    flow = flow or LinearFlow(grid, path.dt)
    dt = path.dt

    X = _physical(grid, state.X.coefficients * flow.schrodinger).data
    Y = _physical(grid, state.Y.coefficients * flow.wave).data

    X = np.exp(-1j * coupling * dt * Y.real) * X
    Y_hat = _spectrum(grid, Y) + coupling * _wave_source(grid, np.abs(X) ** 2, dt)

    if model.modes1:
        X = np.exp(w1_increment(model, path, step) - model.mu_hat_field * dt) * X

    if model.modes2:
        Y_hat = Y_hat + wave_source_spectrum(model, path, step)

    X_new = _physical(grid, _spectrum(grid, X) * flow.schrodinger)
    Y_new = _physical(grid, Y_hat * flow.wave)
    t_new = path.origin + (step + 1) * dt
    return ZakharovState(X_new, Y_new, t_new, "direct", state.origin)


def _transport(u: np.ndarray, b: List[np.ndarray], grid: Grid, dt: float):
    "RK4 for ∂_t u = i b·∇u over dt."

    def rate(values):
        partials = gradient(Field(grid, values))
        return 1j * sum(bj * p.values for bj, p in zip(b, partials))

    k1 = rate(u)
    k2 = rate(u + 0.5 * dt * k1)
    k3 = rate(u + 0.5 * dt * k2)
    k4 = rate(u + dt * k3)
    return u + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def step_rescaled(
    state: ZakharovState,
    coeffs: StepCoefficients,
    dt: float,
    flow: Optional[LinearFlow] = None,
    coupling: float = 1.0,
) -> ZakharovState:
    """One Strang step of a rescaled frame.

    The nonlinear substep is the symmetric composition wave half step,
    scalar half step, transport, scalar half step, wave half step.

    :raises exceptions.NonFiniteField
    """
    if state.frame == "direct":
        raise exceptions.FrameMismatch("Expected a rescaled state")

    grid = state.grid
    flow = flow or LinearFlow(grid, dt)

    u = _physical(grid, state.X.coefficients * flow.schrodinger).data
    v_hat = state.Y.coefficients * flow.wave

    source = coupling * coeffs.h
    v_hat = v_hat + source * _wave_source(grid, np.abs(u) ** 2, 0.5 * dt)
    v = _physical(grid, v_hat).data

    potential = coeffs.c - coupling * v.real - coeffs.potential
    half = np.exp(0.5j * dt * potential)
    u = half * u
    if coeffs.b is not None:
        u = _transport(u, coeffs.b, grid, dt)

    u = half * u
    v_hat = v_hat + source * _wave_source(grid, np.abs(u) ** 2, 0.5 * dt)

    u_new = _physical(grid, _spectrum(grid, u) * flow.schrodinger)
    v_new = _physical(grid, v_hat * flow.wave)
    return ZakharovState(u_new, v_new, state.t + dt, state.frame, state.origin)


def _to_rescaled(state, factor: Factor, conv: Optional[Field], frame, origin):
    v = state.Y - conv if conv is not None else state.Y
    return ZakharovState(state.X * factor, v, state.t, frame, origin)


def _to_direct(state, factor: Factor, conv: Optional[Field]):
    u = state.X.values / factor
    Y = state.Y + conv if conv is not None else state.Y
    return ZakharovState(Field(state.grid, u), Y, state.t, "direct", state.origin)


def to_rescaled(
    state: ZakharovState, model: NoiseModel, path: NoisePath, frame="conservative"
) -> ZakharovState:
    """u = e^{−W₁}X (or z = e^{μ̂t−W₁}X) and v = Y − 𝒯_t(W₂).

    :raises exceptions.FrameMismatch
    :raises exceptions.OffMeshTime
    """
    if state.frame != "direct":
        raise exceptions.FrameMismatch(f"Expected a direct state, found {state.frame}")

    _check_frame(model, frame)
    step = _local_step(state, path)
    factor = frame_factor(model, path, frame, step)
    conv = stochastic_convolution(model, path, step * path.dt)
    return _to_rescaled(state, factor, conv, frame, path.origin)


def to_direct(state: ZakharovState, model: NoiseModel, path: NoisePath):
    """Inverse of to_rescaled.

    :raises exceptions.FrameMismatch
    """
    if state.frame == "direct":
        raise exceptions.FrameMismatch("State is already direct")

    if abs(state.origin - path.origin) > _TIME_TOL * max(1.0, abs(path.origin)):
        raise exceptions.FrameMismatch(
            f"State rescaled from {state.origin}, path starts at {path.origin}"
        )

    step = _local_step(state, path)
    factor = frame_factor(model, path, state.frame, step)
    conv = stochastic_convolution(model, path, step * path.dt)
    return _to_direct(state, factor, conv)


def refined_restart(
    state: ZakharovState, sigma: float, model: NoiseModel, path: NoisePath
) -> ZakharovState:
    """Conservative frame restarted at σ, built from the noise increments
    after σ: u_σ = e^{W₁(σ)}u(σ), v_σ = v(σ) + 𝒯_σ(W₂).

    :param sigma: restart time, local to path
    :raises exceptions.OffMeshTime
    """
    restarted = path.restarted(sigma)
    if abs(state.t - restarted.origin) > _TIME_TOL * max(1.0, abs(state.t)):
        raise exceptions.OffMeshTime(f"State at t={state.t}, restart at {sigma}")

    if state.frame != "direct":
        state = to_direct(state, model, path)

    return to_rescaled(state, model, restarted, "conservative")


def restart_inverse(
    state: ZakharovState, sigma: float, model: NoiseModel, path: NoisePath
) -> ZakharovState:
    """Back from the frame restarted at σ to the frame of path:
    u(σ+t) = e^{−W₁(σ)}u_σ(t), v(σ+t) = v_σ(t) − e^{it|∇|}𝒯_σ(W₂).
    """
    if state.frame != "conservative":
        raise exceptions.FrameMismatch(f"Expected a restarted state: {state.frame}")

    step = path.step_of(sigma)
    elapsed = state.t - path.origin - sigma
    u = state.X * np.exp(-w1_values(model, path, step))
    shift = wave_propagate(stochastic_convolution(model, path, sigma), elapsed)
    return ZakharovState(u, state.Y - shift, state.t, "conservative", path.origin)


def _d_integrand(X: Field) -> float:
    "‖⟨∇⟩^{½}X‖²_{L⁴}."
    smoothed = Field(X.grid, X.coefficients * (1.0 + X.grid.ksq) ** 0.25, "spectral")
    return smoothed.lp_norm(4) ** 2


def _checkpoint_steps(times: Iterable[float], path: NoisePath, start: int) -> set:
    steps = set()
    for t in times:
        steps.add(path.step_of(t - path.origin) - start)

    return steps


def simulate(
    state: ZakharovState,
    model: NoiseModel,
    path: NoisePath,
    steps: int,
    thresholds: Optional[Thresholds] = None,
    record_every: int = 1,
    checkpoints: Sequence[float] = (),
    coupling: float = 1.0,
) -> Trajectory:
    """Integrate steps mesh steps in the frame of state.

    Diagnostics and checkpoints are always taken in the direct frame. The run
    stops at the first non-finite field or threshold crossing.
    """
    thresholds = thresholds or Thresholds()
    grid = state.grid
    start = _local_step(state, path)
    if start + steps > path.steps:
        raise exceptions.OffMeshTime(
            f"{steps} steps from t={state.t} exceed the noise horizon {path.T}"
        )

    flow = LinearFlow(grid, path.dt)
    provider = None
    if state.frame != "direct":
        provider = RescaledCoefficients(model, path, state.frame, start)
        direct = _to_direct(state, provider.factor(), provider.convolution())
    else:
        direct = state

    traj = Trajectory()
    wanted = _checkpoint_steps(checkpoints, path, start)
    traj.checkpoints[direct.t] = direct
    if not direct.is_finite():
        logger.warning("Non-finite initial state at t=%g", direct.t)
        traj.mark_blowup(direct.t)
        return traj

    traj.record(direct, 0.0)
    traj.norm_limit = thresholds.norm_limit(direct.norm())
    d_squared = 0.0

    logger.info("Simulating %d steps of %s (dt=%g)", steps, state, path.dt)

    for n in range(1, steps + 1):
        t_next = path.origin + (start + n) * path.dt
        try:
            if provider is None:
                state = step_direct(state, model, path, flow=flow, coupling=coupling)
            else:
                coeffs = provider.advance()
                state = step_rescaled(state, coeffs, path.dt, flow, coupling)

            state.t = t_next
            direct = state
            if provider is not None:
                direct = _to_direct(state, provider.factor(), provider.convolution())

            if not direct.is_finite():
                raise exceptions.NonFiniteField(f"Non-finite state at t={t_next}")
        except exceptions.NonFiniteField as error:
            logger.warning("Stopping: %s", error)
            traj.mark_blowup(t_next)
            break

        d_squared += path.dt * _d_integrand(direct.X)
        d_accum = math.sqrt(d_squared)

        if n % record_every == 0 or n == steps or n in wanted:
            row = traj.record(direct, d_accum)
            if not all(math.isfinite(value) for value in row.values()):
                traj.mark_blowup(direct.t)
                break

            if row["h1_X"] + row["l2_Y"] >= traj.norm_limit:
                traj.mark_blowup(direct.t)
            elif d_accum >= thresholds.d_blow:
                traj.mark_blowup(direct.t)

        if n in wanted or n == steps or traj.outcome.kind == "blowup":
            traj.checkpoints[direct.t] = direct

        if traj.outcome.kind == "blowup":
            logger.info("Blow-up surrogate triggered at t=%g", direct.t)
            break

        if n % 1000 == 0:
            logger.debug("Step %d/%d: %s", n, steps, traj.rows[-1])

    traj.outcome = detect_blowup(traj, thresholds)
    return traj


def detect_blowup(traj: Trajectory, thresholds: Optional[Thresholds] = None) -> Outcome:
    """blowup(t*) at the first recorded threshold crossing (or non-finite
    value); global when the final values stay below half the thresholds;
    undecided otherwise.
    """
    thresholds = thresholds or Thresholds()
    if traj.outcome.kind == "blowup":
        return traj.outcome

    if not traj.rows:
        return Outcome()

    limit = traj.norm_limit
    if limit is None:
        limit = thresholds.norm_limit(traj.rows[0]["h1_X"] + traj.rows[0]["l2_Y"])

    for row in traj.rows:
        size = row["h1_X"] + row["l2_Y"]
        if not (math.isfinite(size) and math.isfinite(row["d_accum"])):
            return Outcome(kind="blowup", time=row["t"])

        if size >= limit or row["d_accum"] >= thresholds.d_blow:
            return Outcome(kind="blowup", time=row["t"])

    last = traj.rows[-1]
    size = last["h1_X"] + last["l2_Y"]
    if size < limit / 2 and last["d_accum"] < thresholds.d_blow / 2:
        return Outcome(kind="global")

    return Outcome()


def glue(first: Trajectory, second: Trajectory, sigma: float) -> Trajectory:
    """Trajectory following first up to σ and second after it.

    The glued trajectory stores the H¹×L² jump between the two at σ.
    """
    left = first.checkpoint(sigma)
    right = second.checkpoint(sigma)

    rows = [row for row in first.rows if row["t"] <= sigma + _TIME_TOL]
    rows += [row for row in second.rows if row["t"] > sigma + _TIME_TOL]
    checkpoints = {t: s for t, s in first.checkpoints.items() if t <= sigma}
    checkpoints.update({t: s for t, s in second.checkpoints.items() if t > sigma})

    glued = Trajectory(rows, dict(sorted(checkpoints.items())), second.outcome)
    glued.norm_limit = first.norm_limit
    glued.jump = left.distance(right)
    logger.debug("Glued at σ=%g with jump %.3g", sigma, glued.jump)
    return glued


class ScatteringReport(BaseModel):
    scatters: bool
    times: List[float] = []
    max_difference: Optional[float] = None
    profile_norms: List[float] = []
    h1_final: Optional[float] = None
    decay_constant: Optional[float] = None


def scattering_profile(
    state: ZakharovState, model: NoiseModel, path: NoisePath
) -> Tuple[Field, Field]:
    "(e^{−itΔ}e^{μ̂t−W₁(t)}X(t), e^{−it|∇|}Y(t))."
    step = _local_step(state, path)
    tau = step * path.dt
    factor = np.exp(model.mu_hat_field * tau - w1_values(model, path, step))
    X = schrodinger_propagate(state.X * factor, -state.t)
    return X, wave_propagate(state.Y, -state.t)


def scattering_check(
    traj: Trajectory,
    model: NoiseModel,
    path: NoisePath,
    checkpoints: Optional[Sequence[float]] = None,
    tol: float = 1e-2,
) -> ScatteringReport:
    """Cauchy test of the scattering profiles over late checkpoints.

    :param checkpoints: times to compare (default: the last three stored)
    """
    times = list(checkpoints) if checkpoints else traj.checkpoint_times[-3:]
    if len(times) < 3:
        raise exceptions.InvalidConfig("The scattering check needs >= 3 checkpoints")

    if traj.outcome.kind == "blowup" and traj.outcome.time <= min(times):
        return ScatteringReport(scatters=False, times=times)

    profiles = [scattering_profile(traj.checkpoint(t), model, path) for t in times]
    difference = 0.0
    for i, (X1, Y1) in enumerate(profiles):
        for X2, Y2 in profiles[i + 1 :]:
            gap = (X1 - X2).h1_norm() + (Y1 - Y2).l2_norm()
            difference = max(difference, gap)

    final = traj.checkpoint(times[-1])
    h1_final = final.X.h1_norm()
    decay = None
    if model.mu_hat is not None:
        decay = h1_final * math.exp(model.mu_hat.real * final.t / 2)

    return ScatteringReport(
        scatters=difference <= tol and traj.outcome.kind != "blowup",
        times=times,
        max_difference=difference,
        profile_norms=[X.h1_norm() + Y.l2_norm() for X, Y in profiles],
        h1_final=h1_final,
        decay_constant=decay,
    )


def first_crossing(
    traj: Trajectory, model: NoiseModel, path: NoisePath, n: int
) -> Optional[float]:
    "First checkpoint time where the sub-threshold functional crosses."
    for t in traj.checkpoint_times:
        reading = sigma_star_functional(traj.checkpoints[t], model, path, n)
        if reading.crossed:
            return t

    return None


def _gaussian(grid: Grid, amplitude: float, width: float, wavenumber: float):
    carrier = grid.kappa * wavenumber

    def profile(*x):
        squared = sum(c**2 for c in x)
        return amplitude * np.exp(-squared / (2 * width**2) + 1j * carrier * x[0])

    return grid.sample(profile)


def initial_state(grid: Grid, recipe: str = "gaussian", **params) -> ZakharovState:
    """Initial data recipes.

    ground_state: (a·W_λ, b·(−W_λ²)) with params a, b, lam.
    gaussian: amplitude, width, wavenumber (carrier along the first axis in
    units of 2π/L), wave_amplitude, wave_width.
    file: x_path and optional y_path (binary field containers).
    """
    if recipe == "ground_state":
        w, w_sq, _ = ground_state_field(params.get("lam", 1.0), grid)
        return ZakharovState(w * params.get("a", 1.0), w_sq * params.get("b", 1.0))

    if recipe == "gaussian":
        width = params.get("width", 2.0)
        amplitude = params.get("amplitude", 1.0)
        X = _gaussian(grid, amplitude, width, params.get("wavenumber", 0.0))
        wave_width = params.get("wave_width", width)
        Y = _gaussian(grid, params.get("wave_amplitude", 0.0), wave_width, 0.0)
        return ZakharovState(X, Y.real())

    if recipe == "file":
        X = load_field(params["x_path"]).physical()
        if X.grid != grid:
            raise exceptions.GridMismatch(f"{params['x_path']} is not on {grid}")

        Y = Field.zeros(grid)
        if params.get("y_path"):
            Y = load_field(params["y_path"]).physical()

        return ZakharovState(X, Y)

    raise exceptions.InvalidConfig(f"Unknown initial data recipe: {recipe}")
