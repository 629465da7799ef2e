#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# License: GPL

"""
Experiment orchestration: single runs, Monte-Carlo sweeps over path indices
and persisted, re-aggregatable results.
"""

import datetime
import logging
import math
import os
from multiprocessing import Pool
from typing import Callable, Dict, Iterable, List, Optional

import numpy as np
from pydantic import BaseModel

from . import exceptions
from .config import RunConfig
from .constants import RNG_KEY_SCHEMA, THREADS, VERSION
from .dynamics import (
    ZakharovState,
    first_crossing,
    initial_state,
    refined_restart,
    restart_inverse,
    scattering_check,
    simulate,
    to_rescaled,
)
from .grid import Grid
from .groundstate import (
    constant_table,
    ground_state_field,
    ground_state_residual,
    radial_constants,
    sample_subthreshold_pairs,
    threshold_energy,
    threshold_norm,
    variational_check,
)
from .noise import NoiseModel, NoisePath, build_noise_model
from .norms import evaluate
from .spacetime import load_block
from .sweeps import ESTIMATES, SweepContext, estimate_constant_sweep
from .utils import dump_json, write_csv
from .variation import (
    SampledPath,
    besov_bands,
    besov_time_norm,
    brownian_path,
    gbm_from_brownian,
    gbm_tail_experiment,
    gbm_vp_experiment,
    hoelder_norm,
    l6_norm,
    p_variation,
    read_path_csv,
    vp_norm,
    write_table_csv,
)

logger = logging.getLogger(__name__)


class RunResult(BaseModel):
    kind: str
    config: dict
    records: List[dict] = []
    aggregates: List[dict] = []
    files: Dict[str, str] = {}
    version: str = VERSION
    rng_key_schema: str = RNG_KEY_SCHEMA
    created: str = ""

    def save(self, out: str) -> str:
        "Write summary.json, records.csv and aggregates.csv into out."
        os.makedirs(out, exist_ok=True)
        if self.records:
            self.files["records"] = _write(self.records, out, "records.csv")

        if self.aggregates:
            self.files["aggregates"] = _write(self.aggregates, out, "aggregates.csv")

        path = os.path.join(out, "summary.json")
        dump_json(self.dict(), path)
        logger.info("Saved %s result: %s", self.kind, path)
        return path


def _write(rows: List[dict], out: str, name: str) -> str:
    path = os.path.join(out, name)
    fieldnames = []
    for row in rows:
        fieldnames.extend(key for key in row if key not in fieldnames)

    write_csv(rows, path, fieldnames)
    return path


def _result(config: RunConfig, **kwargs) -> RunResult:
    return RunResult(
        kind=config.kind,
        config=config.echo(),
        created=datetime.datetime.now().isoformat(timespec="seconds"),
        **kwargs,
    )


def resolve_threads(config: RunConfig) -> int:
    "ZLAB_THREADS wins over the configured thread count."
    if THREADS:
        try:
            return max(int(THREADS), 1)
        except ValueError:
            raise exceptions.InvalidConfig(f"Invalid ZLAB_THREADS: {THREADS}") from None

    return config.threads


def _map(function: Callable, tasks: List, threads: int) -> List:
    if threads <= 1 or len(tasks) <= 1:
        return [function(task) for task in tasks]

    with Pool(threads) as pool:
        return list(pool.imap(function, tasks))


def build_model(config: RunConfig, grid: Grid, c: Optional[float] = None):
    return build_noise_model(
        grid, config.noise.preset, **config.noise.model_params(c)
    )


def _initial(config: RunConfig, grid: Grid) -> ZakharovState:
    return initial_state(grid, config.initial.recipe, **config.initial.params)


def _default_checkpoints(config: RunConfig, count: int = 3) -> List[float]:
    times = config.thresholds.checkpoints
    if len(times) >= count:
        return list(times)

    steps = config.steps
    marks = sorted({int(round(steps * (1 - 2.0**-j))) for j in range(1, count)})
    return [k * config.dt for k in marks if k > 0] + [config.T]


def _prepare(config: RunConfig, model: NoiseModel, path: NoisePath):
    state = _initial(config, model.grid)
    if config.frame != "direct":
        state = to_rescaled(state, model, path, config.frame)

    return state


def path_record(task: tuple) -> dict:
    """One Monte-Carlo path: (config echo, path index, c, check scattering).

    Module level so that worker processes can import it.
    """
    data, index, c, with_scattering = task
    config = RunConfig.parse_obj(data)
    grid = config.grid.build()
    model = build_model(config, grid, c)
    path = model.new_path(config.seed, config.dt, config.steps, index)
    checkpoints = _default_checkpoints(config) if with_scattering else ()
    traj = simulate(
        _prepare(config, model, path),
        model,
        path,
        config.steps,
        config.thresholds.build(),
        config.record_every,
        checkpoints,
        config.coupling,
    )
    first, last = traj.rows[0], traj.rows[-1]
    record = {
        "index": index,
        "seed": config.seed,
        "rng_key_schema": RNG_KEY_SCHEMA,
        "c": c,
        "outcome": traj.outcome.kind,
        "blowup_time": traj.outcome.time,
        "mass_initial": first["mass"],
        "mass_final": last["mass"],
        "energy_final": last["energy"],
        "h1_final": last["h1_X"],
        "t_final": last["t"],
    }
    if with_scattering:
        report = scattering_check(
            traj, model, path, checkpoints, config.thresholds.scattering_tol
        )
        record["scatters"] = report.scatters
        record["max_difference"] = report.max_difference

    if config.thresholds.sigma_n:
        record["sigma_star"] = first_crossing(
            traj, model, path, config.thresholds.sigma_n
        )

    logger.debug("Path %d finished: %s", index, record["outcome"])
    return record


def _standard_error(values: np.ndarray) -> float:
    if values.size < 2:
        return 0.0

    return float(np.std(values, ddof=1) / math.sqrt(values.size))


def _mass_aggregate(records: List[dict]) -> dict:
    final = np.array([r["mass_final"] for r in records], dtype=float)
    initial = np.array([r["mass_initial"] for r in records], dtype=float)
    se = _standard_error(final)
    mean = float(final.mean())
    target = float(initial.mean())
    drift = np.abs(final - initial) / np.maximum(initial, 1e-300)
    return {
        "paths": len(records),
        "mass_initial": target,
        "mass_mean": mean,
        "mass_se": se,
        "within_3se": bool(abs(mean - target) <= 3 * se) if se else mean == target,
        "max_relative_drift": float(drift.max()),
        "blowup_fraction": float(np.mean([r["outcome"] == "blowup" for r in records])),
        "global_fraction": float(np.mean([r["outcome"] == "global" for r in records])),
    }


def _flag(value) -> bool:
    "Booleans, also as read back from CSV records."
    if isinstance(value, str):
        return value.strip().lower() == "true"

    return bool(value)


def _scatter_aggregate(records: List[dict]) -> List[dict]:
    rows = []
    for c in sorted({r["c"] for r in records}):
        flags = np.array([_flag(r["scatters"]) for r in records if r["c"] == c])
        p = float(flags.mean())
        rows.append(
            {
                "c": c,
                "M": int(flags.size),
                "p_scatter": p,
                "se": math.sqrt(p * (1 - p) / flags.size),
            }
        )

    return rows


def aggregate(records: List[dict], kind: str = "montecarlo") -> List[dict]:
    """Aggregates computed from per-path records only.

    :raises exceptions.InvalidConfig: no records or unknown kind
    """
    if not records:
        raise exceptions.InvalidConfig("Nothing to aggregate")

    if kind == "scatterprob":
        return _scatter_aggregate(records)

    if kind == "montecarlo":
        return [_mass_aggregate(records)]

    raise exceptions.InvalidConfig(f"No aggregation for {kind}")


def run_simulate(config: RunConfig) -> RunResult:
    "One trajectory with its diagnostics CSV."
    grid = config.grid.build()
    model = build_model(config, grid)
    path = model.new_path(config.seed, config.dt, config.steps)
    checkpoints = config.thresholds.checkpoints
    traj = simulate(
        _prepare(config, model, path),
        model,
        path,
        config.steps,
        config.thresholds.build(),
        config.record_every,
        checkpoints,
        config.coupling,
    )

    os.makedirs(config.out, exist_ok=True)
    series = os.path.join(config.out, "trajectory.csv")
    traj.to_csv(series)

    summary = {
        "outcome": traj.outcome.kind,
        "blowup_time": traj.outcome.time,
        "steps": len(traj.rows),
        "mass_initial": traj.rows[0]["mass"],
        "mass_final": traj.rows[-1]["mass"],
        "energy_initial": traj.rows[0]["energy"],
        "energy_final": traj.rows[-1]["energy"],
    }
    if len(checkpoints) >= 3:
        report = scattering_check(
            traj, model, path, checkpoints, config.thresholds.scattering_tol
        )
        summary["scatters"] = report.scatters
        summary["max_difference"] = report.max_difference

    if config.thresholds.sigma_n:
        summary["sigma_star"] = first_crossing(
            traj, model, path, config.thresholds.sigma_n
        )

    return _result(config, aggregates=[summary], files={"trajectory": series})


def _tasks(
    config: RunConfig, cs: Iterable[Optional[float]], with_scattering: bool
) -> List:
    data = config.echo()
    return [
        (data, index, c, with_scattering) for c in cs for index in range(config.paths)
    ]


def run_montecarlo(config: RunConfig) -> RunResult:
    """Per-path records and mass statistics: pathwise conservation for the
    conservative preset, the mass martingale for the nonconservative one.
    """
    logger.info("Monte-Carlo run over %d paths", config.paths)
    tasks = _tasks(config, [config.noise.c], with_scattering=False)
    records = sorted(_map(path_record, tasks, resolve_threads(config)), key=_order)
    return _result(config, records=records, aggregates=aggregate(records))


def run_martingale(config: RunConfig) -> RunResult:
    "Mass-martingale check (the Monte-Carlo run of the nonconservative preset)."
    if config.noise.preset != "nonconservative":
        raise exceptions.InvalidConfig("Martingale runs need nonconservative noise")

    return run_montecarlo(config)


def _order(record: dict):
    return (record["c"] if record["c"] is not None else -1.0, record["index"])


def run_scatterprob(config: RunConfig) -> RunResult:
    "Scattering probability per c over config.paths paths."
    if config.noise.preset != "nonconservative":
        raise exceptions.InvalidConfig("scatterprob needs the nonconservative preset")

    tasks = _tasks(config, config.noise.c_list, with_scattering=True)
    records = sorted(_map(path_record, tasks, resolve_threads(config)), key=_order)
    return _result(
        config, records=records, aggregates=aggregate(records, "scatterprob")
    )


def _comparison_frame(config: RunConfig) -> str:
    if config.frame != "direct":
        return config.frame

    if config.noise.preset == "nonconservative":
        return "nonconservative"

    return "conservative"


def _comparison_times(config: RunConfig, count: int = 8) -> List[float]:
    marks = {max(int(round(config.steps * j / count)), 1) for j in range(1, count + 1)}
    marks = sorted(marks)
    return [k * config.dt for k in marks]


def restart_identity_error(
    state: ZakharovState, sigma: float, model: NoiseModel, path: NoisePath
) -> float:
    "Relative H¹×L² error of restart_inverse ∘ refined_restart at σ."
    target = to_rescaled(state, model, path, "conservative")
    restarted = refined_restart(state, sigma, model, path)
    back = restart_inverse(restarted, sigma, model, path)
    return back.distance(target) / max(target.norm(), 1e-300)


def run_equivalence(config: RunConfig) -> RunResult:
    """Direct against rescaled integration under dt halving on one Brownian
    path (bridge refinement), and the refined-restart identity.
    """
    grid = config.grid.build()
    model = build_model(config, grid)
    frame = _comparison_frame(config)
    times = _comparison_times(config)
    path = model.new_path(config.seed, config.dt, config.steps)
    initial = _initial(config, grid)
    thresholds = config.thresholds.build()

    records, previous, coarse_direct = [], None, None
    for level in range(config.dt_levels):
        direct = simulate(initial, model, path, path.steps, thresholds, 1, times)
        rescaled = simulate(
            to_rescaled(initial, model, path, frame),
            model,
            path,
            path.steps,
            thresholds,
            1,
            times,
        )
        discrepancy = max(
            (direct.checkpoint(t).X - rescaled.checkpoint(t).X).h1_norm()
            for t in times
        )
        records.append(
            {
                "level": level,
                "dt": path.dt,
                "frame": frame,
                "discrepancy": discrepancy,
                "ratio": previous / discrepancy if previous and discrepancy else None,
            }
        )
        logger.info("Level %d (dt=%g): discrepancy %.3g", level, path.dt, discrepancy)
        previous = discrepancy
        coarse_direct = coarse_direct or direct
        path = path.refined()

    summary = {"frame": frame, "levels": config.dt_levels}
    if frame == "conservative":
        sigma = times[len(times) // 2]
        coarse = model.new_path(config.seed, config.dt, config.steps)
        state = coarse_direct.checkpoint(sigma)
        summary["restart_error"] = restart_identity_error(state, sigma, model, coarse)

    return _result(config, records=records, aggregates=[summary])


def run_groundstate(config: RunConfig) -> RunResult:
    "Constant table, identities, residuals and the variational constraints."
    rows = constant_table(config.lambdas)
    base = radial_constants(1.0)
    w_sq = base["w_sq_norm_sq"]
    grid = config.grid.build()
    _, _, tail = ground_state_field(1.0, grid)

    violations = 0
    for f, g in sample_subthreshold_pairs(grid, config.pairs, config.seed):
        if not variational_check(f, g).holds:
            violations += 1

    summary = {
        "threshold_norm": threshold_norm(),
        "threshold_energy": threshold_energy(),
        "energy_identity_error": abs(base["energy"] - 0.25 * w_sq) / w_sq,
        "gradient_identity_error": abs(base["grad_norm_sq"] - w_sq) / w_sq,
        "scale_error": max(abs(row["energy"] - base["energy"]) for row in rows),
        "torus_residual": ground_state_residual(1.0, grid),
        "torus_tail": tail,
        "pairs": config.pairs,
        "violations": violations,
    }
    return _result(config, records=rows, aggregates=[summary])


def run_norms(config: RunConfig) -> RunResult:
    "Norm rows of a stored block and/or the estimate-constant sweep."
    norms = config.norms
    if norms.specs and not norms.block:
        raise exceptions.InvalidConfig("norms.block is required to evaluate norms")

    if not norms.specs and norms.sweep is None:
        raise exceptions.InvalidConfig("norms: nothing to evaluate")

    records = []
    if norms.block:
        block = load_block(norms.block)
        if not (block.periodic or block.windowed):
            block = block.tapered()

        for spec in norms.specs:
            records.extend(evaluate(spec, block))

    aggregates = []
    if norms.sweep is not None:
        sweep = norms.sweep
        ctx = SweepContext(
            Grid(sweep.d, sweep.n, sweep.L),
            sweep.window,
            sweep.steps,
            sweep.K,
            config.seed,
            sweep.c,
            sweep.bound,
            sweep.constant_h,
        )
        aggregates = estimate_constant_sweep(
            ctx, sweep.estimates or ESTIMATES, sweep.samples
        )

    return _result(config, records=records, aggregates=aggregates)


def _variation_path(config: RunConfig) -> SampledPath:
    variation = config.variation
    if variation.source == "file":
        if not variation.path_file:
            raise exceptions.InvalidConfig("variation.path_file is required")

        return read_path_csv(variation.path_file)

    steps = int(round(max(variation.horizons) / variation.dt))
    beta = brownian_path(config.seed, variation.dt, steps)
    if variation.source == "bm":
        return beta

    return gbm_from_brownian(beta, variation.c)


def run_variation(config: RunConfig) -> RunResult:
    "V^p plateau, tail decay or the norm table of a single path."
    variation = config.variation
    if variation.experiment == "vp":
        records = []
        for process in ("gbm", "bm"):
            records += gbm_vp_experiment(
                variation.c,
                variation.p,
                variation.horizons,
                variation.M,
                variation.dt,
                config.seed,
                process,
            )
    elif variation.experiment == "tail":
        records = gbm_tail_experiment(
            variation.c_list,
            variation.C_prime,
            variation.M,
            variation.tail_horizon,
            variation.tail_steps,
            config.seed,
        )
    else:
        path = _variation_path(config)
        records = [
            {
                "p_variation": p_variation(path, variation.p),
                "vp_norm": vp_norm(path, variation.p),
                "hoelder": hoelder_norm(path, variation.alpha),
                "l6": l6_norm(path),
                "besov": besov_time_norm(path),
            }
        ]
        os.makedirs(config.out, exist_ok=True)
        bands = os.path.join(config.out, "besov_bands.csv")
        write_table_csv(besov_bands(path), bands)
        return _result(config, records=records, files={"besov_bands": bands})

    return _result(config, records=records)


RUNNERS: Dict[str, Callable[[RunConfig], RunResult]] = {
    "simulate": run_simulate,
    "montecarlo": run_montecarlo,
    "scatterprob": run_scatterprob,
    "equivalence": run_equivalence,
    "groundstate": run_groundstate,
    "norms": run_norms,
    "variation": run_variation,
}


def run(config: RunConfig) -> RunResult:
    "Run the experiment named by config.kind and persist it under config.out."
    result = RUNNERS[config.kind](config)
    result.save(config.out)
    return result
