#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# License: GPL

"""
p-variation, V^p, Hölder and temporal Besov norms of sampled scalar paths,
and the Monte-Carlo experiments on the geometric Brownian motion.
"""

import logging
import math
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid

from . import exceptions
from .noise import standard_normals
from .spectral import DyadicLadder
from .utils import read_csv, write_csv

logger = logging.getLogger(__name__)

Interval = Optional[Tuple[float, float]]

_VARIATION_PROCESS = 1


class SampledPath:
    """Scalar path x(t_k), interpolated piecewise linearly.

    :param times: strictly increasing sample times
    :param values: real or complex samples
    """

    def __init__(self, times, values):
        times = np.asarray(times, dtype=float)
        values = np.asarray(values)
        if times.ndim != 1 or times.shape != values.shape or times.size < 1:
            raise exceptions.InvalidPath(
                f"Times {times.shape} and values {values.shape} do not match"
            )

        if np.any(np.diff(times) <= 0):
            raise exceptions.InvalidPath("Sample times must be strictly increasing")

        if not np.all(np.isfinite(values)):
            raise exceptions.InvalidPath("Path values must be finite")

        self.times = times
        self.values = values

    def __repr__(self):
        return f"<SampledPath N={self.N} on [{self.start:.4g}, {self.stop:.4g}]>"

    def __len__(self):
        return self.times.size

    @property
    def N(self) -> int:
        "Number of intervals."
        return self.times.size - 1

    @property
    def start(self) -> float:
        return float(self.times[0])

    @property
    def stop(self) -> float:
        return float(self.times[-1])

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values) or not np.any(self.values.imag)

    def __call__(self, t):
        if np.iscomplexobj(self.values):
            return np.interp(t, self.times, self.values.real) + 1j * np.interp(
                t, self.times, self.values.imag
            )

        return np.interp(t, self.times, self.values)

    def scaled(self, factor) -> "SampledPath":
        return SampledPath(self.times, factor * self.values)

    def restrict(self, interval: Interval = None) -> "SampledPath":
        "Samples inside [a, b] plus the interpolated endpoints."
        if interval is None:
            return self

        a, b = interval
        if not a < b:
            raise exceptions.InvalidPath(f"Empty interval: [{a}, {b}]")

        inside = (self.times > a) & (self.times < b)
        times = np.concatenate(([a], self.times[inside], [b]))
        return SampledPath(times, self(times))

    def uniform(self, dt: Optional[float] = None) -> "SampledPath":
        "Resample on a uniform mesh (the median spacing by default)."
        if self.N == 0:
            return self

        dt = dt or float(np.median(np.diff(self.times)))
        count = max(int(round((self.stop - self.start) / dt)), 1)
        times = np.linspace(self.start, self.stop, count + 1)
        return SampledPath(times, self(times))

    def prepend(self, times, values) -> "SampledPath":
        return SampledPath(
            np.concatenate((np.asarray(times, dtype=float), self.times)),
            np.concatenate((np.asarray(values), self.values)),
        )


def _turning_points(values: np.ndarray) -> np.ndarray:
    "Endpoints and strict local extrema of a real sequence."
    if values.size < 3:
        return values

    keep = [values[0]]
    running = values[0]
    direction = 0
    for value in values[1:]:
        move = np.sign(value - running)
        if move == 0:
            continue

        if move == direction:
            keep[-1] = value
        else:
            keep.append(value)
            direction = move
        running = value

    if keep[-1] != values[-1]:
        keep.append(values[-1])

    return np.asarray(keep)


def _best_sums(values: np.ndarray, p: float) -> np.ndarray:
    "best[j] = max_{i<j} best[i] + |x_j − x_i|^p, best[0] = 0."
    best = np.zeros(values.size)
    for j in range(1, values.size):
        best[j] = np.max(best[:j] + np.abs(values[j] - values[:j]) ** p)

    return best


def _check_p(p: float):
    if not p >= 1:
        raise exceptions.InvalidPath(f"p must be >= 1: {p}")


def p_variation(path: SampledPath, p: float, interval: Interval = None) -> float:
    """|x|_{V^p}: supremum over partitions drawn from the sample points.

    Real paths are first reduced to their turning points; a monotone run
    contributes most as a single jump when p >= 1.
    """
    _check_p(p)
    path = path.restrict(interval)
    if path.N == 0:
        return 0.0

    values = path.values
    if path.is_real:
        values = _turning_points(np.real(values))

    return float(_best_sums(values, p)[-1] ** (1.0 / p))


def vp_norm(path: SampledPath, p: float, interval: Interval = None) -> float:
    "‖x‖_{V^p} = sup over partitions of (Σ|Δx|^p + |x(t_last)|^p)^{1/p}."
    _check_p(p)
    path = path.restrict(interval)
    best = _best_sums(path.values, p)
    return float(np.max(best + np.abs(path.values) ** p) ** (1.0 / p))


def hoelder_norm(path: SampledPath, alpha: float, interval: Interval = None) -> float:
    "sup_{s<t} |x(t) − x(s)|/|t − s|^α over sample pairs."
    if not 0 < alpha <= 1:
        raise exceptions.InvalidPath(f"Hölder exponent must lie in (0, 1]: {alpha}")

    path = path.restrict(interval)
    best = 0.0
    for j in range(1, len(path)):
        gaps = path.times[j] - path.times[:j]
        ratio = np.abs(path.values[j] - path.values[:j]) / gaps**alpha
        best = max(best, float(ratio.max()))

    return best


def lp_time_norm(path: SampledPath, p: float, interval: Interval = None) -> float:
    "‖x‖_{L^p(I)} by the trapezoid rule on a uniform resampling."
    uniform = path.restrict(interval).uniform()
    values = np.abs(uniform.values)
    if np.isinf(p):
        return float(values.max())

    return float(trapezoid(values**p, uniform.times) ** (1.0 / p))


def l6_norm(path: SampledPath, interval: Interval = None) -> float:
    return lp_time_norm(path, 6, interval)


def _temporal_bands(path: SampledPath, interval: Interval, dt: Optional[float]):
    """Band-limited pieces P^{(t)}_λ x on the window (λ = 1 is the low block).

    The window is extended by reflection so that constant signals stay in the
    low block.
    """
    uniform = path.restrict(interval).uniform(dt)
    if uniform.N < 2:
        raise exceptions.InvalidPath("Besov norms need at least two intervals")

    step = uniform.times[1] - uniform.times[0]
    samples = uniform.values[:-1]
    mirrored = np.concatenate((samples, samples[::-1]))
    tau = np.abs(2 * np.pi * np.fft.fftfreq(mirrored.size, d=step))

    top = 1
    while 1.25 * top < tau.max():
        top *= 2

    ladder = DyadicLadder(top)
    spectrum = np.fft.fft(mirrored)
    for lam in ladder.lambdas:
        piece = np.fft.ifft(spectrum * ladder.chi(lam, tau))[: samples.size]
        yield lam, piece, step


def besov_bands(
    path: SampledPath,
    s: float = 1.0 / 8.0,
    p: float = 6.0,
    interval: Interval = None,
    dt: Optional[float] = None,
    homogeneous: bool = False,
) -> List[dict]:
    "Rows {lambda, value = λ^s‖P^{(t)}_λ x‖_{L^p(I)}}; the low block is λ = 1."
    rows = []
    for lam, piece, step in _temporal_bands(path, interval, dt):
        if homogeneous and lam == 1:
            continue

        if np.isinf(p):
            norm = float(np.abs(piece).max())
        else:
            norm = float((step * np.sum(np.abs(piece) ** p)) ** (1.0 / p))
        rows.append({"lambda": lam, "value": lam**s * norm})

    return rows


def besov_time_norm(
    path: SampledPath,
    s: float = 1.0 / 8.0,
    p: float = 6.0,
    q: float = np.inf,
    interval: Interval = None,
    dt: Optional[float] = None,
) -> float:
    "‖x‖_{B^s_{p,q}(I)}: ℓ^q over the temporal bands of λ^s‖P^{(t)}_λ x‖_{L^p}."
    values = np.array([row["value"] for row in besov_bands(path, s, p, interval, dt)])
    if np.isinf(q):
        return float(values.max())

    return float(np.sum(values**q) ** (1.0 / q))


def interpolation_ratio(path: SampledPath, interval: Interval = None) -> float:
    "‖x‖_{B^{1/8}_{6,∞}} / (‖x‖_{L^15}^{5/8}(‖x‖_{L³}^{3/8} + |x|_{V³}^{3/8}))."
    besov = besov_time_norm(path, interval=interval)
    right = lp_time_norm(path, 15, interval) ** 0.625 * (
        lp_time_norm(path, 3, interval) ** 0.375
        + p_variation(path, 3, interval) ** 0.375
    )
    return besov / right if right > 0 else 0.0


def embedding_bands(path: SampledPath, p: float = 3.0, interval: Interval = None):
    "Homogeneous bands λ^{1/p}‖P^{(t)}_λ x‖_{L^p} next to |x|_{V^p}."
    bands = besov_bands(path, 1.0 / p, p, interval, homogeneous=True)
    return {
        "vp": p_variation(path, p, interval),
        "max_band": max((row["value"] for row in bands), default=0.0),
        "bands": bands,
    }


def brownian_path(
    seed: int, dt: float, steps: int, index: int = 0, mode: int = 0
) -> SampledPath:
    "β on the mesh k·dt, keyed like the noise engine (process 1)."
    normals = standard_normals(seed, index, 0, _VARIATION_PROCESS, mode, 0, steps)
    values = np.concatenate(([0.0], np.cumsum(math.sqrt(dt) * normals)))
    return SampledPath(dt * np.arange(steps + 1), values)


def gbm_from_brownian(beta: SampledPath, c: float) -> SampledPath:
    "h_c(t) = exp(−2cβ(t) − 2c²t)."
    return SampledPath(
        beta.times, np.exp(-2 * c * beta.values - 2 * c**2 * beta.times)
    )


def extend_gbm(path: SampledPath) -> SampledPath:
    "Attach h(t) = t + 1 on [−1, 0) (and 0 before) to a path starting at 0."
    return extend_gbm_tail(path, 1.0)


def extend_gbm_tail(path: SampledPath, c: float) -> SampledPath:
    "Attach the prefix c²t + 1 on [−1/c², 0)."
    if path.start != 0:
        raise exceptions.InvalidPath(f"Expected a path starting at 0: {path.start}")

    if not c > 0:
        raise exceptions.InvalidPath(f"c must be positive: {c}")

    return path.prepend([-1.0 / c**2], [0.0])


def _percentile_row(values: Sequence[float]) -> dict:
    values = np.asarray(values)
    return {
        "samples": int(values.size),
        "median": float(np.median(values)),
        "p90": float(np.percentile(values, 90)),
    }


def gbm_vp_experiment(
    c: float = 1.0,
    p: float = 3.0,
    horizons: Sequence[float] = (10.0, 20.0, 40.0),
    M: int = 200,
    dt: float = 1e-2,
    seed: int = 0,
    process: str = "gbm",
    extended: bool = False,
) -> List[dict]:
    """Median and 90th percentile of |h_c|_{V^p,[0,T]} per horizon T.

    process="bm" runs the same statistic on β itself.
    """
    if list(horizons) != sorted(horizons):
        raise exceptions.InvalidPath(f"Horizons must increase: {horizons}")

    if process not in ("gbm", "bm"):
        raise exceptions.InvalidPath(f"Unknown process: {process}")

    steps = int(round(max(horizons) / dt))
    collected = {T: [] for T in horizons}
    for index in range(M):
        path = brownian_path(seed, dt, steps, index)
        if process == "gbm":
            path = gbm_from_brownian(path, c)

        for T in horizons:
            window = path.restrict((0.0, T))
            if extended:
                window = extend_gbm_tail(window, c)
            collected[T].append(p_variation(window, p))

    logger.info("V^%s experiment over %d paths (c=%s)", p, M, c)
    return [
        {"process": process, "c": c, "p": p, "horizon": T, **_percentile_row(v)}
        for T, v in collected.items()
    ]


def tail_statistics(path: SampledPath, interval: Interval = None) -> float:
    "‖h‖_{L⁶} + ‖h‖_{B^{1/8}_{6,∞}} on the window."
    return l6_norm(path, interval) + besov_time_norm(path, interval=interval)


def tail_threshold(c: float, C_prime: float) -> float:
    "c^{1/12}·C′/3, the threshold left after Brownian rescaling."
    return c ** (1.0 / 12.0) * C_prime / 3.0


def gbm_tail_sample(
    c: float,
    seed: int,
    index: int,
    stream: int = 0,
    horizon: float = 4.0,
    steps: int = 800,
) -> SampledPath:
    """h_c on [−1/c², horizon/c²] with the prefix c²t + 1 attached.

    :param stream: Brownian stream (the mode slot of the noise key)
    """
    T = horizon / c**2
    beta = brownian_path(seed, T / steps, steps, index, mode=stream)
    return extend_gbm_tail(gbm_from_brownian(beta, c), c)


def gbm_tail_experiment(
    c_list: Iterable[float] = (0.5, 1.0, 2.0, 4.0),
    C_prime: float = 2.0,
    M: int = 200,
    horizon: float = 4.0,
    steps: int = 800,
    seed: int = 0,
) -> List[dict]:
    """Empirical P(‖h_c‖_{L⁶} + ‖h_c‖_{B^{1/8}_{6,∞}} >= C′) per c.

    h_c lives on its natural time scale: the window is [−1/c², horizon/c²]
    with the same number of steps after 0 for every c. Each c uses its own
    Brownian stream.
    """
    rows = []
    for stream, c in enumerate(c_list):
        values = [
            tail_statistics(gbm_tail_sample(c, seed, index, stream, horizon, steps))
            for index in range(M)
        ]
        values = np.asarray(values)
        rows.append(
            {
                "c": c,
                "C_prime": C_prime,
                "probability": float(np.mean(values >= C_prime)),
                "threshold": tail_threshold(c, C_prime),
                **_percentile_row(values),
            }
        )
        logger.debug("Tail experiment c=%s: %s", c, rows[-1])

    return rows


def read_path_csv(path: str) -> SampledPath:
    """
    :raises exceptions.InvalidPath: missing t/x columns
    """
    rows = read_csv(path)
    try:
        times = [float(row["t"]) for row in rows]
        values = [float(row["x"]) for row in rows]
    except (KeyError, TypeError, ValueError):
        raise exceptions.InvalidPath(f"Expected numeric t,x columns: {path}") from None

    return SampledPath(times, values)


def write_table_csv(rows: List[dict], path: str):
    write_csv(rows, path)
