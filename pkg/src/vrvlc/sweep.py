"""Connectivity and SINR studies over head orientations, users and headset designs.

Every study is cut into a fixed list of independent tasks (orientation blocks
or single users). Tasks run serially or on a process pool and their outputs
are merged in task order, so results do not depend on the worker count.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .arena import (
    Arena,
    OrientationTrace,
    assign_transmitter,
    default_arena,
    sample_orientations,
    user_grid,
)
from .channel import ChannelParams, DEFAULT_R_HEADSET, DEFAULT_R_PD, noise_variance, received_power
from .combining import COMBINERS, SinrReport, branch_sinr, egc_sinr, mrc_sinr, to_db
from .headset import HeadsetLayout, HeadsetParams, Orientation, build_layout, pose_arrays

log = logging.getLogger(__name__)

BLOCK_SIZE = 2048
Z95 = 1.959963984540054

COVERAGE_THETA_DS = (15.0, 20.0, 30.0, 40.0, 60.0)
SWEEP_ALPHAS = (1.5, 2.0, 2.5, 3.0)


def coarse_coverage_orientations() -> np.ndarray:
    """Roll/pitch in 5 deg steps over [-90, 90], yaw in 10 deg steps over [0, 359]."""
    return sample_orientations((0, 359), (-90, 90), (-90, 90), step=(10, 5, 5))


def full_coverage_orientations() -> np.ndarray:
    """The exhaustive 1-degree grid: 360 x 181 x 181 orientations."""
    return sample_orientations((0, 359), (-90, 90), (-90, 90), step=1)


def random_orientations(count: int = 500, seed: int = 1, tilt: float = 60.0) -> np.ndarray:
    return sample_orientations(
        (-180, 180), (-tilt, tilt), (-tilt, tilt), count=count, mode="random", seed=seed
    )


def fov_for(alpha: float, theta_d: float) -> float:
    """Detector half-angle FOV implied by alpha = 2*beta/theta_d."""
    return alpha * theta_d / 2.0


def with_fov(params: ChannelParams, alpha: float, theta_d: float) -> ChannelParams:
    beta = fov_for(alpha, theta_d)
    if not 0 < beta <= 90:
        raise ValueError(f"alpha={alpha} with theta_d={theta_d} gives FOV half-angle {beta} deg > 90")
    return replace(params, fov_half_angle=beta)


def _run(fn: Callable, tasks: Sequence, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


# -- per-sample evaluation ------------------------------------------------------


def link_powers(
    layout: HeadsetLayout,
    orientations: np.ndarray,
    user_position: Sequence[float],
    arena: Arena,
    params: ChannelParams,
) -> tuple[np.ndarray, int]:
    """Received power (K, M, N) for K orientations, and the serving transmitter."""
    serving = assign_transmitter(user_position, arena)
    pos, nrm = pose_arrays(layout, orientations, user_position)
    return received_power(arena.transmitters, pos, nrm, params), serving


def active_mask(layout, orientations, user_position, arena, params) -> np.ndarray:
    """True where at least one detector sees the serving transmitter."""
    p, serving = link_powers(layout, orientations, user_position, arena, params)
    return np.any(p[:, serving, :] > 0.0, axis=-1)


def link_active(
    layout: HeadsetLayout,
    orientation: Orientation,
    user_position: Sequence[float],
    arena: Arena,
    params: ChannelParams,
) -> bool:
    return bool(active_mask(layout, orientation.as_array()[None, :], user_position, arena, params)[0])


def sinr_samples(layout, orientations, user_position, arena, params) -> dict[str, np.ndarray]:
    """Per-orientation SINR (linear) for each combiner plus per-branch detail."""
    p, serving = link_powers(layout, orientations, user_position, arena, params)
    signal = p[:, serving, :]
    interference = np.delete(p, serving, axis=1).swapaxes(1, 2)
    noise = noise_variance(p.sum(axis=1), params)
    R = params.responsivity
    per_branch = branch_sinr(signal, interference, noise, R)
    best = np.argmax(per_branch, axis=-1)
    return {
        "egc": egc_sinr(signal, interference, noise, R),
        "sbc": np.take_along_axis(per_branch, best[:, None], axis=-1)[:, 0],
        "mrc": mrc_sinr(signal, interference, noise, R),
        "best_branch": best,
        "per_branch": per_branch,
    }


# -- aggregation ----------------------------------------------------------------


@dataclass(frozen=True)
class SweepPoint:
    theta_d: float
    alpha: float
    combiner: str
    n_pd: int
    mean: float  # linear SINR
    half_width: float  # 95 % normal-approximation half-width, linear
    min: float
    max: float
    n_samples: int

    @property
    def mean_db(self) -> float:
        return to_db(self.mean)

    @property
    def ci95_db(self) -> float:
        """Upper half-width of the confidence interval expressed in dB."""
        if self.mean <= 0:
            return math.inf
        return to_db(1.0 + self.half_width / self.mean)


@dataclass
class SweepResult:
    points: list[SweepPoint] = field(default_factory=list)
    skipped: list[tuple[float, float]] = field(default_factory=list)

    def get(self, combiner: str, theta_d: float | None = None, alpha: float | None = None) -> list[SweepPoint]:
        return [
            p
            for p in self.points
            if p.combiner == combiner
            and (theta_d is None or p.theta_d == theta_d)
            and (alpha is None or p.alpha == alpha)
        ]


def aggregate(samples: np.ndarray) -> tuple[float, float, float, float, int]:
    """(mean, 95 % half-width, min, max, n) of linear SINR samples."""
    x = np.asarray(samples, dtype=float)
    n = x.size
    if n == 0:
        raise ValueError("cannot aggregate an empty sample")
    mean = float(np.mean(x))
    sd = float(np.std(x, ddof=1)) if n > 1 else 0.0
    return mean, Z95 * sd / math.sqrt(n), float(np.min(x)), float(np.max(x)), n


# -- connectivity -----------------------------------------------------------------


@dataclass(frozen=True)
class CoverageSpec:
    headset: HeadsetParams
    alpha: float
    orientations: np.ndarray = field(default_factory=coarse_coverage_orientations, compare=False)
    user_position: tuple[float, float, float] = (1.25, 1.25, 1.33)
    arena: Arena | None = None
    params: ChannelParams = field(default_factory=ChannelParams)

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        with_fov(self.params, self.alpha, self.headset.theta_d)


def _coverage_task(task) -> int:
    layout, block, user, arena, params = task
    return int(np.count_nonzero(active_mask(layout, block, user, arena, params)))


def connectivity_sweep(spec: CoverageSpec, workers: int = 1) -> float:
    """Percentage of orientations for which the serving link is up."""
    orients = np.asarray(spec.orientations, dtype=float)
    if orients.size == 0:
        raise ValueError("orientation set is empty")
    arena = spec.arena or default_arena()
    params = with_fov(spec.params, spec.alpha, spec.headset.theta_d)
    layout = build_layout(spec.headset)
    tasks = [
        (layout, orients[i : i + BLOCK_SIZE], spec.user_position, arena, params)
        for i in range(0, len(orients), BLOCK_SIZE)
    ]
    n_up = sum(_run(_coverage_task, tasks, workers))
    return 100.0 * n_up / len(orients)


# -- SINR studies -----------------------------------------------------------------


def _sinr_task(task) -> dict[str, np.ndarray]:
    layout, orients, user, arena, params, combiners = task
    s = sinr_samples(layout, orients, user, arena, params)
    return {c: s[c] for c in combiners}


def _sinr_study(
    configs: Iterable[tuple[float, float]],
    arena: Arena,
    combiners: Sequence[str],
    orientations: np.ndarray,
    users: Sequence[Sequence[float]],
    params: ChannelParams,
    r_headset: float,
    r_pd: float,
    workers: int,
) -> SweepResult:
    for c in combiners:
        if c not in COMBINERS:
            raise ValueError(f"unknown combiner {c!r}")
    if not users:
        raise ValueError("user set is empty")
    orients = np.asarray(orientations, dtype=float)
    if orients.size == 0:
        raise ValueError("orientation set is empty")
    result = SweepResult()
    feasible = []
    for theta_d, alpha in configs:
        try:
            p = with_fov(params, alpha, theta_d)
        except ValueError:
            log.warning("skipping infeasible point theta_d=%g alpha=%g", theta_d, alpha)
            result.skipped.append((theta_d, alpha))
            continue
        layout = build_layout(HeadsetParams(r_headset, r_pd, theta_d))
        feasible.append((theta_d, alpha, layout, p))

    tasks = [
        (layout, orients, tuple(u), arena, p, tuple(combiners))
        for _, _, layout, p in feasible
        for u in users
    ]
    log.info("evaluating %d tasks (%d samples each) on %d worker(s)", len(tasks), len(orients), workers)
    outputs = _run(_sinr_task, tasks, workers)

    nu = len(users)
    for k, (theta_d, alpha, layout, _) in enumerate(feasible):
        chunk = outputs[k * nu : (k + 1) * nu]
        for c in combiners:
            samples = np.concatenate([o[c] for o in chunk])
            mean, hw, lo, hi, n = aggregate(samples)
            result.points.append(SweepPoint(theta_d, alpha, c, layout.n_pd, mean, hw, lo, hi, n))
        log.info("theta_d=%g alpha=%g done", theta_d, alpha)
    return result


def sinr_alpha_sweep(
    alphas: Sequence[float],
    theta_ds: Sequence[float],
    arena: Arena,
    combiners: Sequence[str] = COMBINERS,
    orientations: np.ndarray | None = None,
    users: Sequence[Sequence[float]] | None = None,
    params: ChannelParams | None = None,
    r_headset: float = DEFAULT_R_HEADSET,
    r_pd: float = DEFAULT_R_PD,
    workers: int = 1,
) -> SweepResult:
    """Mean SINR per (theta_d, alpha, combiner); infeasible FOVs are skipped and listed."""
    return _sinr_study(
        [(t, a) for t in theta_ds for a in alphas],
        arena,
        combiners,
        random_orientations() if orientations is None else orientations,
        user_grid(arena, 11) if users is None else users,
        params or ChannelParams(),
        r_headset,
        r_pd,
        workers,
    )


def npd_study(
    theta_ds: Sequence[float] = COVERAGE_THETA_DS,
    alpha: float = 1.5,
    arena: Arena | None = None,
    combiners: Sequence[str] = ("mrc", "sbc"),
    orientations: np.ndarray | None = None,
    users: Sequence[Sequence[float]] | None = None,
    params: ChannelParams | None = None,
    r_headset: float = DEFAULT_R_HEADSET,
    r_pd: float = DEFAULT_R_PD,
    workers: int = 1,
) -> SweepResult:
    """Mean SINR against detector count, FOV tied to spacing by `alpha`.

    Points come back sorted by detector count.
    """
    arena = arena or default_arena()
    res = _sinr_study(
        [(t, alpha) for t in theta_ds],
        arena,
        combiners,
        random_orientations() if orientations is None else orientations,
        user_grid(arena, 11) if users is None else users,
        params or ChannelParams(),
        r_headset,
        r_pd,
        workers,
    )
    res.points.sort(key=lambda p: (p.n_pd, COMBINERS.index(p.combiner)))
    return res


def trace_replay(
    trace: OrientationTrace,
    user_position: Sequence[float],
    arena: Arena,
    layout: HeadsetLayout,
    params: ChannelParams,
) -> list[SinrReport]:
    """One SINR report per trace sample, in trace order."""
    if len(trace) == 0:
        raise ValueError("trace is empty")
    s = sinr_samples(layout, trace.as_array(), user_position, arena, params)
    return [
        SinrReport(
            sinr_egc=float(s["egc"][k]),
            sinr_sbc=float(s["sbc"][k]),
            sinr_mrc=float(s["mrc"][k]),
            per_branch_sinr=tuple(float(v) for v in s["per_branch"][k]),
            best_branch=int(s["best_branch"][k]),
        )
        for k in range(len(trace))
    ]
