"""Seeded Monte Carlo runs of the homodyne + Bayesian estimation pipeline.

Work units are single trials keyed by ``(state_index, theta_index, rep)``.
Each unit draws from its own Philox stream (see :func:`stream_id`), so the
order or concurrency of execution never changes a result.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import bayes
from .bayes import DEFAULT_GRID_POINTS, PosteriorGrid
from .bounds import HALF_PI, PhaseInterval, beyond_sql_interval, fisher_information, ocrb, qcrb, sql
from .measurement import sample_homodyne
from .state import SqueezedThermalState, mean_photon_number, purity


def stream_id(state_index: int, theta_index: int, rep: int) -> int:
    if not (0 <= state_index < 1 << 16 and 0 <= theta_index < 1 << 16 and 0 <= rep < 1 << 32):
        raise ValueError("trial key out of range")
    return (state_index << 48) | (theta_index << 32) | rep


def default_thetas(count: int = 12) -> tuple[float, ...]:
    """Cell-centred phases covering [0, pi/2] with ``count`` equal cells."""
    step = HALF_PI / count
    return tuple((k + 0.5) * step for k in range(count))


@dataclass(frozen=True)
class TrialResult:
    theta_true: float
    rep: int
    map_estimate: float
    posterior_variance: float


def run_trial(
    state: SqueezedThermalState,
    theta_true: float,
    n_samples: int,
    seed: int,
    stream: int = 0,
    grid_points: int = DEFAULT_GRID_POINTS,
    rep: int = 0,
) -> TrialResult:
    """Sample, build the posterior, and summarise it."""
    post = bayes.posterior(sample_homodyne(state, theta_true, n_samples, seed, stream), grid_points)
    return TrialResult(
        theta_true=float(theta_true),
        rep=rep,
        map_estimate=bayes.map_estimate(post),
        posterior_variance=bayes.posterior_variance(post),
    )


def jackknife_variance_stderr(values) -> Optional[float]:
    """Jackknife standard error of the (ddof=1) sample variance."""
    v = np.asarray(values, dtype=float)
    n = v.size
    if n < 3:
        return None
    loo = np.array([np.var(np.delete(v, i), ddof=1) for i in range(n)])
    return float(math.sqrt((n - 1) / n * np.sum((loo - loo.mean()) ** 2)))


@dataclass(frozen=True)
class ThetaAggregate:
    theta: float
    trials: tuple[TrialResult, ...]
    mean_estimate: float
    emp_var: Optional[float]
    mean_post_var: float
    stderr: Optional[float]
    fisher: float
    inv_nf: Optional[float]
    sql: float
    ocrb: float
    qcrb: float

    @property
    def repetitions(self) -> int:
        return len(self.trials)


def aggregate(state: SqueezedThermalState, theta: float, n_samples: int, trials) -> ThetaAggregate:
    trials = tuple(sorted(trials, key=lambda t: t.rep))
    est = np.array([t.map_estimate for t in trials])
    f = fisher_information(state, theta)
    return ThetaAggregate(
        theta=float(theta),
        trials=trials,
        mean_estimate=float(est.mean()),
        emp_var=float(np.var(est, ddof=1)) if est.size >= 2 else None,
        mean_post_var=float(np.mean([t.posterior_variance for t in trials])),
        stderr=jackknife_variance_stderr(est),
        fisher=f,
        inv_nf=1.0 / (n_samples * f) if f > 0 else None,
        sql=sql(mean_photon_number(state), n_samples),
        ocrb=ocrb(state, n_samples),
        qcrb=qcrb(state, n_samples),
    )


def _run_units(units, workers: int):
    def call(unit):
        return run_trial(**unit)

    if workers <= 1:
        return [call(u) for u in units]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(call, units))


def _units(state, thetas, n_samples, repetitions, seed, grid_points, state_index=0):
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    return [
        dict(
            state=state,
            theta_true=theta,
            n_samples=n_samples,
            seed=seed,
            stream=stream_id(state_index, ti, rep),
            grid_points=grid_points,
            rep=rep,
        )
        for ti, theta in enumerate(thetas)
        for rep in range(repetitions)
    ]


def run_repeated(
    state: SqueezedThermalState,
    theta_true: float,
    n_samples: int,
    repetitions: int,
    seed: int,
    grid_points: int = DEFAULT_GRID_POINTS,
    workers: int = 1,
) -> ThetaAggregate:
    units = _units(state, [theta_true], n_samples, repetitions, seed, grid_points)
    return aggregate(state, theta_true, n_samples, _run_units(units, workers))


@dataclass(frozen=True)
class ExperimentReport:
    state: SqueezedThermalState
    n_samples: int
    aggregates: tuple[ThetaAggregate, ...]

    @property
    def trials(self) -> tuple[TrialResult, ...]:
        return tuple(t for a in self.aggregates for t in a.trials)


def sweep_theta(
    state: SqueezedThermalState,
    thetas: Sequence[float],
    n_samples: int,
    repetitions: int,
    seed: int,
    grid_points: int = DEFAULT_GRID_POINTS,
    workers: int = 1,
    state_index: int = 0,
) -> ExperimentReport:
    """Repeated trials at each phase, with the bound ladder attached per phase."""
    thetas = [float(t) for t in thetas]
    if not thetas:
        raise ValueError("theta list is empty")
    bad = [t for t in thetas if not 0.0 <= t <= HALF_PI]
    if bad:
        raise ValueError(f"thetas outside [0, pi/2]: {bad}")
    units = _units(state, thetas, n_samples, repetitions, seed, grid_points, state_index)
    results = _run_units(units, workers)
    aggs = tuple(
        aggregate(state, theta, n_samples, results[i * repetitions : (i + 1) * repetitions])
        for i, theta in enumerate(thetas)
    )
    return ExperimentReport(state, n_samples, aggs)


def empirical_interval_width(report: ExperimentReport, cell_width: float) -> float:
    """Widest contiguous run of phases whose empirical variance beats the SQL, in radians.

    Each phase stands for one cell of width ``cell_width``, so the answer is
    only resolved to that granularity.
    """
    best = run = 0
    for a in report.aggregates:
        if a.emp_var is not None and a.emp_var < a.sql:
            run += 1
            best = max(best, run)
        else:
            run = 0
    return best * cell_width


@dataclass(frozen=True)
class PurityRow:
    purity: float
    r: float
    r_prime: float
    interval: PhaseInterval
    delta_theta_empirical: Optional[float]
    cell_width: Optional[float]

    @property
    def delta_theta_theory(self) -> float:
        return self.interval.width


def purity_scan(
    states: Sequence[SqueezedThermalState],
    n_samples: int,
    repetitions: int,
    seed: int,
    thetas: Optional[Sequence[float]] = None,
    grid_points: int = DEFAULT_GRID_POINTS,
    workers: int = 1,
    simulate: bool = True,
) -> list[PurityRow]:
    """Beyond-SQL interval width against purity, from theory and from a theta sweep.

    ``thetas`` must be equally spaced cell centres (the default twelve-point
    grid is); the empirical width is counted in cells.
    """
    if not states:
        raise ValueError("purity scan needs at least one state")
    thetas = tuple(thetas) if thetas is not None else default_thetas()
    cell = (thetas[1] - thetas[0]) if len(thetas) > 1 else HALF_PI
    rows = []
    for si, st in enumerate(states):
        emp = None
        if simulate:
            rep = sweep_theta(st, thetas, n_samples, repetitions, seed, grid_points, workers, state_index=si)
            emp = empirical_interval_width(rep, cell)
        rows.append(PurityRow(purity(st), st.r, st.r_prime, beyond_sql_interval(st), emp, cell if simulate else None))
    return rows


def posterior_curves(
    state: SqueezedThermalState,
    theta_true: float,
    n_values: Sequence[int],
    seed: int,
    grid_points: int = DEFAULT_GRID_POINTS,
    stream: int = 0,
) -> dict[int, PosteriorGrid]:
    """Posteriors after the first ``N`` outcomes of one record, for each ``N``."""
    record = sample_homodyne(state, theta_true, max(n_values), seed, stream)
    return {int(n): bayes.posterior(record.head(int(n)), grid_points) for n in n_values}
