"""Event-driven Monte Carlo simulation of the fluid queue.

The phase process jumps at exponential clocks (rate lam up, min(i, c)*mu
down); between jumps the level moves linearly at the phase's net rate and is
reflected at zero.  The time-stationary law is estimated by sampling at a
fixed stride, which is what the analytic pipeline's stationary quantities
refer to.  Randomness comes from a counter-based generator (Philox), so runs
are reproducible bit-for-bit across backends and trivially parallel across
seeds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _sim_core
from .errors import InsufficientSamplesError
from .model import ModelParams, require_stable

_CHUNK = 1 << 20  # random numbers drawn per kernel call


@dataclass(frozen=True)
class SimConfig:
    """Simulation run description."""

    params: ModelParams
    horizon: float               # total simulated time
    seed: int
    warmup: float = 0.0          # time discarded before sampling starts
    sample_stride: float = 1.0   # time between stationary samples
    n_blocks: int = 50           # blocks for variance estimates and bootstrap
    tracked_phases: int = 32     # per-phase statistics capped at this many phases

    def __post_init__(self):
        if not self.horizon > self.warmup >= 0.0:
            raise ValueError("need horizon > warmup >= 0")
        if self.sample_stride <= 0.0:
            raise ValueError("sample_stride must be positive")


@dataclass(frozen=True)
class TailFit:
    """Fitted exponential tail rate with a bootstrap confidence interval."""

    rate: float
    ci_low: float
    ci_high: float
    window: tuple
    n_window: int


@dataclass(frozen=True)
class SurvivalEstimate:
    """Empirical stationary law of the fluid level.

    grid/survival tabulate P(level > x); phase_survival[i] tabulates
    P(phase = i, level > x) for the tracked phases.  block_counts holds one
    histogram per time block (for block bootstrap).  The raw samples are kept
    so that windows can be re-fitted later.
    """

    config: SimConfig
    grid: np.ndarray
    survival: np.ndarray
    phase_survival: np.ndarray
    n_samples: int
    n_events: int
    zero_fraction: float
    phase_frequency: np.ndarray
    sojourn_fraction: np.ndarray          # blocks x phases occupation-time fractions
    block_counts: np.ndarray
    fitted: TailFit | None
    samples_level: np.ndarray = field(repr=False)
    samples_phase: np.ndarray = field(repr=False)


def simulate(config: SimConfig, fit: bool = True) -> SurvivalEstimate:
    """Run the simulation described by config.

    Identical (config, seed) pairs produce identical outputs regardless of
    the numba/numpy backend choice.
    """
    require_stable(config.params)
    p = config.params
    rng = np.random.Generator(np.random.Philox(config.seed))
    n_max = int((config.horizon - config.warmup) / config.sample_stride) + 2
    out_level = np.empty(n_max)
    out_phase = np.empty(n_max, np.int64)
    sojourn = np.zeros((config.n_blocks, config.tracked_phases + 1))
    block_len = config.horizon / config.n_blocks

    phase, level, t = 0, 0.0, 0.0
    next_sample = config.warmup + config.sample_stride
    n_written = 0
    n_events = 0
    while t < config.horizon:
        exps = rng.standard_exponential(_CHUNK)
        us = rng.random(_CHUNK)
        phase, level, t, next_sample, n_written, used = _sim_core.advance(
            phase, level, t, config.horizon, config.warmup, config.sample_stride,
            next_sample, n_written, p.lam, p.mu, p.c, p.r, exps, us,
            out_level, out_phase, sojourn, block_len, config.n_blocks,
        )
        n_events += used

    levels = out_level[:n_written]
    phases = out_phase[:n_written]
    grid, survival, phase_survival, block_counts = _tabulate(config, levels, phases)
    freq = np.bincount(phases, minlength=config.tracked_phases + 1) / max(n_written, 1)
    est = SurvivalEstimate(
        config=config,
        grid=grid,
        survival=survival,
        phase_survival=phase_survival,
        n_samples=n_written,
        n_events=n_events,
        zero_fraction=float(np.mean(levels == 0.0)) if n_written else 0.0,
        phase_frequency=freq,
        sojourn_fraction=sojourn / sojourn.sum(),
        block_counts=block_counts,
        fitted=None,
        samples_level=levels,
        samples_phase=phases,
    )
    if fit and n_written:
        try:
            est = _with_fit(est, fit_tail(est))
        except InsufficientSamplesError:
            pass
    return est


def _with_fit(est: SurvivalEstimate, fit: TailFit) -> SurvivalEstimate:
    import dataclasses

    return dataclasses.replace(est, fitted=fit)


def _tabulate(config: SimConfig, levels: np.ndarray, phases: np.ndarray):
    n_bins = 2048
    top = float(levels.max()) if levels.size else 1.0
    top = max(top, 1e-9)  # guard against an all-zero sample set
    edges = np.linspace(0.0, top * (1 + 1e-9), n_bins + 1)
    grid = edges[1:]
    n = max(levels.size, 1)
    counts, _ = np.histogram(levels, bins=edges)
    survival = 1.0 - np.cumsum(counts) / n
    phase_survival = np.empty((config.tracked_phases + 1, n_bins))
    for i in range(config.tracked_phases + 1):
        ci, _ = np.histogram(levels[phases == i], bins=edges)
        phase_survival[i] = (np.sum(phases == i) - np.cumsum(ci)) / n
    # per-block histograms for the bootstrap
    block_of = np.minimum(
        (np.arange(levels.size) * config.n_blocks) // max(levels.size, 1),
        config.n_blocks - 1,
    )
    block_counts = np.zeros((config.n_blocks, n_bins))
    for b in range(config.n_blocks):
        block_counts[b], _ = np.histogram(levels[block_of == b], bins=edges)
    return grid, survival, phase_survival, block_counts


def default_window(est: SurvivalEstimate, s_high: float = 3e-2, s_low: float = 1e-4):
    """Window [x_lo, x_hi] spanning the given survival levels."""
    levels = np.sort(est.samples_level)
    n = levels.size
    x_lo = levels[min(n - 1, int(n * (1.0 - s_high)))]
    x_hi = levels[min(n - 1, int(n * (1.0 - s_low)))]
    return float(x_lo), float(x_hi)


def fit_tail(
    est: SurvivalEstimate,
    window: tuple | None = None,
    power: float = 0.0,
    n_grid: int = 25,
    n_boot: int = 200,
    min_samples: int = 10_000,
) -> TailFit:
    """Least-squares slope of log survival over a window, with bootstrap CI.

    A known polynomial factor x^power in the tail may be supplied (it is
    subtracted before fitting, never estimated); the default 0 fits a pure
    exponential.  The confidence interval resamples whole time blocks, which
    respects the serial correlation of the stride samples.
    """
    if window is None:
        window = default_window(est)
    x_lo, x_hi = window
    in_window = int(np.sum((est.samples_level >= x_lo) & (est.samples_level <= x_hi)))
    if in_window < min_samples:
        raise InsufficientSamplesError(
            f"{in_window} samples in window {window}; need {min_samples}"
        )
    grid = np.linspace(x_lo, x_hi, n_grid)

    def slope(counts_total):
        surv = 1.0 - np.cumsum(counts_total) / counts_total.sum()
        s = np.interp(grid, est.grid, surv)
        ok = s > 0
        y = np.log(s[ok]) - power * np.log(grid[ok])
        design = np.vstack([np.ones(ok.sum()), grid[ok]]).T
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        return -coef[1]

    rate = slope(est.block_counts.sum(axis=0))
    rng = np.random.Generator(np.random.Philox(est.config.seed + 0x5EED))
    n_blocks = est.block_counts.shape[0]
    boots = np.empty(n_boot)
    for b in range(n_boot):
        pick = rng.integers(0, n_blocks, n_blocks)
        boots[b] = slope(est.block_counts[pick].sum(axis=0))
    lo, hi = np.percentile(boots, [2.5, 97.5])
    return TailFit(rate=float(rate), ci_low=float(lo), ci_high=float(hi),
                   window=(x_lo, x_hi), n_window=in_window)


def survival_csv(est: SurvivalEstimate, n_rows: int = 256) -> str:
    """CSV of the empirical survival curve and per-phase survival."""
    idx = np.unique(np.linspace(0, est.grid.size - 1, n_rows).astype(int))
    tracked = min(est.config.params.c + 8, est.phase_survival.shape[0])
    header = "x,survival," + ",".join(f"phase{i}" for i in range(tracked))
    lines = [header]
    for k in idx:
        row = [f"{est.grid[k]:.12g}", f"{est.survival[k]:.12g}"]
        row += [f"{est.phase_survival[i][k]:.12g}" for i in range(tracked)]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def summary_json(est: SurvivalEstimate) -> str:
    """JSON summary with the fitted rate and basic checks."""
    import json

    fit = est.fitted
    return json.dumps(
        {
            "schema": 1,
            "n_samples": est.n_samples,
            "n_events": est.n_events,
            "zero_fraction": est.zero_fraction,
            "fitted_rate": None if fit is None else fit.rate,
            "fitted_ci": None if fit is None else [fit.ci_low, fit.ci_high],
            "window": None if fit is None else list(fit.window),
        },
        indent=2,
    )
