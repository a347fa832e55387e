"""Ergodic Monte Carlo simulation of stationary paths with streaming stats.

The hot loops live in the kernel backend (compiled extension when available,
pure Python otherwise); this module handles configuration, replicate
orchestration, exact merging of power sums, and finalization.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import sqrt

import numpy as np

from . import _kernels
from .mixing import DiscretePartition, discrete_inverse_mean, inverse_mean
from .moments import SummaryStats, SupCbiParams
from .tempered_levy import levy_moment

HOURS_PER_YEAR = 365.0 * 24.0
DEFAULT_BURN_IN_YEARS = 5.0


class InsufficientSamplesError(ValueError):
    """Raised when a statistic is requested with too few (or degenerate)
    samples."""


@dataclass(frozen=True)
class PathConfig:
    """Step size (hours), horizon, burn-in, seed, and initial fluctuation.

    burn_in_steps=None means the default 5 simulated years; y0=None means
    the stationary mean of the fluctuation.
    """

    dt: float
    n_steps: int
    burn_in_steps: int | None = None
    seed: int = 0
    y0: float | None = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")
        if self.burn_in_steps is not None and self.burn_in_steps < 0:
            raise ValueError("burn_in_steps must be >= 0")

    @property
    def burn_in(self) -> int:
        if self.burn_in_steps is not None:
            return self.burn_in_steps
        return int(round(DEFAULT_BURN_IN_YEARS * HOURS_PER_YEAR / self.dt))

    @property
    def hourly_stride(self) -> int:
        return max(1, int(np.ceil(1.0 / self.dt)))


@dataclass
class StreamingStats:
    """One-pass accumulators: count and power sums of (x - shift) up to
    order 4, plus hourly-decimated segments (one per replicate) for the ACF."""

    count: int = 0
    shift: float = 0.0
    s1: float = 0.0
    s2: float = 0.0
    s3: float = 0.0
    s4: float = 0.0
    dt: float = 0.0
    segments: list = field(default_factory=list)

    def merge(self, other: "StreamingStats") -> "StreamingStats":
        if other.shift != self.shift:
            raise ValueError("cannot merge accumulators with different shifts")
        self.count += other.count
        self.s1 += other.s1
        self.s2 += other.s2
        self.s3 += other.s3
        self.s4 += other.s4
        self.segments.extend(other.segments)
        return self


def finalize_stats(acc: StreamingStats, need=("ave", "std", "skew", "kurt")):
    """Population-moment conversion of the accumulators (no small-sample
    correction); kurtosis is excess.  Statistics not in ``need`` are NaN."""
    n = acc.count
    if n < 2:
        raise InsufficientSamplesError(f"std requires >= 2 samples, have {n}")
    if "skew" in need and n < 3:
        raise InsufficientSamplesError(f"skew requires >= 3 samples, have {n}")
    if "kurt" in need and n < 4:
        raise InsufficientSamplesError(f"kurt requires >= 4 samples, have {n}")
    m1 = acc.s1 / n
    m2 = acc.s2 / n - m1 * m1
    m3 = acc.s3 / n - 3.0 * m1 * acc.s2 / n + 2.0 * m1**3
    m4 = acc.s4 / n - 4.0 * m1 * acc.s3 / n + 6.0 * m1 * m1 * acc.s2 / n - 3.0 * m1**4
    m2 = max(m2, 0.0)
    if m2 == 0.0 and ("skew" in need or "kurt" in need):
        raise InsufficientSamplesError("skew/kurt undefined for constant samples")
    ave = acc.shift + m1
    std = sqrt(m2)
    skew = m3 / m2**1.5 if "skew" in need else float("nan")
    kurt = m4 / (m2 * m2) - 3.0 if "kurt" in need else float("nan")
    return SummaryStats(ave=ave, std=std, skew=skew, kurt=kurt)


def path_acf(acc: StreamingStats, lags_h) -> dict:
    """Empirical ACF at integer-hour lags, pooled over hourly segments."""
    from .estimation import segments_acf

    return segments_acf(acc.segments, lags_h)


def _replicate_seeds(seed: int, replicates: int):
    return [np.random.PCG64(np.random.SeedSequence([seed, rep])) for rep in range(replicates)]


def _split_steps(total: int, replicates: int):
    base = total // replicates
    steps = [base] * replicates
    steps[-1] += total - base * replicates
    return steps


def simulate_supcbi(
    params: SupCbiParams,
    cfg: PathConfig,
    sink=None,
    thresholds=(),
    dump_stride: int = 0,
    replicates: int = 1,
    workers: int = 1,
    backend=None,
):
    """Simulate the superposed process; returns (StreamingStats, sojourns).

    Per step: a fresh reversion speed from the size-biased mixing law, exact
    exponential decay, and a tempered stable increment with intensity taken
    at the left-limit state.  Deterministic for fixed (seed, cfg, params)
    regardless of replicate/worker count: replicate streams derive from
    (seed, replicate index) and merge in index order.

    ``sink``, if given, is called per replicate with the strided sample
    array (requires dump_stride > 0).  ``sojourns`` is a list, per
    threshold, of (high, low) duration arrays in hours.
    """
    kern = _kernels.get_backend(backend)
    measure, mix = params.measure, params.mixing
    r = inverse_mean(mix)
    y0_default = params.A * levy_moment(measure, 1) * r / params.D
    y0 = cfg.y0 if cfg.y0 is not None else y0_default
    shift = params.xmin + y0_default
    thresholds = np.asarray(thresholds, dtype=float)

    def run_one(args):
        bg, n_steps, burn_in = args
        return kern.run_supcbi(
            bg,
            params.A,
            params.B,
            measure.b,
            measure.alpha,
            mix.eta,
            mix.beta,
            params.xmin,
            y0,
            cfg.dt,
            n_steps,
            burn_in,
            cfg.hourly_stride,
            dump_stride,
            thresholds,
            shift,
        )

    jobs = [
        (bg, steps + cfg.burn_in, cfg.burn_in)
        for bg, steps in zip(
            _replicate_seeds(cfg.seed, replicates),
            _split_steps(cfg.n_steps, replicates),
        )
    ]
    if workers > 1 and replicates > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_one, jobs))
    else:
        results = [run_one(job) for job in jobs]
    return _merge_results(results, shift, cfg.dt, sink, len(thresholds))


def simulate_embedding(
    A,
    B,
    measure,
    part: DiscretePartition,
    xmin,
    cfg: PathConfig,
    sink=None,
    dump_stride: int = 0,
    replicates: int = 1,
    workers: int = 1,
    backend=None,
):
    """Simulate the finite superposition (independent fixed-speed components,
    jump intensity c_i*A + rho_i*B*Y_i); statistics converge to the closed
    embedding formulas."""
    kern = _kernels.get_backend(backend)
    D = 1.0 - B * levy_moment(measure, 1)
    if D <= 0:
        raise ValueError(f"stationarity requires D > 0, got {D}")
    m1 = levy_moment(measure, 1)
    # per-component stationary means c_i*A*M1/(rho_i*D)
    y0_comp = part.weights * A * m1 / (part.speeds * D)
    shift = xmin + A * m1 * discrete_inverse_mean(part) / D
    if cfg.y0 is not None:
        y0_comp = np.full(part.n, cfg.y0 / part.n)

    def run_one(args):
        bg, n_steps, burn_in = args
        return kern.run_embedding(
            bg,
            A,
            B,
            measure.b,
            measure.alpha,
            part.weights,
            part.speeds,
            xmin,
            y0_comp,
            cfg.dt,
            n_steps,
            burn_in,
            cfg.hourly_stride,
            dump_stride,
            shift,
        )

    jobs = [
        (bg, steps + cfg.burn_in, cfg.burn_in)
        for bg, steps in zip(
            _replicate_seeds(cfg.seed, replicates),
            _split_steps(cfg.n_steps, replicates),
        )
    ]
    if workers > 1 and replicates > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_one, jobs))
    else:
        results = [run_one(job) for job in jobs]
    stats, _ = _merge_results(results, shift, cfg.dt, sink, 0)
    return stats


def _merge_results(results, shift, dt, sink, n_thr):
    acc = StreamingStats(shift=shift, dt=dt)
    sojourns = [(list(), list()) for _ in range(n_thr)]
    for res in results:
        count, s1, s2, s3, s4, hourly, dump, soj = res
        if not np.isfinite([s1, s2, s3, s4]).all():
            raise FloatingPointError("non-finite state encountered in path")
        part = StreamingStats(
            count=count, shift=shift, s1=s1, s2=s2, s3=s3, s4=s4, dt=dt,
            segments=[hourly],
        )
        acc.merge(part)
        if sink is not None:
            sink(dump)
        for k in range(n_thr):
            sojourns[k][0].append(soj[k][0])
            sojourns[k][1].append(soj[k][1])
    merged = [
        (np.concatenate(h) if h else np.empty(0), np.concatenate(l) if l else np.empty(0))
        for h, l in sojourns
    ]
    return acc, merged
