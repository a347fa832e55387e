"""Closed-form stationary statistics and autocorrelation.

Covers the single component process (fixed reversion speed), the finite
embedding (R_n in place of R), and the continuous superposition.  Kurtosis
is excess kurtosis everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np
from scipy.integrate import quad
from scipy.stats import gamma as gamma_dist

from .mixing import (
    DiscretePartition,
    GammaMixing,
    discrete_inverse_mean,
    inverse_mean,
    mixing_density,
)
from .tempered_levy import TemperedStableMeasure, levy_moment


@dataclass(frozen=True)
class SummaryStats:
    """(average, standard deviation, skewness, excess kurtosis)."""

    ave: float
    std: float
    skew: float
    kurt: float

    def __post_init__(self):
        if self.std < 0:
            raise ValueError(f"std must be >= 0, got {self.std}")

    def as_tuple(self):
        return (self.ave, self.std, self.skew, self.kurt)


@dataclass(frozen=True)
class SupCbiParams:
    """Full model: jump scales A (exogenic) and B (self-exciting), tempered
    stable measure, Gamma mixing law, and minimum discharge xmin.

    Stationarity requires D = 1 - B*M_1 in (0, 1].  U = D*eta is derived.
    """

    A: float
    B: float
    measure: TemperedStableMeasure
    mixing: GammaMixing
    xmin: float

    def __post_init__(self):
        if self.A < 0 or self.B < 0:
            raise ValueError("jump scales A and B must be >= 0")
        if self.A == 0 and self.B == 0:
            raise ValueError("A and B must not both be zero")
        if self.xmin < 0:
            raise ValueError(f"minimum discharge must be >= 0, got {self.xmin}")
        d = self.D
        if not 0 < d <= 1:
            raise ValueError(f"stationarity requires D = 1 - B*M_1 in (0, 1], got {d}")

    @property
    def D(self) -> float:
        return 1.0 - self.B * levy_moment(self.measure, 1)

    @property
    def U(self) -> float:
        return self.D * self.mixing.eta


def _normalize(mean, var, mu3, mu4_excess):
    """Central moments to (ave, std, skew, excess kurt)."""
    if var == 0.0:
        return SummaryStats(ave=mean, std=0.0, skew=0.0, kurt=0.0)
    std = sqrt(var)
    return SummaryStats(
        ave=mean, std=std, skew=mu3 / std**3, kurt=mu4_excess / (var * var)
    )


def _central_moments(A, B, measure, D, r):
    """Shared central-moment expressions; r is 1/rho, R_n, or R."""
    m = [levy_moment(measure, k) for k in (1, 2, 3, 4)]
    mean_fluct = A * m[0] / D * r
    var = A * m[1] / (2.0 * D * D) * r
    mu3 = (A * m[2] / (3.0 * D * D) + 0.5 * A * B * m[1] ** 2 / D**3) * r
    mu4_excess = (
        (A / (4.0 * D))
        * (m[3] / D + 4.0 * B * m[1] * m[2] / (D * D) + 3.0 * B * B * m[1] ** 3 / D**3)
        * r
    )
    return mean_fluct, var, mu3, mu4_excess


def cbi_stats(A, B, measure: TemperedStableMeasure, rho: float) -> SummaryStats:
    """Stationary statistics of a single component with reversion speed rho."""
    if not rho > 0:
        raise ValueError(f"reversion speed must be > 0, got {rho}")
    D = 1.0 - B * levy_moment(measure, 1)
    if D <= 0:
        raise ValueError(f"stationarity requires D > 0, got {D}")
    mean, var, mu3, mu4e = _central_moments(A, B, measure, D, 1.0 / rho)
    return _normalize(mean, var, mu3, mu4e)


def cbi_acf(rho: float, D: float, s) -> float:
    """Single-component autocorrelation exp(-rho*D*s) at lag s >= 0 hours."""
    if np.any(np.asarray(s) < 0):
        raise ValueError("lag must be >= 0")
    return np.exp(-rho * D * np.asarray(s, dtype=float))


def supcbi_stats(params: SupCbiParams) -> SummaryStats:
    """Stationary statistics of the continuous superposition."""
    D = params.D
    r = inverse_mean(params.mixing)
    mean, var, mu3, mu4e = _central_moments(params.A, params.B, params.measure, D, r)
    return _normalize(params.xmin + mean, var, mu3, mu4e)


def discrete_supcbi_stats(
    A, B, measure: TemperedStableMeasure, part: DiscretePartition, xmin: float
) -> SummaryStats:
    """Stationary statistics of the finite embedding (R replaced by R_n)."""
    D = 1.0 - B * levy_moment(measure, 1)
    if D <= 0:
        raise ValueError(f"stationarity requires D > 0, got {D}")
    r = discrete_inverse_mean(part)
    mean, var, mu3, mu4e = _central_moments(A, B, measure, D, r)
    return _normalize(xmin + mean, var, mu3, mu4e)


def supcbi_acf(params: SupCbiParams, s) -> float:
    """Autocorrelation (1 + U*s)^(1-beta) of the superposition at lag s hours."""
    if np.any(np.asarray(s) < 0):
        raise ValueError("lag must be >= 0")
    return (1.0 + params.U * np.asarray(s, dtype=float)) ** (1.0 - params.mixing.beta)


def supcbi_acf_quadrature(params: SupCbiParams, s: float, tail_mass=1e-10) -> float:
    """Cross-validation form: (1/R) * integral of exp(-rho*D*s)/rho pi(drho).

    Adaptive quadrature on (0, rho_cut) with the cut chosen so the Gamma
    tail mass is below ``tail_mass``.
    """
    mix = params.mixing
    D = params.D
    r = inverse_mean(mix)
    rho_cut = gamma_dist.ppf(1.0 - tail_mass, mix.beta, scale=mix.eta)

    def integrand(rho):
        return np.exp(-rho * D * s) / rho * mixing_density(mix, rho)

    val, _ = quad(integrand, 0.0, rho_cut, limit=200)
    return val / r


def discrete_supcbi_acf(part: DiscretePartition, D: float, s) -> float:
    """Embedding autocorrelation: weighted exponential mixture at lag s hours."""
    if np.any(np.asarray(s) < 0):
        raise ValueError("lag must be >= 0")
    r_n = discrete_inverse_mean(part)
    s = np.asarray(s, dtype=float)
    terms = (part.weights / part.speeds) * np.exp(
        -np.multiply.outer(s, part.speeds * D)
    )
    return terms.sum(axis=-1) / r_n
