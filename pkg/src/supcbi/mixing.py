"""Gamma mixing density over reversion speeds and its finite partition.

The mixing law is Gamma(beta, eta) with shape beta > 1 (so the inverse mean
R = 1/(eta*(beta-1)) is finite).  The finite Markovian embedding partitions
(0, inf) into n cells with edges x_i = cbar * i * n^(-gamma); its inverse
mean R_n converges to R, with gap d_n = |R_n - R|.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import exp, gamma, log

import numpy as np
from scipy.special import gammainc

from . import _kernels


@dataclass(frozen=True)
class GammaMixing:
    """Gamma(beta, eta) density over reversion speeds; beta > 1 required."""

    eta: float
    beta: float

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"scale eta must be > 0, got {self.eta}")
        if not self.beta > 1:
            raise ValueError(
                f"shape beta must be > 1 for a finite inverse mean, got {self.beta}"
            )


@dataclass(frozen=True)
class DiscretePartition:
    """Finite embedding: cell edges, representative speeds, cell masses."""

    edges: np.ndarray  # x_0 = 0, ..., x_n = inf
    speeds: np.ndarray  # rho_1 < ... < rho_n
    weights: np.ndarray  # c_i >= 0, summing to 1

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        speeds = np.asarray(self.speeds, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "speeds", speeds)
        object.__setattr__(self, "weights", weights)
        if edges[0] != 0.0 or not np.isinf(edges[-1]):
            raise ValueError("edges must start at 0 and end at +inf")
        if np.any(np.diff(edges) <= 0):
            raise ValueError("edges must be strictly increasing")
        if np.any(np.diff(speeds) <= 0) or np.any(speeds <= 0):
            raise ValueError("speeds must be positive and strictly increasing")
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to 1")

    @property
    def n(self) -> int:
        return len(self.speeds)


def mixing_density(mix: GammaMixing, rho: float) -> float:
    """Density rho^(beta-1) exp(-rho/eta) / (Gamma(beta) eta^beta) at rho > 0."""
    if not rho > 0:
        raise ValueError(f"rho must be > 0, got {rho}")
    eta, beta = mix.eta, mix.beta
    return exp((beta - 1.0) * log(rho) - rho / eta - log(gamma(beta)) - beta * log(eta))


def inverse_mean(mix: GammaMixing) -> float:
    """R = integral of pi(drho)/rho = 1/(eta*(beta-1))."""
    return 1.0 / (mix.eta * (mix.beta - 1.0))


def sample_speed(mix: GammaMixing, rng) -> float:
    """One draw from the density proportional to pi(rho)/rho, i.e.
    Gamma(beta-1, eta)."""
    bg = rng.bit_generator if isinstance(rng, np.random.Generator) else rng
    return float(_kernels.sample_speeds(bg, 1, mix.eta, mix.beta)[0])


def sample_speeds(mix: GammaMixing, n: int, rng) -> np.ndarray:
    """n draws from the size-biased law Gamma(beta-1, eta)."""
    bg = rng.bit_generator if isinstance(rng, np.random.Generator) else rng
    return _kernels.sample_speeds(bg, n, mix.eta, mix.beta)


def build_partition(
    mix: GammaMixing, n: int, cbar: float | None = None, gamma_exp: float = 0.3
) -> DiscretePartition:
    """Partition with edges x_i = cbar * i * n^(-gamma_exp), i = 1..n-1.

    Cell masses are regularized incomplete-Gamma differences of the mixing
    law; representative speeds are cell midpoints, with the last speed at the
    final finite edge.  ``cbar`` defaults to the mixing scale eta so the
    partition is equivariant under rescaling of the reversion speeds.
    """
    if cbar is None:
        cbar = mix.eta
    if n < 2:
        raise ValueError(f"partition size n must be >= 2, got {n}")
    if not cbar > 0:
        raise ValueError(f"cbar must be > 0, got {cbar}")
    if not 0 < gamma_exp < 1:
        raise ValueError(f"gamma must be in (0, 1), got {gamma_exp}")
    finite = cbar * np.arange(1, n) * float(n) ** (-gamma_exp)
    edges = np.concatenate(([0.0], finite, [np.inf]))
    # CDF of Gamma(beta, eta) at the finite edges
    cdf = gammainc(mix.beta, finite / mix.eta)
    cdf_full = np.concatenate(([0.0], cdf, [1.0]))
    weights = np.diff(cdf_full)
    speeds = np.empty(n)
    speeds[: n - 1] = (edges[: n - 1] + edges[1:n]) / 2.0
    speeds[n - 1] = finite[-1]
    # exact partition of unity despite rounding
    weights = weights / weights.sum()
    return DiscretePartition(edges=edges, speeds=speeds, weights=weights)


def discrete_inverse_mean(part: DiscretePartition) -> float:
    """R_n = sum of c_i / rho_i."""
    return float(np.sum(part.weights / part.speeds))


def embedding_gap(mix: GammaMixing, part: DiscretePartition) -> float:
    """d_n = |R_n - R|, the convergence diagnostic of the embedding."""
    return abs(discrete_inverse_mean(part) - inverse_mean(mix))
