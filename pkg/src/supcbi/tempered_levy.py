"""Tempered stable Levy measure: moments, complex exponent, increment draws.

The jump driver has Levy measure nu(dz) = exp(-b z) z^{-(alpha+1)} dz on
(0, inf) with tempering rate b > 0 and stability index alpha < 1.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from math import gamma

import numpy as np

from . import _kernels


@dataclass(frozen=True)
class TemperedStableMeasure:
    """Levy measure exp(-b z) z^{-(alpha+1)} dz, b > 0, alpha < 1."""

    b: float
    alpha: float

    def __post_init__(self):
        if not self.b > 0:
            raise ValueError(f"tempering rate b must be > 0, got {self.b}")
        if not self.alpha < 1:
            raise ValueError(f"stability index alpha must be < 1, got {self.alpha}")


def levy_moment(measure: TemperedStableMeasure, k: int) -> float:
    """k-th moment of the Levy measure: M_k = b^(alpha-k) * Gamma(k-alpha)."""
    if k < 1:
        raise ValueError(f"moment order k must be >= 1, got {k}")
    return measure.b ** (measure.alpha - k) * gamma(k - measure.alpha)


def levy_exponent(measure: TemperedStableMeasure, phi: complex) -> complex:
    """psi(phi) = integral of (exp(i*phi*z) - 1) nu(dz) over (0, inf).

    Closed form Gamma(-alpha) * ((b - i*phi)^alpha - b^alpha) on the
    principal branch; the alpha = 0 limit is the log branch.  Requires
    Im(phi) > -b for integrability.
    """
    phi = complex(phi)
    b, alpha = measure.b, measure.alpha
    if phi.imag <= -b:
        raise ValueError(f"Im(phi) = {phi.imag} must exceed -b = {-b}: integral diverges")
    if phi == 0:
        return 0j
    if alpha == 0.0:
        return cmath.log(b / (b - 1j * phi))
    return gamma(-alpha) * ((b - 1j * phi) ** alpha - b**alpha)


def sample_increment(measure, intensity, dt, rng) -> float:
    """One increment of the subordinator with Levy measure intensity*nu over dt.

    Exact in law per alpha branch (tilting rejection / Gamma process /
    compound Poisson).  ``rng`` is a numpy Generator or BitGenerator.
    """
    if intensity < 0:
        raise ValueError(f"intensity must be >= 0, got {intensity}")
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    bg = rng.bit_generator if isinstance(rng, np.random.Generator) else rng
    return float(
        _kernels.sample_increments(bg, 1, intensity, dt, measure.b, measure.alpha)[0]
    )


def sample_increments(measure, intensity, dt, n, rng):
    """n independent increments as an array (vectorized helper)."""
    if intensity < 0:
        raise ValueError(f"intensity must be >= 0, got {intensity}")
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    bg = rng.bit_generator if isinstance(rng, np.random.Generator) else rng
    return _kernels.sample_increments(bg, n, intensity, dt, measure.b, measure.alpha)
