"""Tempered stable measure: moments, exponent, and increment sampling."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from supcbi.tempered_levy import (
    TemperedStableMeasure,
    levy_exponent,
    levy_moment,
    sample_increment,
    sample_increments,
)


def numeric_moment(measure, k):
    val, _ = quad(
        lambda z: z**k * math.exp(-measure.b * z) * z ** (-(measure.alpha + 1.0)),
        0.0,
        np.inf,
    )
    return val


class TestMeasure:
    def test_invariants(self):
        with pytest.raises(ValueError):
            TemperedStableMeasure(b=0.0, alpha=0.5)
        with pytest.raises(ValueError):
            TemperedStableMeasure(b=1.0, alpha=1.0)
        TemperedStableMeasure(b=1.0, alpha=-0.5)  # negative alpha is allowed

    def test_moment_closed_form(self):
        m = TemperedStableMeasure(b=1.0, alpha=0.5)
        assert levy_moment(m, 1) == pytest.approx(math.gamma(0.5))
        # station-like parameters against an independent quadrature
        m = TemperedStableMeasure(b=1.76e-2, alpha=0.456)
        for k in (1, 2, 3, 4):
            assert levy_moment(m, k) == pytest.approx(
                numeric_moment(m, k), rel=1e-8
            )

    def test_moment_scaling(self):
        # M_k = b^(alpha-k) Gamma(k-alpha) scales as b^(alpha-k)
        m1 = TemperedStableMeasure(b=1.0, alpha=0.3)
        m2 = TemperedStableMeasure(b=2.0, alpha=0.3)
        for k in (1, 2, 3, 4):
            assert levy_moment(m2, k) == pytest.approx(
                levy_moment(m1, k) * 2.0 ** (0.3 - k)
            )

    def test_moment_requires_positive_order(self):
        m = TemperedStableMeasure(b=1.0, alpha=0.5)
        with pytest.raises(ValueError):
            levy_moment(m, 0)


class TestExponent:
    def test_zero(self):
        m = TemperedStableMeasure(b=1.0, alpha=0.5)
        assert levy_exponent(m, 0.0) == 0j

    def test_against_quadrature(self):
        m = TemperedStableMeasure(b=0.8, alpha=0.4)
        for u in (0.3, 1.0, -2.0):
            re, _ = quad(
                lambda z: (math.cos(u * z) - 1.0)
                * math.exp(-m.b * z)
                * z ** (-(m.alpha + 1.0)),
                0.0,
                np.inf,
                limit=200,
            )
            im, _ = quad(
                lambda z: math.sin(u * z)
                * math.exp(-m.b * z)
                * z ** (-(m.alpha + 1.0)),
                0.0,
                np.inf,
                limit=200,
            )
            val = levy_exponent(m, u)
            assert val.real == pytest.approx(re, rel=1e-6)
            assert val.imag == pytest.approx(im, rel=1e-6)

    def test_alpha_zero_log_branch(self):
        m = TemperedStableMeasure(b=2.0, alpha=0.0)
        for u in (0.5, 1.5):
            re, _ = quad(
                lambda z: (math.cos(u * z) - 1.0) * math.exp(-m.b * z) / z,
                0.0,
                np.inf,
                limit=200,
            )
            assert levy_exponent(m, u).real == pytest.approx(re, rel=1e-7)

    def test_negative_alpha(self):
        m = TemperedStableMeasure(b=1.0, alpha=-0.5)
        re, _ = quad(
            lambda z: (math.cos(z) - 1.0) * math.exp(-z) * z**-0.5,
            0.0,
            np.inf,
            limit=200,
        )
        assert levy_exponent(m, 1.0).real == pytest.approx(re, rel=1e-7)

    def test_derivative_is_first_moment(self):
        m = TemperedStableMeasure(b=1.76e-2, alpha=0.456)
        h = 1e-6
        d = (levy_exponent(m, h) - levy_exponent(m, -h)) / (2.0 * h)
        assert d.imag == pytest.approx(levy_moment(m, 1), rel=1e-6)

    def test_integrability_domain(self):
        m = TemperedStableMeasure(b=1.0, alpha=0.5)
        with pytest.raises(ValueError):
            levy_exponent(m, complex(0.0, -1.5))


class TestSampling:
    def test_increment_mean_positive_alpha(self):
        m = TemperedStableMeasure(b=0.5, alpha=0.5)
        rng = np.random.default_rng(1)
        xs = sample_increments(m, intensity=1.0, dt=0.1, n=200_000, rng=rng)
        expected = 0.1 * levy_moment(m, 1)
        assert xs.mean() == pytest.approx(expected, rel=0.02)
        assert (xs >= 0).all()

    def test_increment_mean_alpha_zero(self):
        m = TemperedStableMeasure(b=1.0, alpha=0.0)
        rng = np.random.default_rng(2)
        xs = sample_increments(m, intensity=2.0, dt=0.05, n=200_000, rng=rng)
        assert xs.mean() == pytest.approx(0.1 * levy_moment(m, 1), rel=0.02)

    def test_increment_mean_negative_alpha(self):
        m = TemperedStableMeasure(b=1.0, alpha=-0.5)
        rng = np.random.default_rng(3)
        xs = sample_increments(m, intensity=1.0, dt=0.2, n=200_000, rng=rng)
        assert xs.mean() == pytest.approx(0.2 * levy_moment(m, 1), rel=0.02)

    def test_increment_variance(self):
        m = TemperedStableMeasure(b=0.5, alpha=0.3)
        rng = np.random.default_rng(4)
        dt, c = 0.05, 1.5
        xs = sample_increments(m, intensity=c, dt=dt, n=400_000, rng=rng)
        # compound-Poisson-like increment: Var = c*dt*M_2
        assert xs.var() == pytest.approx(c * dt * levy_moment(m, 2), rel=0.05)

    def test_single_draw_matches_stream(self):
        m = TemperedStableMeasure(b=1.0, alpha=0.5)
        one = sample_increment(m, 1.0, 0.1, np.random.default_rng(7))
        many = sample_increments(m, 1.0, 0.1, 1, np.random.default_rng(7))
        assert one == many[0]
