"""CSV ingestion, empirical statistics/ACF, and the two-stage fit."""

import math
import textwrap

import numpy as np
import pytest

from supcbi.estimation import (
    AcfFit,
    DataError,
    DischargeSeries,
    empirical_acf,
    empirical_stats,
    fit_acf,
    fit_moments,
    load_csv,
    pinned_B,
    relative_error_metric,
    segments_acf,
)
from supcbi.moments import SummaryStats, supcbi_acf, supcbi_stats
from supcbi.tempered_levy import levy_moment

from _params import STATION_2


def write_csv(tmp_path, body, name="data.csv"):
    path = tmp_path / name
    path.write_text("timestamp,discharge_m3s\n" + textwrap.dedent(body))
    return path


class TestLoadCsv:
    def test_basic(self, tmp_path):
        path = write_csv(
            tmp_path,
            """\
            2020-01-01T00:00:00,1.0
            2020-01-01T01:00:00,2.0
            2020-01-01T02:00:00,3.0
            """,
        )
        series = load_csv(path)
        assert series.interval_h == 1.0
        assert series.values.tolist() == [1.0, 2.0, 3.0]
        assert not series.gaps.any()

    def test_blank_value_is_gap(self, tmp_path):
        path = write_csv(
            tmp_path,
            """\
            2020-01-01T00:00:00,1.0
            2020-01-01T01:00:00,
            2020-01-01T02:00:00,3.0
            """,
        )
        series = load_csv(path)
        assert series.gaps.tolist() == [False, True, False]
        assert series.present.tolist() == [1.0, 3.0]

    def test_malformed_timestamp_names_line(self, tmp_path):
        path = write_csv(
            tmp_path,
            """\
            2020-01-01T00:00:00,1.0
            not-a-time,2.0
            """,
        )
        with pytest.raises(DataError, match="line 3"):
            load_csv(path)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("time,flow\n2020-01-01T00:00:00,1.0\n")
        with pytest.raises(DataError):
            load_csv(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            load_csv(tmp_path / "nope.csv")

    def test_negative_discharge_rejected(self, tmp_path):
        path = write_csv(
            tmp_path,
            """\
            2020-01-01T00:00:00,1.0
            2020-01-01T01:00:00,-2.0
            """,
        )
        with pytest.raises(DataError):
            load_csv(path)


class TestEmpiricalStats:
    def test_toy_series(self):
        series = DischargeSeries(
            start=None,
            interval_h=1.0,
            values=np.array([1.0, 2.0, 3.0, 4.0]),
            gaps=np.zeros(4, dtype=bool),
        )
        st = empirical_stats(series)
        assert st.ave == pytest.approx(2.5)
        assert st.std == pytest.approx(np.std([1, 2, 3, 4]))

    def test_three_value_population_std(self):
        series = DischargeSeries(
            start=None,
            interval_h=1.0,
            values=np.array([1.0, 2.0, 3.0, 1.0, 2.0, 3.0]),
            gaps=np.array([False, False, False, True, True, True]),
        )
        st = empirical_stats(series)
        assert st.ave == pytest.approx(2.0)
        assert st.std == pytest.approx(0.8165, rel=1e-3)

    def test_constant_series_rejected(self):
        series = DischargeSeries(
            start=None,
            interval_h=1.0,
            values=np.full(10, 2.0),
            gaps=np.zeros(10, dtype=bool),
        )
        with pytest.raises(DataError):
            empirical_stats(series)


class TestSegmentsAcf:
    def test_known_ar1(self):
        rng = np.random.default_rng(0)
        phi = 0.8
        x = np.empty(200_000)
        x[0] = 0.0
        eps = rng.normal(size=len(x))
        for i in range(1, len(x)):
            x[i] = phi * x[i - 1] + eps[i]
        acf = segments_acf([x], [0, 1, 2, 5])
        assert acf[0] == pytest.approx(1.0)
        assert acf[1] == pytest.approx(phi, abs=0.01)
        assert acf[2] == pytest.approx(phi**2, abs=0.01)
        assert acf[5] == pytest.approx(phi**5, abs=0.02)

    def test_gap_excludes_cross_pairs(self):
        # two segments: lag-1 products never straddle the gap
        a = np.array([1.0, 2.0, 3.0])
        b = np.array([100.0, 101.0])
        acf_split = segments_acf([a, b], [1])
        acf_joined = segments_acf([np.concatenate([a, b])], [1])
        assert acf_split[1] != pytest.approx(acf_joined[1])


class TestFitAcf:
    def test_recovers_exact_curve(self):
        U, beta = 6.76e-2, 2.04
        lags = np.arange(0, 200)
        acf = [(int(s), (1.0 + U * s) ** (1.0 - beta)) for s in lags]
        fit = fit_acf(acf)
        assert fit.U == pytest.approx(U, rel=1e-4)
        assert fit.beta == pytest.approx(beta, rel=1e-4)
        assert fit.sse < 1e-12

    def test_cutoff_at_first_nonpositive(self):
        U, beta = 0.1, 2.0
        acf = [(s, (1.0 + U * s) ** (1.0 - beta)) for s in range(40)]
        acf[25] = (25, -0.01)  # noise dip: later lags ignored
        fit = fit_acf(acf)
        assert fit.lag_cutoff == 24
        assert fit.U == pytest.approx(U, rel=0.05)

    def test_too_few_lags(self):
        acf = [(0, 1.0), (1, 0.5), (2, -0.1), (3, 0.2)]
        with pytest.raises(DataError):
            fit_acf(acf)


class TestRelativeErrorMetric:
    def test_identity(self):
        data = SummaryStats(ave=2.0, std=3.0, skew=4.0, kurt=5.0)
        model = SummaryStats(ave=2.2, std=2.7, skew=4.4, kurt=4.0)
        er2, res = relative_error_metric(model, data)
        expected = 0.1**2 + 0.1**2 + 0.1**2 + 0.2**2
        assert er2 == pytest.approx(expected)
        assert res["ave"] == pytest.approx(0.1)

    def test_three_term_variant(self):
        data = SummaryStats(ave=2.0, std=3.0, skew=4.0, kurt=5.0)
        model = SummaryStats(ave=2.2, std=3.0, skew=4.0, kurt=50.0)
        er2, res = relative_error_metric(model, data, include_kurt=False)
        assert er2 == pytest.approx(0.01)
        assert "kurt" not in res

    def test_zero_denominator(self):
        data = SummaryStats(ave=0.0, std=1.0, skew=1.0, kurt=1.0)
        model = SummaryStats(ave=1.0, std=1.0, skew=1.0, kurt=1.0)
        with pytest.raises(ValueError, match="ave"):
            relative_error_metric(model, data)


class TestPinnedB:
    def test_consistency(self):
        for D in (1.0, 0.7, 0.5):
            B = pinned_B(D, b=1.76e-2, alpha=0.456)
            from supcbi.tempered_levy import TemperedStableMeasure

            m1 = levy_moment(TemperedStableMeasure(b=1.76e-2, alpha=0.456), 1)
            assert 1.0 - B * m1 == pytest.approx(D, rel=1e-12)

    def test_supou_limit(self):
        assert pinned_B(1.0, b=0.0161, alpha=0.286) == 0.0


class TestFitMomentsRoundTrip:
    def test_noiseless_round_trip(self):
        target = supcbi_stats(STATION_2)
        acf = AcfFit(U=STATION_2.U, beta=STATION_2.mixing.beta, sse=0.0, lag_cutoff=100)
        fit = fit_moments(target, D=0.7, acf=acf, xmin=0.06)
        assert fit.er2 < 1e-8
        # recovered parameters reproduce the statistics
        assert fit.D == 0.7

    def test_supou_round_trip_gives_zero_B(self):
        from _params import sweep_params

        p = sweep_params(1.0)
        target = supcbi_stats(p)
        acf = AcfFit(U=6.76e-2, beta=2.04, sse=0.0, lag_cutoff=100)
        fit = fit_moments(target, D=1.0, acf=acf, xmin=0.06)
        assert fit.B == 0.0
        assert fit.er2 < 1e-8

    def test_rejects_bad_D(self):
        target = supcbi_stats(STATION_2)
        acf = AcfFit(U=6.76e-2, beta=2.04, sse=0.0, lag_cutoff=100)
        with pytest.raises(ValueError):
            fit_moments(target, D=0.0, acf=acf, xmin=0.0)


class TestEmpiricalAcf:
    def test_lag_bounds(self, tmp_path):
        path = write_csv(
            tmp_path,
            "".join(
                f"2020-01-01T{h:02d}:00:00,{1.0 + h}\n" for h in range(10)
            ),
        )
        series = load_csv(path)
        with pytest.raises(DataError):
            empirical_acf(series, 9)
        acf = empirical_acf(series, 3)
        assert acf[0] == (0, pytest.approx(1.0))
