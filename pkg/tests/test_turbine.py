import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from windbias.turbine import (CurveDegeneracyError, HubHeightModel, PowerCurve, TurbineSpec, UnfillableError,
                              build_power_curve, estimate_hub_height, fill_missing_from_cohort,
                              fit_hub_height_model, rated_speed, simulate_turbine, specific_power)


class TestSpecificPower:
    def test_2000kw_100m(self):
        assert specific_power(2000, 100) == pytest.approx(254.648, abs=1e-3)

    def test_unit_construction(self):
        d = 87.0
        assert specific_power(math.pi / 4 * d ** 2 / 1000, d) == pytest.approx(1.0, rel=1e-14)

    def test_zero_diameter(self):
        with pytest.raises(ValueError):
            specific_power(2000, 0)


class TestHubRegression:
    def test_exact_line(self):
        d = np.array([60.0, 80, 100, 120])
        m = fit_hub_height_model(np.column_stack([d, 30 + 0.7 * d]))
        assert m.intercept == pytest.approx(30, abs=1e-10) and m.slope == pytest.approx(0.7, abs=1e-10)

    def test_flat(self):
        m = fit_hub_height_model([(70, 90), (100, 90), (130, 90)])
        assert m.slope == pytest.approx(0.0, abs=1e-12) and m.intercept == pytest.approx(90)

    def test_negative_slope_warns(self, caplog):
        fit_hub_height_model([(70, 100), (100, 90), (130, 80)])
        assert "negative slope" in caplog.text

    @settings(max_examples=50)
    @given(st.integers(0, 2**31 - 1))
    def test_normal_equation_oracle(self, seed):
        rng = np.random.default_rng(seed)
        d = rng.uniform(40, 160, 50)
        hh = 25 + 0.7 * d + rng.normal(0, 8, 50)
        X = np.column_stack([np.ones(50), d])
        beta = np.linalg.solve(X.T @ X, X.T @ hh)
        m = fit_hub_height_model(np.column_stack([d, hh]))
        assert m.intercept == pytest.approx(beta[0], abs=1e-9 * 100)
        assert m.slope == pytest.approx(beta[1], abs=1e-9)

    def test_estimate(self):
        assert estimate_hub_height(HubHeightModel(30, 0.7), 100) == pytest.approx(100)
        assert estimate_hub_height(HubHeightModel(30, 0), 55) == 30
        assert estimate_hub_height(HubHeightModel(-100, 0.1), 10) == 10


class TestCohortFill:
    def test_year_mean(self):
        parks = [TurbineSpec(2000, 90, specific_power=300, install_year=2012),
                 TurbineSpec(2000, 90, specific_power=340, install_year=2012),
                 TurbineSpec(2000, 90, install_year=2012)]
        assert fill_missing_from_cohort(parks, "specific_power")[2].specific_power == pytest.approx(320)

    def test_global_fallback(self):
        parks = [TurbineSpec(2000, 90, hub_height=260, install_year=2010),
                 TurbineSpec(2000, 90, hub_height=300, install_year=2011),
                 TurbineSpec(2000, 90, install_year=2015)]
        out = fill_missing_from_cohort(parks, "hub_height")
        assert out[2].hub_height == pytest.approx(280)
        assert out[0].hub_height == 260 and out[1].hub_height == 300

    def test_unfillable(self):
        with pytest.raises(UnfillableError):
            fill_missing_from_cohort([TurbineSpec(2000, 90)], "hub_height")


class TestPowerCurve:
    def test_rated_speed(self):
        assert rated_speed(330.75) == pytest.approx(1200 ** (1 / 3), rel=1e-14)
        assert rated_speed(330.75) == pytest.approx(10.627, abs=1e-3)

    def test_boundaries(self):
        c = build_power_curve(330.75)
        assert c(c.cut_in) == 0.0
        assert c(c.rated_speed) == 1.0
        assert c(c.cut_out) == 1.0
        assert c(c.cut_out + 1e-9) == 0.0

    @given(st.floats(100, 600), st.floats(100, 600))
    def test_rated_monotone_in_sp(self, a, b):
        if a < b:
            assert rated_speed(a) < rated_speed(b)

    def test_degenerate(self):
        with pytest.raises(CurveDegeneracyError):
            PowerCurve(3.0, 2.0, 25.0)
        with pytest.raises(CurveDegeneracyError):
            build_power_curve(5000.0, cut_out=12.0)

    @given(st.floats(150, 500), st.lists(st.floats(-5, 40), min_size=1, max_size=50))
    def test_matches_scalar_oracle(self, sp, speeds):
        c = build_power_curve(sp)

        def scalar(v):
            if v < c.cut_in or v > c.cut_out:
                return 0.0
            if v >= c.rated_speed:
                return 1.0
            return (v ** 3 - c.cut_in ** 3) / (c.rated_speed ** 3 - c.cut_in ** 3)

        out = simulate_turbine(c, speeds)
        assert np.all((out >= 0) & (out <= 1))
        np.testing.assert_allclose(out, [scalar(v) for v in speeds], rtol=1e-14, atol=0)

    def test_non_decreasing_ramp(self):
        c = build_power_curve(300)
        v = np.linspace(c.cut_in, c.rated_speed, 500)
        assert np.all(np.diff(c(v)) >= 0)

    def test_calm_and_rated(self):
        c = build_power_curve(250)
        assert np.all(simulate_turbine(c, np.zeros(10)) == 0)
        assert np.all(simulate_turbine(c, np.full(10, c.rated_speed)) == 1)


def test_spec_validation():
    with pytest.raises(ValueError):
        TurbineSpec(-1.0, 90)
