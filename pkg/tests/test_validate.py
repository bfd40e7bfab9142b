import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from windbias.fleet import CapacitySeries, GenerationSeries
from windbias.validate import (compare, daily_differences, daily_energy, evaluate, mbe, pearson,
                               relative_metrics, rmse)

from helpers import hourly

DAYS = np.arange(np.datetime64("2016-01-01"), np.datetime64("2016-02-01"))


def _pearson_oracle(x, y):
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sx = sum((a - mx) ** 2 for a in x) ** 0.5
    sy = sum((b - my) ** 2 for b in y) ** 0.5
    return cov / (sx * sy)


class TestDailyEnergy:
    def test_constant_day(self):
        d, e = daily_energy(hourly("2016-01-01T00", 24), np.full(24, 1000.0))
        assert d.tolist() == [np.datetime64("2016-01-01").item()] and e[0] == 24.0

    def test_zeros(self):
        assert daily_energy(hourly("2016-01-01T00", 48), np.zeros(48))[1].tolist() == [0.0, 0.0]

    def test_partial_days_dropped(self):
        d, _ = daily_energy(hourly("2016-01-01T01", 24 + 23), np.ones(47))
        assert d.tolist() == [np.datetime64("2016-01-02").item()]


class TestMetrics:
    def test_pearson_trivial(self):
        x = np.arange(10.0)
        assert pearson(x, x) == pytest.approx(1.0)
        assert pearson(x, 7 - x) == pytest.approx(-1.0)
        assert pearson(x, np.ones(10)) is None
        assert pearson([1.0], [2.0]) is None

    def test_rmse_mbe_trivial(self):
        x = np.arange(5.0)
        assert rmse(x, x) == 0 and mbe(x, x) == 0
        assert rmse(x + 1, x) == pytest.approx(1) and mbe(x + 1, x) == pytest.approx(1)
        assert rmse([1.0, -1.0], [0.0, 0.0]) == 1.0 and mbe([1.0, -1.0], [0.0, 0.0]) == 0.0

    @settings(max_examples=200)
    @given(st.integers(0, 2**31 - 1), st.floats(0.01, 100), st.floats(-50, 50))
    def test_properties(self, seed, scale, shift):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(3, 400))
        obs = rng.gamma(2, 2, n)
        sim = obs * rng.uniform(0.5, 1.5) + rng.normal(0, 1, n)
        assert rmse(sim, obs) >= abs(mbe(sim, obs)) - 1e-12
        r = pearson(sim, obs)
        assert r == pytest.approx(_pearson_oracle(sim.tolist(), obs.tolist()), abs=1e-12)
        assert pearson(scale * sim + shift, obs) == pytest.approx(r, abs=1e-12)

    def test_relative(self):
        from windbias.validate import MetricReport
        rep = MetricReport("x", "m", 31, 1.0, 24.0, 12.0, 0, 0)
        cap = CapacitySeries("x", DAYS, np.full(DAYS.size, 1000.0))
        out = relative_metrics(rep, cap)
        assert out.rel_rmse == 1.0 and out.rel_mbe == 0.5 and out.mean_capacity == 1000.0
        assert relative_metrics(MetricReport("x", "m", 1, None, 0.0, 0.0, 0, 0), cap).rel_rmse == 0
        double = relative_metrics(rep, CapacitySeries("x", DAYS, np.full(DAYS.size, 2000.0)))
        assert double.rel_rmse == out.rel_rmse / 2 and double.rel_mbe == out.rel_mbe / 2


class TestEvaluate:
    def _gen(self, label, values):
        return GenerationSeries(label, DAYS, values)

    def test_identity(self):
        g = self._gen("R", np.linspace(1, 5, DAYS.size))
        (rep,) = evaluate({"R": g}, {"R": g})
        assert rep.correlation == pytest.approx(1.0) and rep.rmse == 0 and rep.mbe == 0

    def test_intersection_warns(self, caplog):
        g = self._gen("R", np.linspace(1, 5, DAYS.size))
        with caplog.at_level(logging.WARNING):
            reps = evaluate({"R": g, "X": g}, {"R": g})
        assert [r.region for r in reps] == ["R"] and "X" in caplog.text

    def test_no_common(self):
        with pytest.raises(ValueError):
            evaluate({"A": self._gen("A", np.ones(DAYS.size))}, {"B": self._gen("B", np.ones(DAYS.size))})

    def test_multi_region_matches_standalone(self, rng):
        sims = {r: self._gen(r, rng.uniform(0, 5, DAYS.size)) for r in "ABC"}
        obs = {r: self._gen(r, rng.uniform(0, 5, DAYS.size)) for r in "ABC"}
        caps = {r: CapacitySeries(r, DAYS, rng.uniform(50, 100, DAYS.size)) for r in "ABC"}
        for rep in evaluate(sims, obs, caps, "nn-none"):
            assert rep == compare(sims[rep.region], obs[rep.region], "nn-none", caps[rep.region])

    def test_paired_window_only(self):
        sim = GenerationSeries("R", DAYS[:20], np.ones(20))
        obs = GenerationSeries("R", DAYS[10:], np.full(DAYS.size - 10, 2.0))
        rep = compare(sim, obs)
        assert rep.n_days == 10 and rep.mbe == -1.0
        dates, s, o, d = daily_differences(sim, obs)
        assert dates.size == 10 and np.all(d == -1.0)
