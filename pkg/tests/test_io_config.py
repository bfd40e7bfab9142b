import numpy as np
import pytest

from windbias import io
from windbias.config import ConfigError, RunConfig, dump_config, load_config, parse_config
from windbias.fleet import CapacitySeries, GenerationSeries
from windbias.validate import MetricReport

from helpers import make_park, small_grid, station


class TestConfig:
    def test_defaults(self):
        cfg = parse_config("")
        assert cfg.interpolation == ["nn"] and cfg.biascorr == ["none"]
        assert cfg.max_station_km == 40 and cfg.min_correlation == 0.5 and cfg.min_run_hours == 120
        assert cfg.sweep_km == [30, 40, 50, 60, 70, 80]

    def test_parse_and_resolve(self, tmp_path):
        cfg = parse_config("# comment\ninput.grid = g.csv  # trailing\ninterpolation.method = nn, bli\n"
                           "biascorr.max_station_km = 55\ncapacity.correction = no\n", base_dir=tmp_path)
        assert cfg.grid == str(tmp_path / "g.csv")
        assert cfg.interpolation == ["nn", "bli"] and cfg.max_station_km == 55.0
        assert cfg.capacity_correction is False

    @pytest.mark.parametrize("text,where", [("bogus.key = 1", "line 1"), ("\n\nrun.seed = x", "line 3"),
                                            ("no equals sign", "line 1")])
    def test_errors_carry_line(self, text, where):
        with pytest.raises(ConfigError, match=where):
            parse_config(text)

    @pytest.mark.parametrize("field,value", [("interpolation", ["spline"]), ("biascorr", ["magic"]),
                                             ("vertical", "cubic"), ("max_station_km", -1.0),
                                             ("min_correlation", 0.0), ("hub_model", "coeffs")])
    def test_validate(self, field, value):
        cfg = RunConfig()
        setattr(cfg, field, value)
        with pytest.raises(ConfigError):
            cfg.validate(require_files=False)

    def test_missing_file(self, tmp_path):
        cfg = parse_config("input.grid = nope.csv", base_dir=tmp_path)
        with pytest.raises(ConfigError, match="not found"):
            cfg.validate()

    def test_digest_ignores_output_dir(self):
        a = parse_config("run.seed = 1\noutput.dir = a")
        b = parse_config("output.dir = b\nrun.seed = 1")
        c = parse_config("run.seed = 2")
        assert a.source_digest == b.source_digest != c.source_digest

    def test_dump_round_trip(self, tmp_path):
        cfg = parse_config("input.grid = g.csv\ninterpolation.method = bli,idw\nsweep.km_list = 10, 20\n"
                           "synthetic.bias = 0.1\n", base_dir=tmp_path)
        (tmp_path / "c.cfg").write_text(dump_config(cfg, base_dir=tmp_path))
        back = load_config(tmp_path / "c.cfg")
        for f in ("grid", "interpolation", "sweep_km", "synthetic", "fallback_alpha", "capacity_correction"):
            assert getattr(back, f) == getattr(cfg, f)


class TestGridIO:
    def test_round_trip(self, tmp_path, rng):
        g = small_grid(rng.uniform(0, 12, 30), rng.uniform(0, 14, 30), disph=1.5)
        io.write_grid(tmp_path / "g.csv", g)
        back = io.read_grid(tmp_path / "g.csv")
        assert back.geometry == g.geometry
        np.testing.assert_array_equal(back.times, g.times)
        np.testing.assert_allclose(back.u50, g.u50, rtol=1e-5)
        assert not back.has_2m

    def test_rejects_missing_column(self, tmp_path):
        (tmp_path / "g.csv").write_text("time,lat,lon,u10\n2016-01-01T00:00:00Z,0,0,1\n")
        with pytest.raises(io.IngestError, match="missing columns"):
            io.read_grid(tmp_path / "g.csv")

    def test_rejects_disorder_with_line(self, tmp_path):
        io.write_grid(tmp_path / "g.csv", small_grid(np.ones(3), nlat=2, nlon=2))
        lines = (tmp_path / "g.csv").read_text().splitlines()
        lines[2], lines[3] = lines[3], lines[2]
        (tmp_path / "g.csv").write_text("\n".join(lines) + "\n")
        with pytest.raises(io.IngestError, match="line 3"):
            io.read_grid(tmp_path / "g.csv")

    def test_rejects_bad_number(self, tmp_path):
        io.write_grid(tmp_path / "g.csv", small_grid(np.ones(2), nlat=2, nlon=2))
        text = (tmp_path / "g.csv").read_text().splitlines()
        parts = text[4].split(",")
        parts[3] = "abc"
        text[4] = ",".join(parts)
        (tmp_path / "g.csv").write_text("\n".join(text) + "\n")
        with pytest.raises(io.IngestError, match="line 5"):
            io.read_grid(tmp_path / "g.csv")

    def test_rejects_incomplete(self, tmp_path):
        io.write_grid(tmp_path / "g.csv", small_grid(np.ones(2), nlat=2, nlon=2))
        lines = (tmp_path / "g.csv").read_text().splitlines()[:-1]
        (tmp_path / "g.csv").write_text("\n".join(lines) + "\n")
        with pytest.raises(io.IngestError, match="complete grid"):
            io.read_grid(tmp_path / "g.csv")


class TestParksIO:
    def test_round_trip_and_exclusion(self, tmp_path, caplog):
        parks = [make_park("A", 30.0), make_park("B", 50.0, subsystem="South", hub_height=None)]
        io.write_parks(tmp_path / "p.csv", parks)
        with open(tmp_path / "p.csv", "a") as fh:
            fh.write("C,,,-37,CE,NorthEast,20,10,2000,100,100,2015-01-01\n")
        back, excluded = io.read_parks(tmp_path / "p.csv")
        assert [p.park_id for p in back] == ["A", "B"]
        assert back[1].turbine.hub_height is None and back[0].turbine.install_year == 2015
        assert excluded == [("C", "missing lat")]
        assert "excluded" in caplog.text

    def test_duplicate_id(self, tmp_path):
        io.write_parks(tmp_path / "p.csv", [make_park("A"), make_park("A")])
        with pytest.raises(io.IngestError, match="line 3"):
            io.read_parks(tmp_path / "p.csv")


class TestOtherIO:
    def test_stations_round_trip(self, tmp_path):
        s = station([1.0, np.nan, 3.5, 0.0], sid="S9")
        io.write_stations(tmp_path / "s.csv", tmp_path / "m.csv", [s])
        (back,) = io.read_stations(tmp_path / "s.csv", tmp_path / "m.csv")
        assert back.station_id == "S9"
        np.testing.assert_array_equal(back.speed, s.speed)
        np.testing.assert_array_equal(back.times, s.times)

    def test_daily_round_trip(self, tmp_path):
        d = np.arange(np.datetime64("2016-01-01"), np.datetime64("2016-01-05"))
        gen = {"R": GenerationSeries("R", d, [1.0, 2.5, 0.0, 3.25])}
        io.write_generation(tmp_path / "g.csv", gen)
        back = io.read_generation(tmp_path / "g.csv")["R"]
        np.testing.assert_array_equal(back.energy, gen["R"].energy)
        cap = {"R": CapacitySeries("R", d, [10.0, 10, 20, 20])}
        io.write_capacity(tmp_path / "c.csv", cap)
        np.testing.assert_array_equal(io.read_capacity(tmp_path / "c.csv")["R"].capacity, cap["R"].capacity)

    def test_reports_round_trip(self, tmp_path):
        reps = [MetricReport("R", "nn-none", 10, None, 1.5, -0.5, 3.0, 3.5, 100.0, 0.0625, -0.02083333)]
        io.write_reports(tmp_path / "v.csv", reps, "x")
        assert (tmp_path / "v.csv").read_text().startswith("#")
        (back,) = io.read_reports(tmp_path / "v.csv")
        assert back.correlation is None and back.rmse == 1.5 and back.rel_mbe == pytest.approx(-0.0208333)

    def test_duplicate_dates(self, tmp_path):
        (tmp_path / "g.csv").write_text("region,date,generation_gwh\nR,2016-01-01,1\nR,2016-01-01,2\n")
        with pytest.raises(io.IngestError, match="duplicate"):
            io.read_generation(tmp_path / "g.csv")
