"""Synthetic input bundle with a known truth, for desk-scale end-to-end runs.

The truth 10 m wind speed is a sum of two weather modes whose spatial
loadings are linear in (lat, lon), so bilinear interpolation of the grid
reproduces the truth exactly at any interior point.  The coarse grid is the
truth scaled by ``1 + bias``; the mean-wind raster holds unbiased truth
means on a fine grid; stations sample the truth with noise, gaps and an
injected calm run.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import fleet, io, turbine, validate, vertical
from .biascorr import StationSeries
from .config import RunConfig, dump_config
from .fleet import WindPark
from .grid import GridGeometry, GridPoint, MeanWindRaster, WindGrid

STATES = (("CE", "NorthEast"), ("RN", "NorthEast"), ("BA", "NorthEast"), ("RS", "South"), ("MA", "North"))
TURBINE_KW = (1500.0, 2000.0, 2100.0, 2300.0, 3000.0)
ROTOR_M = (82.0, 92.0, 100.0, 108.0, 116.0)
STATION_RING_KM = (8.0, 18.0, 28.0, 35.0, 45.0, 55.0, 65.0, 75.0, 85.0, 95.0)


@dataclass
class SyntheticSpec:
    seed: int = 0
    start_year: int = 2011
    years: int = 5
    lat0: float = -10.0
    lon0: float = -40.0
    dlat: float = 0.5
    dlon: float = 0.625
    nlat: int = 5
    nlon: int = 5
    raster_step: float = 0.05
    bias: float = 0.2
    diurnal_bias: float = 0.0
    n_parks: int = 12
    n_stations: int = 8
    station_noise: float = 0.15
    gap_fraction: float = 0.005
    noisy_stations: int = 1
    sparse_stations: int = 1
    disph: float = 1.0
    capacity_ratio: float = 1.0

    @classmethod
    def from_strings(cls, values: dict, seed: int = 0):
        kw = {"seed": seed}
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        for k, v in values.items():
            if k not in types:
                raise ValueError(f"unknown synthetic key {k!r}")
            kw[k] = int(v) if types[k] in ("int", int) else float(v)
        return cls(**kw)


def _ar1_lognormal(rng, n, phi=0.97, sigma=0.35):
    eps = rng.standard_normal(n)
    x = np.empty(n)
    x[0] = sigma * eps[0]
    s = math.sqrt(1 - phi * phi) * sigma
    for t in range(1, n):
        x[t] = phi * x[t - 1] + s * eps[t]
    return np.exp(x - sigma * sigma / 2)


class Truth:
    """Analytic truth wind field; see module docstring."""

    def __init__(self, spec: SyntheticSpec, rng):
        self.spec = spec
        start = np.datetime64(f"{spec.start_year:04d}-01-01T00", "h")
        stop = np.datetime64(f"{spec.start_year + spec.years:04d}-01-01T00", "h")
        self.times = np.arange(start, stop, dtype="datetime64[h]")
        n = self.times.size
        hour = (self.times.astype(np.int64) % 24).astype(float)
        month = (self.times.astype("datetime64[M]").astype(np.int64) % 12 + 1).astype(float)
        diurnal = 1 + 0.15 * np.cos(2 * np.pi * (hour - 15) / 24)
        seasonal = 1 + 0.2 * np.cos(2 * np.pi * (month - 9) / 12)
        self.x1 = diurnal * seasonal * _ar1_lognormal(rng, n)
        self.x2 = diurnal * seasonal * _ar1_lognormal(rng, n)
        self.theta = rng.uniform(0, 2 * np.pi) + np.cumsum(rng.normal(0, 0.1, n))
        self.alpha = 0.14 + 0.08 * np.cos(2 * np.pi * (hour - 3) / 24)
        d = spec.disph
        self.ratio50 = (50.0 / (10.0 + d)) ** self.alpha
        self.ratio2 = ((2.0 + d) / (10.0 + d)) ** self.alpha
        self.bias = (1 + spec.bias) * (1 + spec.diurnal_bias * np.cos(2 * np.pi * (hour - 14) / 24))
        self.latc = spec.lat0 + spec.dlat * (spec.nlat - 1) / 2
        self.lonc = spec.lon0 + spec.dlon * (spec.nlon - 1) / 2

    def loadings(self, lat, lon):
        dy = np.asarray(lat) - self.latc
        dx = np.asarray(lon) - self.lonc
        return 5.0 + 0.4 * dy + 0.3 * dx, 2.5 - 0.3 * dy + 0.5 * dx

    def speed10(self, lat, lon):
        b1, b2 = self.loadings(lat, lon)
        return b1 * self.x1 + b2 * self.x2

    def grid(self) -> WindGrid:
        s = self.spec
        geo = GridGeometry(s.lat0, s.lon0, s.dlat, s.dlon, s.nlat, s.nlon)
        lat, lon = np.meshgrid(geo.lats, geo.lons, indexing="ij")
        b1, b2 = self.loadings(lat, lon)
        s10 = (self.x1 * self.bias)[:, None, None] * b1 + (self.x2 * self.bias)[:, None, None] * b2
        c = np.cos(self.theta)[:, None, None]
        sn = np.sin(self.theta)[:, None, None]
        r50 = self.ratio50[:, None, None]
        r2 = self.ratio2[:, None, None]
        return WindGrid(geo, self.times, s10 * c, s10 * sn, s10 * r50 * c, s10 * r50 * sn,
                        np.full((s.nlat, s.nlon), s.disph), u2=s10 * r2 * c, v2=s10 * r2 * sn)

    def raster(self) -> MeanWindRaster:
        s = self.spec
        lat_span = s.dlat * (s.nlat - 1)
        lon_span = s.dlon * (s.nlon - 1)
        ny = int(round(lat_span / s.raster_step)) + 1
        nx = int(round(lon_span / s.raster_step)) + 1
        geo = GridGeometry(s.lat0, s.lon0, s.raster_step, s.raster_step, ny, nx)
        lat, lon = np.meshgrid(geo.lats, geo.lons, indexing="ij")
        b1, b2 = self.loadings(lat, lon)
        r100 = (100.0 / (10.0 + s.disph)) ** self.alpha
        means = {
            50: b1 * np.mean(self.x1 * self.ratio50) + b2 * np.mean(self.x2 * self.ratio50),
            100: b1 * np.mean(self.x1 * r100) + b2 * np.mean(self.x2 * r100),
        }
        return MeanWindRaster(geo, means)

    def park_power(self, park: WindPark) -> np.ndarray:
        """True hourly MW of a park (uncorrected model chain on the truth)."""
        s10 = self.speed10(park.location.lat, park.location.lon)
        hub = vertical.hub_height_speed("power_law_10_50", s10, s10 * self.ratio50, self.spec.disph,
                                        park.turbine.hub_height).speed
        curve = turbine.build_power_curve(park.turbine.specific_power)
        cf = turbine.simulate_turbine(curve, hub)
        active = self.times.astype("datetime64[D]") >= park.commissioning_date
        return np.where(active, cf * park.installed_capacity, 0.0)


def _make_parks(spec, rng, start):
    parks = []
    lat_lo, lat_hi = spec.lat0 + spec.dlat, spec.lat0 + spec.dlat * (spec.nlat - 2)
    lon_lo, lon_hi = spec.lon0 + spec.dlon, spec.lon0 + spec.dlon * (spec.nlon - 2)
    for k in range(spec.n_parks):
        state, sub = STATES[k % len(STATES)]
        kw = float(rng.choice(TURBINE_KW))
        n_turb = max(1, int(round(rng.uniform(20, 120) * 1000 / kw)))
        diam = float(rng.choice(ROTOR_M))
        if k == 0:
            comm = start - np.timedelta64(400, "D")
        elif k == 1:
            comm = start
        else:
            comm = start + np.timedelta64(int(rng.integers(0, 365 * min(3, spec.years))), "D")
        hub = None if k % 3 == 0 else round(float(25 + 0.7 * diam + rng.normal(0, 4)), 1)
        if k % 5 == 4:
            diam_field = None
        else:
            diam_field = diam
        t = turbine.TurbineSpec(kw, diam_field, hub, None, None)
        loc = GridPoint(round(float(rng.uniform(lat_lo, lat_hi)), 4), round(float(rng.uniform(lon_lo, lon_hi)), 4))
        parks.append(WindPark(f"P{k:03d}", loc, state, sub, n_turb * kw / 1000.0, t, n_turb, comm,
                              f"Synthetic park {k}"))
    return parks


def _offset(point, km, bearing):
    dlat = km / 111.195 * math.cos(bearing)
    dlon = km / (111.195 * math.cos(math.radians(point.lat))) * math.sin(bearing)
    return GridPoint(round(point.lat + dlat, 4), round(point.lon + dlon, 4))


def _make_stations(spec, rng, truth: Truth, parks):
    stations = []
    n = truth.times.size
    for k in range(spec.n_stations):
        park = parks[k % len(parks)]
        km = STATION_RING_KM[k % len(STATION_RING_KM)]
        loc = _offset(park.location, km, rng.uniform(0, 2 * np.pi))
        if k < spec.noisy_stations:
            speed = rng.lognormal(np.log(6.0), 0.5, n)
        else:
            local = rng.uniform(0.9, 1.1)
            speed = truth.speed10(loc.lat, loc.lon) * local * (1 + spec.station_noise * rng.standard_normal(n))
            speed = np.clip(speed, 0.0, None)
        speed = np.round(speed, 1)
        if spec.noisy_stations <= k < spec.noisy_stations + spec.sparse_stations:
            speed[rng.random(n) < 0.6] = np.nan
        else:
            # random gaps only in months with slack above the 720 h completeness bar
            month = truth.times.astype("datetime64[M]")
            days = ((month + 1).astype("datetime64[D]") - month.astype("datetime64[D]")).astype(int)
            slack = (days == 31) | (days < 30)
            speed[slack & (rng.random(n) < spec.gap_fraction)] = np.nan
            # one calm run long enough to be cleaned away
            at = int(rng.integers(0, n - 200))
            speed[at:at + 130] = 0.0
        stations.append(StationSeries(f"S{k:03d}", loc, truth.times, speed))
    return stations


def generate(spec: SyntheticSpec, out_dir) -> Path:
    """Write a full input bundle plus truth generation and a ready config.

    Returns the path of the written config file.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(spec.seed)
    truth = Truth(spec, rng)
    start = truth.times[0].astype("datetime64[D]")
    end = truth.times[-1].astype("datetime64[D]")

    io.write_grid(out / "grid.csv", truth.grid())
    io.write_raster(out / "raster.csv", truth.raster())

    diam = rng.uniform(60, 130, 60)
    io.write_hub_training(out / "hub_training.csv", np.column_stack([diam, 25 + 0.7 * diam + rng.normal(0, 5, 60)]))
    io.write_parks(out / "parks.csv", _make_parks(spec, rng, start))
    io.write_stations(out / "stations.csv", out / "measurements.csv",
                      _make_stations(spec, rng, truth, io.read_parks(out / "parks.csv")[0]))

    # truth generation from the parks exactly as the pipeline will read them
    from .pipeline import resolve_turbines

    hub_model = turbine.fit_hub_height_model(io.read_hub_training(out / "hub_training.csv"))
    parks = resolve_turbines(io.read_parks(out / "parks.csv")[0], hub_model)
    park_series = {}
    for p in parks:
        dates, gwh = validate.daily_energy(truth.times, truth.park_power(p))
        keep = dates >= p.commissioning_date
        park_series[p.park_id] = fleet.GenerationSeries(p.park_id, dates[keep], gwh[keep])
    observed = dict(park_series)
    for grouping in ("state", "subsystem", "country"):
        observed.update(fleet.aggregate_generation(park_series, parks, grouping))
    io.write_generation(out / "observed.csv", observed)

    ref = {}
    for lab, grouping in ((fleet.COUNTRY_LABEL, "country"), ("NorthEast", "subsystem"), ("South", "subsystem")):
        cap = fleet.capacity_timeseries(parks, start, end, grouping, None if grouping == "country" else lab)
        ref[lab] = fleet.CapacitySeries(lab, cap.dates, cap.capacity * spec.capacity_ratio)
    io.write_capacity(out / "reference_capacity.csv", ref)

    cfg = RunConfig(
        grid=str(out / "grid.csv"), raster=str(out / "raster.csv"), parks=str(out / "parks.csv"),
        stations=str(out / "stations.csv"), measurements=str(out / "measurements.csv"),
        observed=str(out / "observed.csv"), reference_capacity=str(out / "reference_capacity.csv"),
        hub_training=str(out / "hub_training.csv"), hub_model="fit",
        biascorr=["none", "mean_gwa", "mean_station", "hm_station"],
        seed=spec.seed, out_dir=str(out / "results"),
        synthetic={k: str(v) for k, v in dataclasses.asdict(spec).items() if k != "seed"},
    )
    path = out / "config.cfg"
    path.write_text("# synthetic bundle; truth generation is in observed.csv\n" + dump_config(cfg, base_dir=out))
    return path


def run_synthetic(cfg: RunConfig, out_dir=None) -> Path:
    spec = SyntheticSpec.from_strings(cfg.synthetic, seed=cfg.seed)
    return generate(spec, out_dir or cfg.out_dir)
