"""Builders shared by several test modules."""
import numpy as np

from windbias.biascorr import StationSeries
from windbias.fleet import WindPark
from windbias.grid import GridPoint
from windbias.turbine import TurbineSpec

STATES = {"NorthEast": ("CE", "RN", "BA", "PE"), "South": ("RS", "SC"), "North": ("MA", "PA")}


def make_park(pid, capacity=30.0, subsystem="NorthEast", state=None, comm="2015-01-01",
              lat=-5.0, lon=-37.0, **turbine):
    spec = dict(capacity=2000.0, rotor_diameter=100.0, hub_height=100.0)
    spec.update(turbine)
    n = max(1, round(capacity * 1000 / spec["capacity"])) if spec["capacity"] else 1
    return WindPark(pid, GridPoint(lat, lon), state or STATES[subsystem][0], subsystem, capacity,
                    TurbineSpec(**spec), n, np.datetime64(comm, "D"))


def random_fleet(rng, n=50, start="2015-01-01", days=730):
    parks = []
    subs = list(STATES)
    for k in range(n):
        sub = subs[int(rng.integers(0, 3))]
        state = STATES[sub][int(rng.integers(0, len(STATES[sub])))]
        comm = np.datetime64(start, "D") + int(rng.integers(-200, days))
        parks.append(make_park(f"P{k:03d}", float(rng.uniform(5, 200)), sub, state, comm))
    return parks


def hourly(start, n):
    return np.datetime64(start, "h") + np.arange(n)


def station(speed, start="2000-01-01T00", sid="S1", lat=-5.0, lon=-37.0):
    speed = np.asarray(speed, dtype=float)
    return StationSeries(sid, GridPoint(lat, lon), hourly(start, speed.size), speed)


def small_grid(speed10, speed50=None, start="2016-01-01T00", nlat=5, nlon=5, disph=0.0, theta=0.3):
    """Spatially uniform grid from hourly speed series; wind blows at a fixed angle."""
    from windbias.grid import GridGeometry, WindGrid

    speed10 = np.asarray(speed10, dtype=float)
    speed50 = speed10 if speed50 is None else np.asarray(speed50, dtype=float)
    shape = (speed10.size, nlat, nlon)
    one = np.ones(shape)
    geo = GridGeometry(-6.0, -38.0, 0.5, 0.5, nlat, nlon)
    c, s = np.cos(theta), np.sin(theta)
    return WindGrid(geo, hourly(start, speed10.size), speed10[:, None, None] * c * one,
                    speed10[:, None, None] * s * one, speed50[:, None, None] * c * one,
                    speed50[:, None, None] * s * one, np.full((nlat, nlon), disph))


def write_bundle(root, grid, parks, raster_mean50=None, stations=(), observed=None, extra=""):
    """Write a hand-made input bundle and config; returns the config path."""
    from pathlib import Path

    from windbias import io
    from windbias.grid import MeanWindRaster

    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    io.write_grid(root / "grid.csv", grid)
    io.write_parks(root / "parks.csv", parks)
    lines = ["input.grid = grid.csv", "input.parks = parks.csv"]
    if raster_mean50 is not None:
        g = grid.geometry
        io.write_raster(root / "raster.csv",
                        MeanWindRaster(g, {50: np.broadcast_to(raster_mean50, (g.nlat, g.nlon))}))
        lines.append("input.raster = raster.csv")
    if stations:
        io.write_stations(root / "stations.csv", root / "measurements.csv", list(stations))
        lines += ["input.stations = stations.csv", "input.measurements = measurements.csv"]
    if observed is not None:
        io.write_generation(root / "observed.csv", observed)
        lines.append("input.observed = observed.csv")
    lines.append("output.dir = out")
    (root / "run.cfg").write_text("\n".join(lines) + "\n" + extra)
    return root / "run.cfg"
