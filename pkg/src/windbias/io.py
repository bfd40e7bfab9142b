"""CSV readers and writers for every file the pipeline consumes or emits.

Floats are written with 6 significant digits.  Readers raise IngestError
naming the file and, where it applies, the 1-based line number.
"""
from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import pandas as pd

from .biascorr import StationSeries
from .fleet import CapacitySeries, GenerationSeries, WindPark
from .grid import GridGeometry, GridPoint, MeanWindRaster, WindGrid
from .turbine import TurbineSpec

log = logging.getLogger(__name__)

FLOAT_FORMAT = "%.6g"

GRID_COLUMNS = ["time", "lat", "lon", "u10", "v10", "u50", "v50", "disph"]
PARK_COLUMNS = ["park_id", "name", "lat", "lon", "state", "subsystem", "capacity_mw", "n_turbines",
                "turbine_kw", "rotor_diameter_m", "hub_height_m", "commissioning_date"]
REPORT_COLUMNS = ["region", "method", "n_days", "correlation", "rmse_gwh", "mbe_gwh", "mean_sim_gwh",
                  "mean_obs_gwh", "mean_capacity_mw", "rel_rmse", "rel_mbe"]


class IngestError(ValueError):
    pass


def _read(path, required, **kw):
    path = Path(path)
    try:
        df = pd.read_csv(path, comment="#", **kw)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError, ValueError) as exc:
        raise IngestError(f"{path}: {exc}") from None
    missing = [c for c in required if c not in df.columns]
    if missing:
        raise IngestError(f"{path}: line 1: missing columns {missing}")
    return df


def _numeric(df, col, path, allow_missing=False):
    vals = pd.to_numeric(df[col], errors="coerce")
    bad = vals.isna() & (df[col].notna() if allow_missing else True)
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise IngestError(f"{path}: line {row + 2}: bad {col} value {df[col].iloc[row]!r}")
    return vals.to_numpy(dtype=np.float64)


def _times(series, path, unit="h"):
    try:
        t = pd.to_datetime(series, utc=True, format="ISO8601")
    except (ValueError, TypeError) as exc:
        raise IngestError(f"{path}: bad timestamp: {exc}") from None
    return t.dt.tz_localize(None).to_numpy().astype(f"datetime64[{unit}]")


def _iso_hours(times):
    return np.char.add(np.datetime_as_string(np.asarray(times, dtype="datetime64[s]"), unit="s"), "Z")


def _dates(series, path):
    try:
        d = pd.to_datetime(series, format="ISO8601")
    except (ValueError, TypeError) as exc:
        raise IngestError(f"{path}: bad date: {exc}") from None
    return d.to_numpy().astype("datetime64[D]")


def _regular_axis(values, name, path):
    axis = np.unique(values)
    if axis.size >= 2:
        steps = np.diff(axis)
        step = (axis[-1] - axis[0]) / (axis.size - 1)
        if not np.allclose(steps, step, rtol=1e-4, atol=1e-6):
            raise IngestError(f"{path}: {name} axis is not regularly spaced")
    else:
        step = 1.0
    return axis, float(step)


# ---------------------------------------------------------------------------
# grid and raster
# ---------------------------------------------------------------------------

def read_grid(path) -> WindGrid:
    df = _read(path, GRID_COLUMNS)
    times = _times(df["time"], path)
    lat = _numeric(df, "lat", path)
    lon = _numeric(df, "lon", path)
    lat_axis, dlat = _regular_axis(lat, "lat", path)
    lon_axis, dlon = _regular_axis(lon, "lon", path)
    t_axis = np.unique(times)
    nt, ny, nx = t_axis.size, lat_axis.size, lon_axis.size
    if len(df) != nt * ny * nx:
        raise IngestError(f"{path}: {len(df)} rows, expected {nt}x{ny}x{nx} for a complete grid")
    exp_t = np.repeat(t_axis, ny * nx)
    exp_lat = np.tile(np.repeat(lat_axis, nx), nt)
    exp_lon = np.tile(lon_axis, nt * ny)
    bad = (times != exp_t) | ~np.isclose(lat, exp_lat, atol=1e-6) | ~np.isclose(lon, exp_lon, atol=1e-6)
    if bad.any():
        row = int(np.flatnonzero(bad)[0])
        raise IngestError(f"{path}: line {row + 2}: rows must be ordered by (time, lat, lon)")
    if nt > 1 and np.any(np.diff(t_axis) != np.timedelta64(1, "h")):
        raise IngestError(f"{path}: time axis must be hourly without gaps")
    shape = (nt, ny, nx)
    fields = {}
    for col in ("u10", "v10", "u50", "v50"):
        fields[col] = _numeric(df, col, path).reshape(shape)
    for col in ("u2", "v2"):
        if col in df.columns:
            fields[col] = _numeric(df, col, path).reshape(shape)
    disph_all = _numeric(df, "disph", path).reshape(shape)
    if not np.allclose(disph_all, disph_all[0], atol=1e-6):
        raise IngestError(f"{path}: displacement height varies in time")
    geom = GridGeometry(float(lat_axis[0]), float(lon_axis[0]), dlat, dlon, ny, nx)
    try:
        return WindGrid(geom, t_axis, disph=disph_all[0], **fields)
    except ValueError as exc:
        raise IngestError(f"{path}: {exc}") from None


def write_grid(path, g: WindGrid):
    geo = g.geometry
    nt, ny, nx = g.u10.shape
    data = {
        "time": np.repeat(_iso_hours(g.times), ny * nx),
        "lat": np.tile(np.repeat(geo.lats, nx), nt),
        "lon": np.tile(geo.lons, nt * ny),
    }
    for col in ("u10", "v10", "u50", "v50"):
        data[col] = getattr(g, col).ravel()
    data["disph"] = np.tile(g.disph.ravel(), nt)
    if g.has_2m:
        data["u2"] = g.u2.ravel()
        data["v2"] = g.v2.ravel()
    pd.DataFrame(data).to_csv(path, index=False, float_format=FLOAT_FORMAT)


def read_raster(path) -> MeanWindRaster:
    df = _read(path, ["lat", "lon", "mean50"])
    lat = _numeric(df, "lat", path)
    lon = _numeric(df, "lon", path)
    lat_axis, dlat = _regular_axis(lat, "lat", path)
    lon_axis, dlon = _regular_axis(lon, "lon", path)
    ny, nx = lat_axis.size, lon_axis.size
    if len(df) != ny * nx:
        raise IngestError(f"{path}: raster is not a complete regular grid")
    i = np.rint((lat - lat_axis[0]) / dlat).astype(int)
    j = np.rint((lon - lon_axis[0]) / dlon).astype(int)
    means = {}
    for h in (50, 100, 200):
        col = f"mean{h}"
        if col in df.columns:
            arr = np.full((ny, nx), np.nan)
            arr[i, j] = _numeric(df, col, path)
            means[h] = arr
    geom = GridGeometry(float(lat_axis[0]), float(lon_axis[0]), dlat, dlon, ny, nx)
    try:
        return MeanWindRaster(geom, means)
    except ValueError as exc:
        raise IngestError(f"{path}: {exc}") from None


def write_raster(path, r: MeanWindRaster):
    geo = r.geometry
    data = {"lat": np.repeat(geo.lats, geo.nlon), "lon": np.tile(geo.lons, geo.nlat)}
    for h in sorted(r.means):
        data[f"mean{h}"] = r.means[h].ravel()
    pd.DataFrame(data).to_csv(path, index=False, float_format=FLOAT_FORMAT)


# ---------------------------------------------------------------------------
# parks
# ---------------------------------------------------------------------------

def _opt(v):
    return None if pd.isna(v) else float(v)


def read_parks(path):
    """Parks plus a list of (park_id, reason) for rows that were excluded."""
    df = _read(path, PARK_COLUMNS, dtype={"park_id": str, "name": str, "state": str, "subsystem": str,
                                          "commissioning_date": str})
    parks, excluded = [], []
    seen = set()
    for k, row in enumerate(df.itertuples(index=False)):
        line = k + 2
        pid = row.park_id
        if pd.isna(pid) or not str(pid).strip():
            raise IngestError(f"{path}: line {line}: park_id missing")
        pid = str(pid).strip()
        if pid in seen:
            raise IngestError(f"{path}: line {line}: duplicate park_id {pid}")
        seen.add(pid)
        missing = [c for c in ("lat", "lon", "state", "subsystem", "capacity_mw", "commissioning_date")
                   if pd.isna(getattr(row, c)) or str(getattr(row, c)).strip() == ""]
        if missing:
            reason = f"missing {', '.join(missing)}"
            log.warning("%s: line %d: park %s excluded (%s)", path, line, pid, reason)
            excluded.append((pid, reason))
            continue
        try:
            comm = np.datetime64(str(row.commissioning_date).strip()[:10], "D")
            n_turb = 1 if pd.isna(row.n_turbines) else int(row.n_turbines)
            turbine = TurbineSpec(_opt(row.turbine_kw), _opt(row.rotor_diameter_m), _opt(row.hub_height_m),
                                  None, int(comm.astype("datetime64[Y]").astype(int) + 1970))
            park = WindPark(pid, GridPoint(float(row.lat), float(row.lon)), str(row.state).strip(),
                            str(row.subsystem).strip(), float(row.capacity_mw), turbine, n_turb, comm,
                            "" if pd.isna(row.name) else str(row.name))
        except (ValueError, TypeError) as exc:
            raise IngestError(f"{path}: line {line}: {exc}") from None
        parks.append(park)
    return parks, excluded


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return FLOAT_FORMAT % v
    return str(v)


def write_parks(path, parks):
    rows = []
    for p in parks:
        t = p.turbine
        rows.append([p.park_id, p.name, _cell(p.location.lat), _cell(p.location.lon), p.state, p.subsystem,
                     _cell(float(p.installed_capacity)), str(p.n_turbines), _cell(t.capacity),
                     _cell(t.rotor_diameter), _cell(t.hub_height), str(p.commissioning_date)])
    _write_rows(path, PARK_COLUMNS, rows)


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join(r) + "\n")


def read_hub_training(path):
    df = _read(path, ["diameter_m", "hub_height_m"])
    return np.column_stack([_numeric(df, "diameter_m", path), _numeric(df, "hub_height_m", path)])


def write_hub_training(path, pairs):
    pd.DataFrame(np.asarray(pairs), columns=["diameter_m", "hub_height_m"]).to_csv(
        path, index=False, float_format=FLOAT_FORMAT)


# ---------------------------------------------------------------------------
# stations
# ---------------------------------------------------------------------------

def read_stations(meta_path, measurements_path):
    meta = _read(meta_path, ["station_id", "lat", "lon"], dtype={"station_id": str})
    meas = _read(measurements_path, ["station_id", "time", "speed_10m"], dtype={"station_id": str})
    speed = _numeric(meas, "speed_10m", measurements_path, allow_missing=True)
    times = _times(meas["time"], measurements_path)
    sid = meas["station_id"].astype(str).to_numpy()
    out = []
    lat = _numeric(meta, "lat", meta_path)
    lon = _numeric(meta, "lon", meta_path)
    known = set()
    for k, s in enumerate(meta["station_id"].astype(str)):
        known.add(s)
        sel = sid == s
        t = times[sel]
        order = np.argsort(t, kind="stable")
        try:
            out.append(StationSeries(s, GridPoint(lat[k], lon[k]), t[order], speed[sel][order]))
        except ValueError as exc:
            raise IngestError(f"{measurements_path}: {exc}") from None
    unknown = sorted(set(sid) - known)
    if unknown:
        log.warning("%s: measurements for unknown stations ignored: %s", measurements_path, unknown)
    return sorted(out, key=lambda s: s.station_id)


def write_stations(meta_path, measurements_path, stations):
    _write_rows(meta_path, ["station_id", "lat", "lon"],
                [[s.station_id, _cell(s.location.lat), _cell(s.location.lon)] for s in stations])
    frames = []
    for s in stations:
        frames.append(pd.DataFrame({"station_id": s.station_id, "time": _iso_hours(s.times),
                                    "speed_10m": s.speed}))
    pd.concat(frames).to_csv(measurements_path, index=False, float_format=FLOAT_FORMAT, na_rep="")


# ---------------------------------------------------------------------------
# daily series
# ---------------------------------------------------------------------------

def _read_daily(path, value_col):
    df = _read(path, ["region", "date", value_col], dtype={"region": str})
    vals = _numeric(df, value_col, path)
    dates = _dates(df["date"], path)
    regions = df["region"].astype(str).to_numpy()
    out = {}
    for r in sorted(set(regions)):
        sel = regions == r
        d = dates[sel]
        order = np.argsort(d, kind="stable")
        d = d[order]
        if d.size > 1 and np.any(np.diff(d) <= np.timedelta64(0, "D")):
            raise IngestError(f"{path}: duplicate dates for region {r}")
        out[r] = (d, vals[sel][order])
    return out


def read_generation(path) -> dict:
    return {r: GenerationSeries(r, d, v) for r, (d, v) in _read_daily(path, "generation_gwh").items()}


def read_capacity(path) -> dict:
    return {r: CapacitySeries(r, d, v) for r, (d, v) in _read_daily(path, "capacity_mw").items()}


def _write_daily(path, series: dict, value_col):
    frames = []
    for label in sorted(series):
        s = series[label]
        frames.append(pd.DataFrame({"region": label, "date": np.datetime_as_string(s.dates, unit="D"),
                                    value_col: s.values}))
    df = pd.concat(frames) if frames else pd.DataFrame(columns=["region", "date", value_col])
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT)


def write_generation(path, series: dict):
    _write_daily(path, series, "generation_gwh")


def write_capacity(path, series: dict):
    _write_daily(path, series, "capacity_mw")


# ---------------------------------------------------------------------------
# metric reports
# ---------------------------------------------------------------------------

def write_reports(path, reports, normalization=None):
    rows = []
    for r in reports:
        rows.append([r.region, r.method, str(r.n_days), _cell(r.correlation), _cell(r.rmse), _cell(r.mbe),
                     _cell(r.mean_sim), _cell(r.mean_obs), _cell(r.mean_capacity), _cell(r.rel_rmse),
                     _cell(r.rel_mbe)])
    with open(path, "w", newline="") as fh:
        if normalization:
            fh.write(f"# rel_rmse and rel_mbe normalized by {normalization}\n")
        fh.write(",".join(REPORT_COLUMNS) + "\n")
        for r in rows:
            fh.write(",".join(r) + "\n")


def read_reports(path):
    from .validate import MetricReport

    df = _read(path, REPORT_COLUMNS, dtype={"region": str, "method": str})
    out = []
    for row in df.itertuples(index=False):
        out.append(MetricReport(row.region, row.method, int(row.n_days), _opt(row.correlation), float(row.rmse_gwh),
                                float(row.mbe_gwh), float(row.mean_sim_gwh), float(row.mean_obs_gwh),
                                _opt(row.mean_capacity_mw), _opt(row.rel_rmse), _opt(row.rel_mbe)))
    return out
