"""Station cleaning and qualification, station matching, and the mean and
hour-of-day x month wind speed corrections."""
from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .grid import GridPoint

log = logging.getLogger(__name__)

METHODS = ("none", "mean_gwa", "mean_station", "hm_station")
MIN_RUN_HOURS = 120
COMPLETE_MONTH_HOURS = 720
USABLE_MONTH_HOURS = 240
MIN_COMPLETE_YEARS = 4
EPOCH_START_YEAR = 1999
MAX_STATION_KM = 40.0
MIN_CORRELATION = 0.5

_HOUR = np.timedelta64(1, "h")


@dataclass(frozen=True, eq=False)
class StationSeries:
    """Hourly 10 m wind speed at a station; NaN marks a missing hour."""

    station_id: str
    location: GridPoint
    times: np.ndarray
    speed: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype="datetime64[h]")
        speed = np.asarray(self.speed, dtype=np.float64)
        if times.shape != speed.shape:
            raise ValueError(f"station {self.station_id}: times and speeds differ in length")
        if times.size > 1 and np.any(np.diff(times) <= np.timedelta64(0, "h")):
            raise ValueError(f"station {self.station_id}: times not strictly increasing")
        if np.any(speed[~np.isnan(speed)] < 0):
            raise ValueError(f"station {self.station_id}: negative wind speed")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "speed", speed)

    def with_speed(self, speed) -> "StationSeries":
        return dataclasses.replace(self, speed=speed)


@dataclass(frozen=True, eq=False)
class HmFactors:
    """Correction factor per (hour-of-day, month); ``factors[h, m-1]``."""

    factors: np.ndarray
    covered: np.ndarray
    utc_offset_hours: int = 0

    def __post_init__(self):
        if self.factors.shape != (24, 12) or self.covered.shape != (24, 12):
            raise ValueError("hm factors must be 24 x 12")
        if np.any(~np.isfinite(self.factors)) or np.any(self.factors <= 0):
            raise ValueError("hm factors must be positive and finite")


@dataclass(frozen=True, eq=False)
class CorrectedSeries:
    speed: np.ndarray
    method: str

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown correction method {self.method!r}")


# ---------------------------------------------------------------------------
# cleaning and qualification
# ---------------------------------------------------------------------------

def clean_constant_runs(series: StationSeries, min_run_hours: int = MIN_RUN_HOURS) -> StationSeries:
    """Blank out runs of identical consecutive values lasting min_run_hours or more.

    Missing hours and gaps in the time axis break a run.
    """
    breaks = np.ones(series.times.size, dtype=np.bool_)
    if series.times.size > 1:
        breaks[1:] = np.diff(series.times) != _HOUR
    drop = _kernels.constant_run_mask(series.speed, breaks, int(min_run_hours))
    if not drop.any():
        return series
    speed = series.speed.copy()
    speed[drop] = np.nan
    return series.with_speed(speed)


def _year_month(times):
    months = times.astype("datetime64[M]").astype(np.int64)
    return months // 12 + 1970, months % 12 + 1


def monthly_present_hours(series: StationSeries) -> dict:
    """Present-hour count for every (year, month) with any data."""
    present = ~np.isnan(series.speed)
    year, month = _year_month(series.times[present])
    keys, counts = np.unique(year * 100 + month, return_counts=True)
    return {(int(k // 100), int(k % 100)): int(c) for k, c in zip(keys, counts)}


def qualify_station(series: StationSeries, epoch_start_year: int = EPOCH_START_YEAR,
                    min_complete_years: int = MIN_COMPLETE_YEARS) -> tuple[bool, dict]:
    """Decide whether a cleaned station may be used.

    Qualified when every calendar month except February has at least
    ``min_complete_years`` years (from ``epoch_start_year``) with 720 or more
    present hours.  The mask maps (year, month) to True when the month holds
    at least 240 present hours.
    """
    counts = monthly_present_hours(series)
    complete = {m: 0 for m in range(1, 13)}
    for (y, m), c in counts.items():
        if y >= epoch_start_year and c >= COMPLETE_MONTH_HOURS:
            complete[m] += 1
    qualified = all(complete[m] >= min_complete_years for m in range(1, 13) if m != 2)
    usable = {k: c >= USABLE_MONTH_HOURS for k, c in counts.items()}
    return qualified, usable


def mask_unusable_months(series: StationSeries, usable: dict) -> StationSeries:
    year, month = _year_month(series.times)
    good = np.array([y * 100 + m for (y, m), ok in usable.items() if ok], dtype=np.int64)
    keep = np.isin(year * 100 + month, good)
    speed = np.where(keep, series.speed, np.nan)
    return series.with_speed(speed)


def prepare_station(series: StationSeries, min_run_hours: int = MIN_RUN_HOURS,
                    epoch_start_year: int = EPOCH_START_YEAR,
                    min_complete_years: int = MIN_COMPLETE_YEARS) -> Optional[StationSeries]:
    """Clean, qualify and month-mask a station; None when it is not qualified."""
    cleaned = clean_constant_runs(series, min_run_hours)
    ok, usable = qualify_station(cleaned, epoch_start_year, min_complete_years)
    if not ok:
        return None
    return mask_unusable_months(cleaned, usable)


# ---------------------------------------------------------------------------
# matching
# ---------------------------------------------------------------------------

def match_station(location, stations, max_km: float = MAX_STATION_KM):
    """Nearest station within ``max_km`` (inclusive), or None.

    ``location`` is a GridPoint or anything with a ``location`` attribute;
    ``stations`` is a sequence of StationSeries (or (id, GridPoint) pairs).
    Equal distances resolve to the smaller station id.
    """
    point = getattr(location, "location", location)
    if not stations:
        return None
    ids, lats, lons = [], [], []
    for s in stations:
        sid, loc = (s.station_id, s.location) if hasattr(s, "station_id") else s
        ids.append(sid)
        lats.append(loc.lat)
        lons.append(loc.lon)
    d = _kernels.haversine_many_np(point.lat, point.lon, np.array(lats), np.array(lons))
    order = sorted(range(len(ids)), key=lambda k: (d[k], ids[k]))
    best = order[0]
    if d[best] <= max_km:
        return ids[best]
    return None


# ---------------------------------------------------------------------------
# mean approximation
# ---------------------------------------------------------------------------

def mean_factor(ref_mean: float, model_mean: float) -> float:
    if not model_mean > 0:
        raise ZeroDivisionError("model mean wind speed is zero")
    if ref_mean < 0:
        raise ValueError("reference mean must be non-negative")
    return ref_mean / model_mean


def align(station: StationSeries, model_times):
    """Station speeds on the model time axis (NaN where the station has none)."""
    model_times = np.asarray(model_times, dtype="datetime64[h]")
    out = np.full(model_times.size, np.nan)
    _, im, is_ = np.intersect1d(model_times, station.times, assume_unique=True, return_indices=True)
    out[im] = station.speed[is_]
    return out


def paired_means(ref, model):
    """Means of ``ref`` and ``model`` over hours where both are present."""
    ref = np.asarray(ref, dtype=np.float64)
    model = np.asarray(model, dtype=np.float64)
    ok = ~(np.isnan(ref) | np.isnan(model))
    if not ok.any():
        raise ValueError("no paired samples")
    return float(ref[ok].mean()), float(model[ok].mean())


def station_mean_factor(ref_on_model_axis, model_10m) -> float:
    return mean_factor(*paired_means(ref_on_model_axis, model_10m))


def raster_mean_factor(raster_mean_50: float, model_50m) -> float:
    return mean_factor(raster_mean_50, float(np.nanmean(model_50m)))


def apply_mean_correction(hub_series, factor: float, method: str = "mean_gwa") -> CorrectedSeries:
    if not factor > 0:
        raise ValueError("correction factor must be positive")
    return CorrectedSeries(np.asarray(hub_series, dtype=np.float64) * factor, method)


# ---------------------------------------------------------------------------
# hour-of-day x month correction
# ---------------------------------------------------------------------------

def hm_bins(times, utc_offset_hours: int = 0):
    """Flat bin index hour*12 + (month-1) in local time."""
    local = np.asarray(times, dtype="datetime64[h]") + np.timedelta64(int(utc_offset_hours), "h")
    hour = local.astype(np.int64) % 24
    month = local.astype("datetime64[M]").astype(np.int64) % 12
    return hour * 12 + month


def hm_factors(ref_on_model_axis, model_times, model_10m, utc_offset_hours: int = 0) -> HmFactors:
    """Ratio of summed reference to summed model speed per (hour, month) bin.

    Only hours where both series are present count.  Bins without data, with
    a zero model sum or a zero reference sum keep factor 1 and are flagged
    uncovered.  ``ref_on_model_axis`` may also be a StationSeries.
    """
    if isinstance(ref_on_model_axis, StationSeries):
        ref_on_model_axis = align(ref_on_model_axis, model_times)
    ref = np.asarray(ref_on_model_axis, dtype=np.float64)
    model = np.asarray(model_10m, dtype=np.float64)
    bins = hm_bins(model_times, utc_offset_hours)
    ref_sum, model_sum, counts = _kernels.bin_sums(ref, model, bins, 24 * 12)
    covered = (counts > 0) & (model_sum > 0) & (ref_sum > 0)
    factors = np.ones(24 * 12)
    factors[covered] = ref_sum[covered] / model_sum[covered]
    return HmFactors(factors.reshape(24, 12), covered.reshape(24, 12), int(utc_offset_hours))


def apply_hm_correction(times, hub_series, factors: HmFactors) -> CorrectedSeries:
    bins = hm_bins(times, factors.utc_offset_hours)
    speed = np.asarray(hub_series, dtype=np.float64) * factors.factors.ravel()[bins]
    return CorrectedSeries(speed, "hm_station")


def pearson_paired(a, b) -> Optional[float]:
    """Pearson correlation over hours where both are present; None if undefined."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    ok = ~(np.isnan(a) | np.isnan(b))
    if ok.sum() < 2:
        return None
    da = a[ok] - a[ok].mean()
    db = b[ok] - b[ok].mean()
    sab = (da * db).sum()
    saa = (da * da).sum()
    sbb = (db * db).sum()
    if saa == 0 or sbb == 0:
        return None
    return float(sab / math.sqrt(saa * sbb))


def correction_gate(ref_on_model_axis, corrected_10m, min_correlation: float = MIN_CORRELATION,
                    fallback: str = "mean_station") -> str:
    """Keep the hour-month correction only if the corrected 10 m series still
    correlates with the station at ``min_correlation`` or better."""
    r = pearson_paired(ref_on_model_axis, corrected_10m)
    if r is None:
        log.info("correlation gate: fewer than 2 paired hours or zero variance, falling back")
        return fallback
    return "hm_station" if r >= min_correlation else fallback
