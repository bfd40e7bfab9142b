"""Daily energy and the error metrics comparing simulated with observed generation."""
from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .fleet import CapacitySeries, GenerationSeries

log = logging.getLogger(__name__)

# relative metrics divide by mean capacity expressed as daily energy (MW x 24 h)
NORMALIZATION = "mean_capacity_mw*24h"


@dataclass(frozen=True)
class MetricReport:
    region: str
    method: str
    n_days: int
    correlation: Optional[float]
    rmse: float
    mbe: float
    mean_sim: float
    mean_obs: float
    mean_capacity: Optional[float] = None
    rel_rmse: Optional[float] = None
    rel_mbe: Optional[float] = None


def daily_energy(times, power_mw):
    """Sum hourly MW into GWh per UTC day; days with fewer than 24 samples are dropped.

    Returns ``(dates, gwh)``.
    """
    times = np.asarray(times, dtype="datetime64[h]")
    power = np.asarray(power_mw, dtype=np.float64)
    if times.size == 0:
        return np.array([], dtype="datetime64[D]"), np.array([])
    days = times.astype("datetime64[D]")
    dates, start, counts = np.unique(days, return_index=True, return_counts=True)
    sums = np.add.reduceat(power, start)
    full = counts == 24
    return dates[full], sums[full] / 1000.0


def pearson(sim, obs) -> Optional[float]:
    """Sample correlation; None when fewer than 2 values or a series is constant."""
    x = np.asarray(sim, dtype=np.float64)
    y = np.asarray(obs, dtype=np.float64)
    if x.size != y.size:
        raise ValueError("series differ in length")
    if x.size < 2:
        return None
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = (dx * dx).sum()
    syy = (dy * dy).sum()
    if sxx == 0 or syy == 0:
        return None
    return float((dx * dy).sum() / math.sqrt(sxx * syy))


def rmse(sim, obs) -> float:
    d = np.asarray(sim, dtype=np.float64) - np.asarray(obs, dtype=np.float64)
    if d.size == 0:
        raise ValueError("no paired days")
    return float(np.sqrt(np.mean(d * d)))


def mbe(sim, obs) -> float:
    """Mean of sim - obs; positive means the simulation overestimates."""
    d = np.asarray(sim, dtype=np.float64) - np.asarray(obs, dtype=np.float64)
    if d.size == 0:
        raise ValueError("no paired days")
    return float(np.mean(d))


def relative_metrics(report: MetricReport, capacity: CapacitySeries, dates=None) -> MetricReport:
    """Attach rmse and mbe normalized by mean capacity as daily energy.

    ``dates`` restricts the capacity mean to the validation window.
    """
    cap = capacity.capacity
    if dates is not None:
        _, _, ic = np.intersect1d(np.asarray(dates, dtype="datetime64[D]"), capacity.dates,
                                  assume_unique=True, return_indices=True)
        if ic.size == 0:
            raise ValueError(f"capacity for {report.region} does not overlap the validation window")
        cap = cap[ic]
    mean_cap = float(cap.mean()) if cap.size else 0.0
    if not mean_cap > 0:
        raise ValueError(f"mean capacity of {report.region} is zero")
    base = mean_cap * 24.0 / 1000.0
    return dataclasses.replace(report, mean_capacity=mean_cap,
                               rel_rmse=report.rmse / base, rel_mbe=report.mbe / base)


def paired(sim: GenerationSeries, obs: GenerationSeries):
    common, i_s, i_o = np.intersect1d(sim.dates, obs.dates, assume_unique=True, return_indices=True)
    return common, sim.energy[i_s], obs.energy[i_o]


def compare(sim: GenerationSeries, obs: GenerationSeries, method: str = "none",
            capacity: Optional[CapacitySeries] = None) -> MetricReport:
    dates, s, o = paired(sim, obs)
    if dates.size == 0:
        raise ValueError(f"no common days for {sim.label}")
    rep = MetricReport(sim.label, method, int(dates.size), pearson(s, o), rmse(s, o), mbe(s, o),
                       float(s.mean()), float(o.mean()))
    if capacity is not None:
        rep = relative_metrics(rep, capacity, dates)
    return rep


def evaluate(sim_by_region: dict, obs_by_region: dict, capacity_by_region: Optional[dict] = None,
             method: str = "none") -> list:
    """One report per region present in both inputs, sorted by region label."""
    common = sorted(set(sim_by_region) & set(obs_by_region))
    for r in sorted(set(sim_by_region) ^ set(obs_by_region)):
        side = "simulated" if r in sim_by_region else "observed"
        log.warning("region %s only present in %s data, skipped", r, side)
    if not common:
        raise ValueError("no common regions between simulated and observed data")
    out = []
    for r in common:
        cap = (capacity_by_region or {}).get(r)
        try:
            out.append(compare(sim_by_region[r], obs_by_region[r], method, cap))
        except ValueError as exc:
            log.warning("region %s skipped: %s", r, exc)
    return out


def daily_differences(sim: GenerationSeries, obs: GenerationSeries):
    """Per-day (date, sim, obs, sim - obs) rows for plotting tools."""
    dates, s, o = paired(sim, obs)
    return dates, s, o, s - o
