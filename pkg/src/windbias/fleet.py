"""Wind-park registry, installed-capacity series and regional aggregation."""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .grid import GridPoint
from .turbine import TurbineSpec

log = logging.getLogger(__name__)

SUBSYSTEMS = ("NorthEast", "South", "North")
GROUPINGS = ("park", "state", "subsystem", "country")
# reported at subsystem level; North only enters the country total
REPORTED_SUBSYSTEMS = ("NorthEast", "South")
COUNTRY_LABEL = "Brazil"


class EmptyRegionError(ValueError):
    pass


@dataclass(frozen=True)
class WindPark:
    park_id: str
    location: GridPoint
    state: str
    subsystem: str
    installed_capacity: float  # MW
    turbine: TurbineSpec
    n_turbines: int
    commissioning_date: np.datetime64
    name: str = ""

    def __post_init__(self):
        if not self.installed_capacity > 0:
            raise ValueError(f"park {self.park_id}: installed capacity must be positive")
        if self.n_turbines < 1:
            raise ValueError(f"park {self.park_id}: needs at least one turbine")
        if self.subsystem not in SUBSYSTEMS:
            raise ValueError(f"park {self.park_id}: unknown subsystem {self.subsystem!r}")
        object.__setattr__(self, "commissioning_date",
                           np.datetime64(self.commissioning_date, "D"))
        if self.turbine.capacity is not None:
            nominal = self.n_turbines * self.turbine.capacity / 1000.0
            if abs(self.installed_capacity - nominal) > 0.2 * self.installed_capacity:
                log.warning("park %s: installed capacity %.3g MW differs from %d x %.4g kW by more than 20%%",
                            self.park_id, self.installed_capacity, self.n_turbines, self.turbine.capacity)

    def label(self, grouping: str) -> Optional[str]:
        """Region label of this park at a grouping level (None = not reported)."""
        if grouping == "park":
            return self.park_id
        if grouping == "state":
            return self.state
        if grouping == "subsystem":
            return self.subsystem if self.subsystem in REPORTED_SUBSYSTEMS else None
        if grouping == "country":
            return COUNTRY_LABEL
        raise ValueError(f"unknown grouping {grouping!r}")


@dataclass(frozen=True, eq=False)
class CapacitySeries:
    label: str
    dates: np.ndarray
    capacity: np.ndarray  # MW

    def __post_init__(self):
        object.__setattr__(self, "dates", np.asarray(self.dates, dtype="datetime64[D]"))
        object.__setattr__(self, "capacity", np.asarray(self.capacity, dtype=np.float64))
        if self.dates.shape != self.capacity.shape:
            raise ValueError("dates and capacity differ in length")

    @property
    def values(self):
        return self.capacity


@dataclass(frozen=True, eq=False)
class GenerationSeries:
    label: str
    dates: np.ndarray
    energy: np.ndarray  # GWh per day

    def __post_init__(self):
        object.__setattr__(self, "dates", np.asarray(self.dates, dtype="datetime64[D]"))
        object.__setattr__(self, "energy", np.asarray(self.energy, dtype=np.float64))
        if self.dates.shape != self.energy.shape:
            raise ValueError("dates and energy differ in length")

    @property
    def values(self):
        return self.energy


def members(parks, grouping: str = "country", label: Optional[str] = None):
    """Parks belonging to region ``label`` at level ``grouping``."""
    if grouping not in GROUPINGS:
        raise ValueError(f"unknown grouping {grouping!r}")
    if grouping == "country" or label is None:
        return list(parks)
    if grouping == "subsystem":
        # an explicit subsystem filter may still ask for North
        return [p for p in parks if p.subsystem == label]
    return [p for p in parks if p.label(grouping) == label]


def capacity_timeseries(parks, start, end, grouping: str = "country",
                        label: Optional[str] = None) -> CapacitySeries:
    """Daily installed capacity over [start, end] from commissioning dates."""
    start = np.datetime64(start, "D")
    end = np.datetime64(end, "D")
    if end < start:
        raise ValueError("empty date range")
    chosen = members(parks, grouping, label)
    if not chosen:
        raise EmptyRegionError(f"no parks in {grouping} {label!r}")
    order = sorted(chosen, key=lambda p: p.park_id)
    comm = np.array([p.commissioning_date for p in order], dtype="datetime64[D]")
    cap = np.array([p.installed_capacity for p in order])
    dates = np.arange(start, end + np.timedelta64(1, "D"), dtype="datetime64[D]")
    idx = np.argsort(comm, kind="stable")
    cum = np.concatenate([[0.0], np.cumsum(cap[idx])])
    n_active = np.searchsorted(comm[idx], dates, side="right")
    return CapacitySeries(label or COUNTRY_LABEL, dates, cum[n_active])


def _overlap(a, b):
    common, ia, ib = np.intersect1d(a.dates, b.dates, assume_unique=True, return_indices=True)
    return common, ia, ib


def capacity_correction_factor(cap_ref: CapacitySeries, cap_model: CapacitySeries) -> float:
    """Ratio of mean reference capacity to mean model capacity on shared days."""
    common, ia, ib = _overlap(cap_ref, cap_model)
    if common.size == 0:
        raise ValueError("capacity series do not overlap")
    model_mean = cap_model.capacity[ib].mean()
    if not model_mean > 0:
        raise ValueError("model capacity mean is zero")
    return float(cap_ref.capacity[ia].mean() / model_mean)


def apply_capacity_correction(series, cf: float):
    if not cf > 0:
        raise ValueError("capacity correction factor must be positive")
    if isinstance(series, CapacitySeries):
        return dataclasses.replace(series, capacity=series.capacity * cf)
    return dataclasses.replace(series, energy=series.energy * cf)


def aggregate_generation(park_series: dict, parks, grouping: str) -> dict:
    """Per-day regional sums of park generation.

    Parks are added in sorted ``park_id`` order so sums are reproducible.  A
    park contributes zero on days outside its own series.  Each regional
    series runs from the earliest member date to the latest.
    """
    if grouping not in GROUPINGS:
        raise ValueError(f"unknown grouping {grouping!r}")
    by_id = {p.park_id: p for p in parks}
    groups = {}
    for pid in sorted(park_series):
        if pid not in by_id:
            raise KeyError(f"no metadata for park {pid}")
        lab = by_id[pid].label(grouping)
        if lab is not None:
            groups.setdefault(lab, []).append(pid)
    out = {}
    for lab in sorted(groups):
        pids = groups[lab]
        first = min(park_series[p].dates[0] for p in pids if park_series[p].dates.size)
        last = max(park_series[p].dates[-1] for p in pids if park_series[p].dates.size)
        dates = np.arange(first, last + np.timedelta64(1, "D"), dtype="datetime64[D]")
        total = np.zeros(dates.size)
        for pid in pids:
            s = park_series[pid]
            if s.dates.size == 0:
                continue
            k = (s.dates - first).astype(np.int64)
            total[k] += s.energy
        out[lab] = GenerationSeries(lab, dates, total)
    return out
