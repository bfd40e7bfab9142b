"""Turbine geometry, hub-height regression and the specific-power curve."""
from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels

log = logging.getLogger(__name__)

CUT_IN = 3.0
CUT_OUT = 25.0
AIR_DENSITY = 1.225
POWER_COEFFICIENT = 0.45
HUB_FLOOR = 10.0
DEFAULT_HUB_HEIGHT = 108.0


class CurveDegeneracyError(ValueError):
    pass


class UnfillableError(ValueError):
    pass


@dataclass(frozen=True)
class TurbineSpec:
    """Per-turbine data; hub height and specific power may still be missing."""

    capacity: Optional[float]  # kW
    rotor_diameter: Optional[float]  # m
    hub_height: Optional[float] = None  # m
    specific_power: Optional[float] = None  # W/m2
    install_year: Optional[int] = None

    def __post_init__(self):
        for name in ("capacity", "rotor_diameter", "hub_height", "specific_power"):
            val = getattr(self, name)
            if val is not None and not (val > 0 and math.isfinite(val)):
                raise ValueError(f"{name} must be positive, got {val}")


def specific_power(capacity: float, rotor_diameter: float) -> float:
    """Rated power per swept rotor area in W/m2 (capacity given in kW)."""
    if not (capacity > 0 and rotor_diameter > 0):
        raise ValueError("capacity and rotor diameter must be positive")
    return 1000.0 * capacity / (math.pi * (rotor_diameter / 2.0) ** 2)


@dataclass(frozen=True)
class HubHeightModel:
    intercept: float
    slope: float


def fit_hub_height_model(pairs) -> HubHeightModel:
    """Least-squares line hub_height = intercept + slope * diameter."""
    arr = np.asarray(pairs, dtype=np.float64).reshape(-1, 2)
    d, hh = arr[:, 0], arr[:, 1]
    if np.unique(d).size < 2:
        raise ValueError("hub-height regression needs two distinct diameters")
    dm = d.mean()
    slope = float(((d - dm) * (hh - hh.mean())).sum() / ((d - dm) ** 2).sum())
    intercept = float(hh.mean() - slope * dm)
    if slope < 0:
        log.warning("hub-height regression has negative slope %.4g", slope)
    return HubHeightModel(intercept, slope)


def estimate_hub_height(model: HubHeightModel, diameter: float, floor: float = HUB_FLOOR) -> float:
    return max(model.intercept + model.slope * diameter, floor)


def fill_missing_from_cohort(parks, field: str):
    """Fill a missing turbine field with the mean of parks sharing the
    install year, falling back to the mean over all parks.

    ``parks`` is a sequence of objects with a ``turbine`` attribute (or bare
    TurbineSpec objects).  Returns new objects; present values are kept.
    """
    if field not in ("hub_height", "specific_power"):
        raise ValueError(f"cannot cohort-fill {field!r}")

    def spec_of(p):
        return p.turbine if hasattr(p, "turbine") else p

    by_year = {}
    known = []
    for p in parks:
        t = spec_of(p)
        val = getattr(t, field)
        if val is not None:
            known.append(val)
            by_year.setdefault(t.install_year, []).append(val)
    if not known:
        raise UnfillableError(f"no park carries {field}")
    global_mean = float(np.mean(known))
    out = []
    for p in parks:
        t = spec_of(p)
        if getattr(t, field) is None:
            vals = by_year.get(t.install_year) if t.install_year is not None else None
            fill = float(np.mean(vals)) if vals else global_mean
            t = dataclasses.replace(t, **{field: fill})
            p = dataclasses.replace(p, turbine=t) if hasattr(p, "turbine") else t
        out.append(p)
    return out


@dataclass(frozen=True)
class PowerCurve:
    """Cubic ramp from cut-in to rated speed, flat at 1 until cut-out."""

    cut_in: float
    rated_speed: float
    cut_out: float

    def __post_init__(self):
        if not (0 < self.cut_in < self.rated_speed < self.cut_out):
            raise CurveDegeneracyError(
                f"need 0 < cut_in < rated < cut_out, got "
                f"{self.cut_in}, {self.rated_speed}, {self.cut_out}")

    def __call__(self, speeds):
        speeds = np.asarray(speeds, dtype=np.float64)
        scalar = speeds.ndim == 0
        cf = _kernels.cubic_ramp(np.atleast_1d(speeds).ravel(), self.cut_in,
                                 self.rated_speed, self.cut_out)
        if scalar:
            return float(cf[0])
        return cf.reshape(speeds.shape)


def rated_speed(sp: float, air_density: float = AIR_DENSITY, cp: float = POWER_COEFFICIENT) -> float:
    return (2.0 * sp / (air_density * cp)) ** (1.0 / 3.0)


def build_power_curve(sp: float, cut_in: float = CUT_IN, cut_out: float = CUT_OUT,
                      air_density: float = AIR_DENSITY, cp: float = POWER_COEFFICIENT) -> PowerCurve:
    if not sp > 0:
        raise ValueError("specific power must be positive")
    return PowerCurve(cut_in, rated_speed(sp, air_density, cp), cut_out)


def simulate_turbine(curve: PowerCurve, hub_wind) -> np.ndarray:
    """Hourly capacity factors.  Negative speeds (possible from the log
    profile) fall below cut-in and yield 0."""
    return curve(np.asarray(hub_wind, dtype=np.float64))
