"""Effective wind speed and vertical extrapolation to hub height."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels

DEFAULT_ALPHA = 1.0 / 7.0
VARIANTS = ("power_law_10_50", "power_law_2_10", "power_law_2_10_50", "log_profile")


class DegenerateInputError(ValueError):
    pass


class RankDeficiencyError(ValueError):
    pass


@dataclass(frozen=True)
class ShearParams:
    alpha: float
    h_lo: float
    h_hi: float


@dataclass(frozen=True)
class LogProfileFit:
    a: float
    b: float


def effective_speed(u, v):
    """Horizontal wind speed from its two components."""
    return np.hypot(u, v)


def shear_exponent(w_lo: float, h_lo: float, w_hi: float, h_hi: float) -> ShearParams:
    """Power-law exponent through two (height, speed) points."""
    if not (w_lo > 0 and w_hi > 0):
        raise DegenerateInputError("shear exponent needs positive speeds")
    if not (h_hi > h_lo > 0):
        raise DegenerateInputError("shear exponent needs 0 < h_lo < h_hi")
    alpha = math.log(w_hi / w_lo) / math.log(h_hi / h_lo)
    return ShearParams(alpha, float(h_lo), float(h_hi))


def power_law_extrapolate(w_ref, h_ref, h_target, alpha):
    if np.any(np.asarray(h_ref) <= 0) or np.any(np.asarray(h_target) <= 0):
        raise DegenerateInputError("heights must be positive")
    if isinstance(alpha, ShearParams):
        alpha = alpha.alpha
    return w_ref * np.power(np.divide(h_target, h_ref), alpha)


def log_profile_fit(heights, speeds) -> LogProfileFit:
    """Ordinary least squares of speed on ln(height)."""
    h = np.asarray(heights, dtype=np.float64)
    w = np.asarray(speeds, dtype=np.float64)
    if h.shape != w.shape or h.ndim != 1:
        raise ValueError("heights and speeds must be equal-length 1-d sequences")
    if np.any(h <= 0):
        raise DegenerateInputError("heights must be positive")
    if np.unique(h).size < 2:
        raise RankDeficiencyError("need at least two distinct heights")
    a, b = _kernels.log_profile_series_np(np.log(h)[:, None], w[:, None])
    return LogProfileFit(float(a[0]), float(b[0]))


def log_profile_predict(fit: LogProfileFit, h_target: float) -> tuple[float, bool]:
    value = fit.a + fit.b * math.log(h_target)
    return value, value < 0.0


# ---------------------------------------------------------------------------
# series helpers used by the simulation
# ---------------------------------------------------------------------------

def shear_alpha_series(w_lo, h_lo, w_hi, h_hi, fallback=DEFAULT_ALPHA):
    """Hourly shear exponents; hours with non-positive speeds, or crossing
    heights, get ``fallback``."""
    w_lo = np.asarray(w_lo, dtype=np.float64)
    w_hi = np.asarray(w_hi, dtype=np.float64)
    if not (h_hi > h_lo > 0):
        return np.full(np.broadcast(w_lo, w_hi).shape, fallback)
    ok = (w_lo > 0) & (w_hi > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = np.log(w_hi / w_lo) / math.log(h_hi / h_lo)
    return np.where(ok, alpha, fallback)


@dataclass
class HubSpeeds:
    speed: np.ndarray
    n_negative: int = 0
    n_fallback_alpha: int = 0


def hub_height_speed(variant, w10, w50, disph, hub_height, w2=None,
                     fallback_alpha=DEFAULT_ALPHA) -> HubSpeeds:
    """Extrapolate hourly model speeds to ``hub_height``.

    ``w10`` and ``w2`` sit at 10 m and 2 m above the displacement height,
    ``w50`` at 50 m above ground.
    """
    h10 = 10.0 + disph
    h2 = 2.0 + disph
    if variant == "power_law_10_50":
        alpha = shear_alpha_series(w10, h10, w50, 50.0, fallback_alpha)
        n_fb = int(np.count_nonzero(~((w10 > 0) & (w50 > 0)))) if 50.0 > h10 else len(w10)
        speed = power_law_extrapolate(w50, 50.0, hub_height, alpha)
        return HubSpeeds(speed, 0, n_fb)
    if variant in ("power_law_2_10", "power_law_2_10_50", "log_profile") and w2 is None:
        raise ValueError(f"vertical variant {variant} needs the 2 m wind level")
    if variant == "power_law_2_10":
        alpha = shear_alpha_series(w2, h2, w10, h10, fallback_alpha)
        n_fb = int(np.count_nonzero(~((w2 > 0) & (w10 > 0))))
        return HubSpeeds(power_law_extrapolate(w10, h10, hub_height, alpha), 0, n_fb)
    if variant == "power_law_2_10_50":
        alpha = shear_alpha_series(w2, h2, w10, h10, fallback_alpha)
        n_fb = int(np.count_nonzero(~((w2 > 0) & (w10 > 0))))
        return HubSpeeds(power_law_extrapolate(w50, 50.0, hub_height, alpha), 0, n_fb)
    if variant == "log_profile":
        n = len(w10)
        log_h = np.empty((3, n))
        log_h[0] = math.log(h2)
        log_h[1] = math.log(h10)
        log_h[2] = math.log(50.0)
        speeds = np.ascontiguousarray(np.vstack([w2, w10, w50]), dtype=np.float64)
        a, b = _kernels.log_profile_series(log_h, speeds)
        speed = a + b * math.log(hub_height)
        return HubSpeeds(speed, int(np.count_nonzero(speed < 0)), 0)
    raise ValueError(f"unknown vertical variant {variant!r}")
