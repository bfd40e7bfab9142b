"""Hot inner loops, each with a numba and a pure-numpy implementation.

The numba path is used when numba imports cleanly and the environment
variable ``WINDBIAS_NUMBA`` is not set to ``0``.  Both paths are kept
importable under explicit names (``*_np`` / ``*_nb``) so tests and the
benchmark can compare them directly.
"""
import os

import numpy as np

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is optional
    numba = None
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and os.environ.get("WINDBIAS_NUMBA", "1").strip() not in ("0", "false", "no")

EARTH_RADIUS_KM = 6371.0


# ---------------------------------------------------------------------------
# pure numpy
# ---------------------------------------------------------------------------

def stencil_gather_np(field, ii, jj, weights):
    """Weighted sum over stencil nodes for every time step.

    ``field`` is (time, lat, lon); ``ii``, ``jj`` and ``weights`` are 1-d and
    of equal length.  Returns a (time,) array.
    """
    return field[:, ii, jj] @ weights


def constant_run_mask_np(values, breaks, min_run):
    """Mark members of runs of identical present values of length >= min_run.

    ``breaks[k]`` True means sample k may not continue the run of sample k-1
    (time gap).  NaN values never belong to a run.
    """
    n = values.shape[0]
    out = np.zeros(n, dtype=np.bool_)
    if n == 0:
        return out
    present = ~np.isnan(values)
    same = np.zeros(n, dtype=np.bool_)
    same[1:] = (values[1:] == values[:-1]) & present[1:] & present[:-1] & ~breaks[1:]
    run_id = np.cumsum(~same)
    lengths = np.bincount(run_id)
    out = (lengths[run_id] >= min_run) & present
    return out


def bin_sums_np(ref, model, bins, nbins):
    """Per-bin sums of ``ref`` and ``model`` and sample counts.

    Samples where either side is NaN are skipped.
    """
    ok = ~(np.isnan(ref) | np.isnan(model))
    b = bins[ok]
    ref_sum = np.bincount(b, weights=ref[ok], minlength=nbins)
    model_sum = np.bincount(b, weights=model[ok], minlength=nbins)
    counts = np.bincount(b, minlength=nbins)
    return ref_sum, model_sum, counts


def cubic_ramp_np(speeds, cut_in, rated, cut_out):
    ci3 = cut_in ** 3
    ramp = (speeds ** 3 - ci3) / (rated ** 3 - ci3)
    cf = np.where(speeds < cut_in, 0.0, np.where(speeds < rated, ramp, 1.0))
    cf = np.where(speeds > cut_out, 0.0, cf)
    cf = np.clip(cf, 0.0, 1.0)
    return np.where(np.isnan(speeds), np.nan, cf)


def log_profile_series_np(log_h, speeds):
    """Per-column least-squares fit of speed = a + b*log_h.

    ``log_h`` and ``speeds`` are both (k, n).  Returns (a, b) as (n,) arrays.
    """
    lh = log_h
    k = speeds.shape[0]
    mx = lh.sum(axis=0) / k
    my = speeds.sum(axis=0) / k
    dx = lh - mx
    b = (dx * (speeds - my)).sum(axis=0) / (dx * dx).sum(axis=0)
    a = my - b * mx
    return a, b


def haversine_many_np(lat, lon, lats, lons):
    p1 = np.radians(lat)
    p2 = np.radians(lats)
    dphi = p2 - p1
    dlmb = np.radians(lons - lon)
    h = np.sin(dphi / 2) ** 2 + np.cos(p1) * np.cos(p2) * np.sin(dlmb / 2) ** 2
    return 2.0 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.minimum(h, 1.0)))


# ---------------------------------------------------------------------------
# numba
# ---------------------------------------------------------------------------

def _stencil_gather_loop(field, ii, jj, weights):
    nt = field.shape[0]
    out = np.zeros(nt)
    for t in range(nt):
        acc = 0.0
        for k in range(ii.shape[0]):
            acc += weights[k] * field[t, ii[k], jj[k]]
        out[t] = acc
    return out


def _constant_run_mask_loop(values, breaks, min_run):
    n = values.shape[0]
    out = np.zeros(n, dtype=np.bool_)
    start = 0
    while start < n:
        if np.isnan(values[start]):
            start += 1
            continue
        stop = start + 1
        while stop < n and not breaks[stop] and values[stop] == values[start]:
            stop += 1
        if stop - start >= min_run:
            for k in range(start, stop):
                out[k] = True
        start = stop
    return out


def _bin_sums_loop(ref, model, bins, nbins):
    ref_sum = np.zeros(nbins)
    model_sum = np.zeros(nbins)
    counts = np.zeros(nbins, dtype=np.int64)
    for k in range(ref.shape[0]):
        r = ref[k]
        m = model[k]
        if np.isnan(r) or np.isnan(m):
            continue
        b = bins[k]
        ref_sum[b] += r
        model_sum[b] += m
        counts[b] += 1
    return ref_sum, model_sum, counts


def _cubic_ramp_loop(speeds, cut_in, rated, cut_out):
    out = np.empty(speeds.shape[0])
    ci3 = cut_in ** 3
    span = rated ** 3 - ci3
    for k in range(speeds.shape[0]):
        v = speeds[k]
        if np.isnan(v):
            out[k] = np.nan
        elif v < cut_in or v > cut_out:
            out[k] = 0.0
        elif v < rated:
            cf = (v ** 3 - ci3) / span
            out[k] = min(max(cf, 0.0), 1.0)
        else:
            out[k] = 1.0
    return out


def _log_profile_series_loop(log_h, speeds):
    k, n = speeds.shape
    a = np.empty(n)
    b = np.empty(n)
    for t in range(n):
        sx = 0.0
        sy = 0.0
        for r in range(k):
            sx += log_h[r, t]
            sy += speeds[r, t]
        mx = sx / k
        my = sy / k
        sxy = 0.0
        sxx = 0.0
        for r in range(k):
            dx = log_h[r, t] - mx
            sxy += dx * (speeds[r, t] - my)
            sxx += dx * dx
        b[t] = sxy / sxx
        a[t] = my - b[t] * mx
    return a, b


def _haversine_many_loop(lat, lon, lats, lons):
    out = np.empty(lats.shape[0])
    p1 = np.radians(lat)
    c1 = np.cos(p1)
    for k in range(lats.shape[0]):
        p2 = np.radians(lats[k])
        h = np.sin((p2 - p1) / 2) ** 2 + c1 * np.cos(p2) * np.sin(np.radians(lons[k] - lon) / 2) ** 2
        out[k] = 2.0 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(min(h, 1.0)))
    return out


if HAS_NUMBA:
    _njit = numba.njit(cache=True)
    stencil_gather_nb = _njit(_stencil_gather_loop)
    constant_run_mask_nb = _njit(_constant_run_mask_loop)
    bin_sums_nb = _njit(_bin_sums_loop)
    cubic_ramp_nb = _njit(_cubic_ramp_loop)
    haversine_many_nb = _njit(_haversine_many_loop)
    log_profile_series_nb = _njit(_log_profile_series_loop)
else:  # pragma: no cover
    stencil_gather_nb = _stencil_gather_loop
    constant_run_mask_nb = _constant_run_mask_loop
    bin_sums_nb = _bin_sums_loop
    cubic_ramp_nb = _cubic_ramp_loop
    haversine_many_nb = _haversine_many_loop
    log_profile_series_nb = _log_profile_series_loop


if USE_NUMBA:
    stencil_gather = stencil_gather_nb
    constant_run_mask = constant_run_mask_nb
    bin_sums = bin_sums_nb
    cubic_ramp = cubic_ramp_nb
    log_profile_series = log_profile_series_nb
    haversine_many = haversine_many_nb
else:
    stencil_gather = stencil_gather_np
    constant_run_mask = constant_run_mask_np
    bin_sums = bin_sums_np
    cubic_ramp = cubic_ramp_np
    log_profile_series = log_profile_series_np
    haversine_many = haversine_many_np


def backend():
    """Name of the active kernel backend."""
    return "numba" if USE_NUMBA else "numpy"
