"""Regular lat-lon wind grids, mean-wind rasters and point interpolation.

Four horizontal methods are provided: nearest neighbour (``nn``), bilinear
(``bli``), bicubic (``bci``) and inverse distance weighting over the four
enclosing nodes (``idw``).  Each reduces to a fixed stencil of node indices
and weights, so a whole hourly series at a point costs one weighted gather.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from ._kernels import EARTH_RADIUS_KM

METHODS = ("nn", "bli", "bci", "idw")
HEIGHT_TAGS = (50, 100, 200)

# relative slack when deciding whether a point sits on the grid edge
_EDGE_EPS = 1e-9


class OutOfDomainError(ValueError):
    """Query point lies outside the region the method can serve."""


@dataclass(frozen=True)
class GridPoint:
    lat: float
    lon: float

    def __post_init__(self):
        lat = float(self.lat)
        lon = float(self.lon)
        if not (-90.0 <= lat <= 90.0) or not math.isfinite(lat):
            raise ValueError(f"latitude out of range: {lat}")
        if not (-180.0 <= lon < 360.0):
            raise ValueError(f"longitude out of range: {lon}")
        if lon >= 180.0:
            lon -= 360.0
        object.__setattr__(self, "lat", lat)
        object.__setattr__(self, "lon", lon)


def haversine_km(a: GridPoint, b: GridPoint) -> float:
    """Great-circle distance in km on a sphere of radius 6371 km."""
    p1 = math.radians(a.lat)
    p2 = math.radians(b.lat)
    h = (math.sin((p2 - p1) / 2) ** 2
         + math.cos(p1) * math.cos(p2) * math.sin(math.radians(b.lon - a.lon) / 2) ** 2)
    return 2.0 * EARTH_RADIUS_KM * math.asin(math.sqrt(min(h, 1.0)))


@dataclass(frozen=True)
class GridGeometry:
    """Node layout of a regular grid; node (i, j) sits at
    ``(lat0 + i*dlat, lon0 + j*dlon)``."""

    lat0: float
    lon0: float
    dlat: float
    dlon: float
    nlat: int
    nlon: int

    def __post_init__(self):
        if not (self.dlat > 0 and self.dlon > 0):
            raise ValueError("grid steps must be positive")
        if self.nlat < 1 or self.nlon < 1:
            raise ValueError("grid needs at least one node per axis")

    @property
    def lats(self) -> np.ndarray:
        return self.lat0 + self.dlat * np.arange(self.nlat)

    @property
    def lons(self) -> np.ndarray:
        return self.lon0 + self.dlon * np.arange(self.nlon)

    def node(self, i: int, j: int) -> GridPoint:
        return GridPoint(self.lat0 + i * self.dlat, _wrap_lon(self.lon0 + j * self.dlon))

    def fractional_index(self, point: GridPoint) -> tuple[float, float]:
        """Position of ``point`` in index units (may lie outside the grid)."""
        fi = (point.lat - self.lat0) / self.dlat
        rel = (point.lon - self.lon0) % 360.0
        # points slightly west of the origin stay negative instead of wrapping
        if rel > 360.0 - 0.5 * self.dlon - 1e-12:
            rel -= 360.0
        return fi, rel / self.dlon


def _wrap_lon(lon: float) -> float:
    return ((lon + 180.0) % 360.0) - 180.0


def _inside(f: float, lo: float, hi: float) -> bool:
    return lo - _EDGE_EPS <= f <= hi + _EDGE_EPS


@dataclass(frozen=True, eq=False)
class WindGrid:
    """Hourly u/v wind components at two heights on a regular grid.

    Component arrays are (time, lat, lon); ``disph`` is (lat, lon).
    ``u2``/``v2`` hold the optional 2 m level used by the low-level shear
    variants.
    """

    geometry: GridGeometry
    times: np.ndarray
    u10: np.ndarray
    v10: np.ndarray
    u50: np.ndarray
    v50: np.ndarray
    disph: np.ndarray
    u2: Optional[np.ndarray] = None
    v2: Optional[np.ndarray] = None

    def __post_init__(self):
        g = self.geometry
        times = np.asarray(self.times, dtype="datetime64[h]")
        object.__setattr__(self, "times", times)
        if times.size and np.any(np.diff(times) != np.timedelta64(1, "h")):
            raise ValueError("grid times must be strictly increasing in 1 h steps")
        shape = (times.size, g.nlat, g.nlon)
        for name in ("u10", "v10", "u50", "v50", "u2", "v2"):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = np.ascontiguousarray(arr, dtype=np.float64)
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
            object.__setattr__(self, name, arr)
        if (self.u2 is None) != (self.v2 is None):
            raise ValueError("u2 and v2 must be given together")
        disph = np.asarray(self.disph, dtype=np.float64)
        if disph.shape != (g.nlat, g.nlon):
            raise ValueError("disph must be (nlat, nlon)")
        if np.any(disph < 0) or not np.all(np.isfinite(disph)):
            raise ValueError("displacement height must be finite and >= 0")
        object.__setattr__(self, "disph", disph)

    @property
    def has_2m(self) -> bool:
        return self.u2 is not None


@dataclass(frozen=True, eq=False)
class MeanWindRaster:
    """Long-term mean wind speed per cell, keyed by height in metres."""

    geometry: GridGeometry
    means: dict = field(default_factory=dict)

    def __post_init__(self):
        g = self.geometry
        if 50 not in self.means:
            raise ValueError("raster must carry the 50 m mean")
        clean = {}
        for h, arr in self.means.items():
            if int(h) not in HEIGHT_TAGS:
                raise ValueError(f"unsupported raster height {h}")
            arr = np.asarray(arr, dtype=np.float64)
            if arr.shape != (g.nlat, g.nlon):
                raise ValueError(f"mean{h} has shape {arr.shape}")
            if np.any(arr < 0) or np.any(~np.isfinite(arr)):
                raise ValueError(f"mean{h} must be finite and >= 0")
            clean[int(h)] = arr
        object.__setattr__(self, "means", clean)


# ---------------------------------------------------------------------------
# stencils
# ---------------------------------------------------------------------------

def nearest_cell(geometry: GridGeometry, point: GridPoint) -> tuple[int, int]:
    """Index of the node with the smallest great-circle distance to ``point``.

    Ties go to the smaller lat index, then the smaller lon index.
    """
    g = geometry
    fi, fj = g.fractional_index(point)
    if not (_inside(fi, -0.5, g.nlat - 0.5) and _inside(fj, -0.5, g.nlon - 0.5)):
        raise OutOfDomainError(f"point {point} outside grid (+ half cell)")
    i_lo = max(int(math.floor(fi)) - 1, 0)
    i_hi = min(int(math.floor(fi)) + 2, g.nlat - 1)
    j_lo = max(int(math.floor(fj)) - 1, 0)
    j_hi = min(int(math.floor(fj)) + 2, g.nlon - 1)
    best = None
    best_d = math.inf
    for i in range(i_lo, i_hi + 1):
        for j in range(j_lo, j_hi + 1):
            d = haversine_km(point, g.node(i, j))
            if d < best_d:
                best_d = d
                best = (i, j)
    return best


def _enclosing_cell(g: GridGeometry, point: GridPoint) -> tuple[int, int, float, float]:
    if g.nlat < 2 or g.nlon < 2:
        raise OutOfDomainError("interpolation needs at least 2 nodes per axis")
    fi, fj = g.fractional_index(point)
    if not (_inside(fi, 0.0, g.nlat - 1) and _inside(fj, 0.0, g.nlon - 1)):
        raise OutOfDomainError(f"point {point} outside grid interior")
    fi = min(max(fi, 0.0), g.nlat - 1.0)
    fj = min(max(fj, 0.0), g.nlon - 1.0)
    i0 = min(int(math.floor(fi)), g.nlat - 2)
    j0 = min(int(math.floor(fj)), g.nlon - 2)
    return i0, j0, fi - i0, fj - j0


def _cubic_weights(t: float) -> tuple[float, float, float, float]:
    # Lagrange basis on nodes -1, 0, 1, 2
    return (
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    )


def _cubic_start(f: float, n: int) -> tuple[int, float]:
    if not _inside(f, 1.0, n - 2.0):
        raise OutOfDomainError("4x4 neighbourhood unavailable")
    f = min(max(f, 1.0), n - 2.0)
    i0 = min(max(int(math.floor(f)), 1), n - 3)
    return i0, f - i0


def idw_weights(distances) -> list:
    """Normalised 1/d weights; all distances must be positive."""
    inv = [1.0 / x for x in distances]
    s = sum(inv)
    return [x / s for x in inv]


@dataclass(frozen=True)
class Stencil:
    """Node indices and weights that reproduce an interpolation method."""

    ii: np.ndarray
    jj: np.ndarray
    weights: np.ndarray

    def apply(self, field: np.ndarray) -> np.ndarray:
        """Evaluate over a (time, lat, lon) field, or a single (lat, lon) map."""
        if field.ndim == 2:
            return float(field[self.ii, self.jj] @ self.weights)
        return _kernels.stencil_gather(field, self.ii, self.jj, self.weights)


def stencil(geometry: GridGeometry, point: GridPoint, method: str) -> Stencil:
    g = geometry
    if method == "nn":
        i, j = nearest_cell(g, point)
        ii, jj, w = [i], [j], [1.0]
    elif method == "bli":
        i0, j0, ti, tj = _enclosing_cell(g, point)
        ii = [i0, i0, i0 + 1, i0 + 1]
        jj = [j0, j0 + 1, j0, j0 + 1]
        w = [(1 - ti) * (1 - tj), (1 - ti) * tj, ti * (1 - tj), ti * tj]
    elif method == "bci":
        if g.nlat < 4 or g.nlon < 4:
            raise OutOfDomainError("bicubic needs a 4x4 grid")
        fi, fj = g.fractional_index(point)
        i0, ti = _cubic_start(fi, g.nlat)
        j0, tj = _cubic_start(fj, g.nlon)
        wi = _cubic_weights(ti)
        wj = _cubic_weights(tj)
        ii, jj, w = [], [], []
        for a in range(4):
            for b in range(4):
                ii.append(i0 - 1 + a)
                jj.append(j0 - 1 + b)
                w.append(wi[a] * wj[b])
    elif method == "idw":
        i0, j0, _, _ = _enclosing_cell(g, point)
        ii = [i0, i0, i0 + 1, i0 + 1]
        jj = [j0, j0 + 1, j0, j0 + 1]
        d = [haversine_km(point, g.node(i, j)) for i, j in zip(ii, jj)]
        if min(d) == 0.0:
            k = d.index(0.0)
            ii, jj, w = [ii[k]], [jj[k]], [1.0]
        else:
            w = idw_weights(d)
    else:
        raise ValueError(f"unknown interpolation method {method!r}")
    return Stencil(np.asarray(ii, dtype=np.int64), np.asarray(jj, dtype=np.int64),
                   np.asarray(w, dtype=np.float64))


# ---------------------------------------------------------------------------
# scalar point queries
# ---------------------------------------------------------------------------

def _slice(grid_field: np.ndarray, time_index: Optional[int]) -> np.ndarray:
    if grid_field.ndim == 3:
        if time_index is None:
            raise ValueError("time_index required for a 3-d field")
        return grid_field[time_index]
    return grid_field


def bilinear(geometry: GridGeometry, grid_field: np.ndarray, point: GridPoint,
             time_index: Optional[int] = None) -> float:
    """Interpolate along longitude on the two bounding rows, then along latitude."""
    f = _slice(grid_field, time_index)
    i0, j0, ti, tj = _enclosing_cell(geometry, point)
    if tj == 0.0:
        south, north = f[i0, j0], f[i0 + 1, j0]
    else:
        south = f[i0, j0] + tj * (f[i0, j0 + 1] - f[i0, j0])
        north = f[i0 + 1, j0] + tj * (f[i0 + 1, j0 + 1] - f[i0 + 1, j0])
    if ti == 0.0:
        return float(south)
    return float(south + ti * (north - south))


def bicubic(geometry: GridGeometry, grid_field: np.ndarray, point: GridPoint,
            time_index: Optional[int] = None) -> tuple[float, bool]:
    """Separable cubic over the 4x4 neighbourhood.

    The value is returned unclamped together with a flag that is True when
    it is negative.
    """
    f = _slice(grid_field, time_index)
    value = stencil(geometry, point, "bci").apply(f)
    return value, value < 0.0


def idw(geometry: GridGeometry, grid_field: np.ndarray, point: GridPoint,
        time_index: Optional[int] = None) -> float:
    """Inverse-distance (exponent 1) mean of the four enclosing nodes."""
    f = _slice(grid_field, time_index)
    return stencil(geometry, point, "idw").apply(f)


def nearest(geometry: GridGeometry, grid_field: np.ndarray, point: GridPoint,
            time_index: Optional[int] = None) -> float:
    f = _slice(grid_field, time_index)
    i, j = nearest_cell(geometry, point)
    return float(f[i, j])


def raster_lookup(raster: MeanWindRaster, point: GridPoint, height_tag=50) -> float:
    """Mean wind speed of the raster cell nearest to ``point``."""
    try:
        h = int(str(height_tag).lower().removeprefix("mean").removesuffix("m"))
    except ValueError:
        raise KeyError(f"unknown height tag {height_tag!r}") from None
    if h not in raster.means:
        raise KeyError(f"raster has no {h} m layer")
    i, j = nearest_cell(raster.geometry, point)
    return float(raster.means[h][i, j])
