"""Flat ``section.key = value`` run configuration."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

from . import biascorr as _bc
from . import grid as _grid
from . import turbine as _tb
from . import vertical as _vt


class ConfigError(ValueError):
    pass


def _floats(text):
    return [float(x) for x in text.replace(",", " ").split()]


def _names(text):
    return [x.strip() for x in text.split(",") if x.strip()]


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> (attribute, parser)
_KEYS = {
    "input.grid": ("grid", str),
    "input.raster": ("raster", str),
    "input.parks": ("parks", str),
    "input.stations": ("stations", str),
    "input.measurements": ("measurements", str),
    "input.observed": ("observed", str),
    "input.reference_capacity": ("reference_capacity", str),
    "input.hub_training": ("hub_training", str),
    "interpolation.method": ("interpolation", _names),
    "vertical.method": ("vertical", str),
    "vertical.fallback_alpha": ("fallback_alpha", float),
    "vertical.default_hub_height": ("default_hub_height", float),
    "biascorr.method": ("biascorr", _names),
    "biascorr.max_station_km": ("max_station_km", float),
    "biascorr.min_correlation": ("min_correlation", float),
    "biascorr.min_run_hours": ("min_run_hours", int),
    "biascorr.epoch_start_year": ("epoch_start_year", int),
    "biascorr.min_complete_years": ("min_complete_years", int),
    "biascorr.utc_offset_hours": ("utc_offset_hours", int),
    "biascorr.no_station_fallback": ("no_station_fallback", str),
    "turbine.cut_in": ("cut_in", float),
    "turbine.cut_out": ("cut_out", float),
    "turbine.cp": ("cp", float),
    "turbine.air_density": ("air_density", float),
    "turbine.hub_model": ("hub_model", str),
    "turbine.hub_intercept": ("hub_intercept", float),
    "turbine.hub_slope": ("hub_slope", float),
    "turbine.hub_floor": ("hub_floor", float),
    "capacity.correction": ("capacity_correction", _bool),
    "run.start": ("start", str),
    "run.end": ("end", str),
    "run.seed": ("seed", int),
    "runtime.max_fallback_fraction": ("max_fallback_fraction", float),
    "sweep.km_list": ("sweep_km", _floats),
    "output.dir": ("out_dir", str),
}

_PATH_ATTRS = ("grid", "raster", "parks", "stations", "measurements", "observed",
               "reference_capacity", "hub_training", "out_dir")


@dataclass
class RunConfig:
    grid: Optional[str] = None
    raster: Optional[str] = None
    parks: Optional[str] = None
    stations: Optional[str] = None
    measurements: Optional[str] = None
    observed: Optional[str] = None
    reference_capacity: Optional[str] = None
    hub_training: Optional[str] = None
    interpolation: list = field(default_factory=lambda: ["nn"])
    vertical: str = "power_law_10_50"
    fallback_alpha: float = _vt.DEFAULT_ALPHA
    default_hub_height: float = _tb.DEFAULT_HUB_HEIGHT
    biascorr: list = field(default_factory=lambda: ["none"])
    max_station_km: float = _bc.MAX_STATION_KM
    min_correlation: float = _bc.MIN_CORRELATION
    min_run_hours: int = _bc.MIN_RUN_HOURS
    epoch_start_year: int = _bc.EPOCH_START_YEAR
    min_complete_years: int = _bc.MIN_COMPLETE_YEARS
    utc_offset_hours: int = 0
    no_station_fallback: str = "none"
    cut_in: float = _tb.CUT_IN
    cut_out: float = _tb.CUT_OUT
    cp: float = _tb.POWER_COEFFICIENT
    air_density: float = _tb.AIR_DENSITY
    hub_model: str = "none"
    hub_intercept: Optional[float] = None
    hub_slope: Optional[float] = None
    hub_floor: float = _tb.HUB_FLOOR
    capacity_correction: bool = True
    start: Optional[str] = None
    end: Optional[str] = None
    seed: int = 0
    max_fallback_fraction: float = 1.0
    sweep_km: list = field(default_factory=lambda: [30.0, 40.0, 50.0, 60.0, 70.0, 80.0])
    out_dir: str = "out"
    # free-form keys of the synthetic generator, e.g. synthetic.bias
    synthetic: dict = field(default_factory=dict)
    source_digest: str = ""

    def validate(self, require_files: bool = True):
        for m in self.interpolation:
            if m not in _grid.METHODS:
                raise ConfigError(f"interpolation.method: unknown method {m!r}")
        for m in self.biascorr:
            if m not in _bc.METHODS:
                raise ConfigError(f"biascorr.method: unknown method {m!r}")
        if not self.interpolation or not self.biascorr:
            raise ConfigError("at least one interpolation and one biascorr method required")
        if self.vertical not in _vt.VARIANTS:
            raise ConfigError(f"vertical.method: unknown variant {self.vertical!r}")
        if self.no_station_fallback not in ("none", "mean_gwa"):
            raise ConfigError("biascorr.no_station_fallback must be none or mean_gwa")
        if self.hub_model not in ("none", "fit", "coeffs"):
            raise ConfigError("turbine.hub_model must be none, fit or coeffs")
        if self.hub_model == "coeffs" and (self.hub_intercept is None or self.hub_slope is None):
            raise ConfigError("turbine.hub_model = coeffs needs hub_intercept and hub_slope")
        if self.hub_model == "fit" and not self.hub_training:
            raise ConfigError("turbine.hub_model = fit needs input.hub_training")
        for name in ("max_station_km", "min_run_hours", "cut_in", "cut_out", "cp", "air_density",
                     "hub_floor", "default_hub_height"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if not 0 < self.min_correlation <= 1:
            raise ConfigError("biascorr.min_correlation must lie in (0, 1]")
        if self.start and self.end and self.end < self.start:
            raise ConfigError("run.end before run.start")
        if require_files:
            for name in _PATH_ATTRS[:-1]:
                p = getattr(self, name)
                if p is not None and not Path(p).is_file():
                    raise ConfigError(f"input.{name}: file not found: {p}")
        return self


def parse_config(text: str, base_dir=None) -> RunConfig:
    """Parse config text; relative paths are resolved against ``base_dir``."""
    cfg = RunConfig()
    seen = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key.startswith("synthetic."):
            cfg.synthetic[key.split(".", 1)[1]] = value
            seen.append((key, value))
            continue
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        attr, conv = _KEYS[key]
        try:
            setattr(cfg, attr, conv(value))
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
        if key != "output.dir":
            seen.append((key, value))
    if base_dir is not None:
        for name in _PATH_ATTRS:
            p = getattr(cfg, name)
            if p is not None and not Path(p).is_absolute():
                setattr(cfg, name, str(Path(base_dir) / p))
    digest = hashlib.sha256("\n".join(f"{k}={v}" for k, v in sorted(seen)).encode()).hexdigest()
    cfg.source_digest = digest
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, base_dir=path.parent)


def dump_config(cfg: RunConfig, base_dir=None) -> str:
    """Render a config back to text (paths relative to ``base_dir`` if given)."""
    lines = []
    for key, (attr, conv) in _KEYS.items():
        val = getattr(cfg, attr)
        if val is None:
            continue
        if attr in _PATH_ATTRS and base_dir is not None:
            try:
                val = str(Path(val).relative_to(base_dir))
            except ValueError:
                pass
        if isinstance(val, list):
            val = ",".join(f"{v:g}" if isinstance(v, float) else str(v) for v in val)
        elif isinstance(val, bool):
            val = "true" if val else "false"
        elif isinstance(val, float):
            val = repr(val)
        lines.append(f"{key} = {val}")
    for k, v in sorted(cfg.synthetic.items()):
        lines.append(f"synthetic.{k} = {v}")
    return "\n".join(lines) + "\n"


def config_fields():
    return [f.name for f in fields(RunConfig)]
