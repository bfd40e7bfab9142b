"""Simulation, bias correction and validation runs driven by a RunConfig."""
from __future__ import annotations

import dataclasses
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import biascorr, fleet, io, turbine, validate, vertical
from .config import ConfigError, RunConfig
from .fleet import CapacitySeries, GenerationSeries
from .grid import OutOfDomainError, haversine_km, raster_lookup, stencil

log = logging.getLogger(__name__)


class DegradationError(RuntimeError):
    """Too many parks fell back from the requested correction."""


@dataclass
class Inputs:
    grid: object
    parks: list
    excluded: list = field(default_factory=list)
    raster: object = None
    stations: list = field(default_factory=list)  # qualified, cleaned, month-masked
    station_status: dict = field(default_factory=dict)
    observed: Optional[dict] = None
    reference_capacity: Optional[dict] = None
    hub_model: Optional[turbine.HubHeightModel] = None


@dataclass
class ParkRecord:
    park_id: str
    requested: str
    applied: str
    station_id: Optional[str] = None
    station_km: Optional[float] = None
    factor: Optional[float] = None
    reason: str = ""
    hub_height: Optional[float] = None
    specific_power: Optional[float] = None
    negative_hours: int = 0


@dataclass
class SimulationResult:
    tag: str
    parks: dict  # park_id -> GenerationSeries
    regions: dict  # label -> GenerationSeries (state, subsystem, country)
    capacity: dict  # label -> CapacitySeries (parks and regions)
    records: list
    capacity_factors: dict

    @property
    def n_corrected(self):
        return sum(1 for r in self.records if r.applied != "none")


def method_tag(interp: str, bc: str) -> str:
    return f"{interp}-{bc}"


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------

def resolve_turbines(parks, hub_model=None, hub_floor=turbine.HUB_FLOOR,
                     default_hub_height=turbine.DEFAULT_HUB_HEIGHT):
    """Fill specific power and hub height on every park.

    Specific power comes from turbine capacity and rotor diameter, else from
    the install-year cohort.  Hub height is taken as given, else estimated
    from the rotor diameter with ``hub_model``, else from the cohort, else
    ``default_hub_height``.
    """
    out = []
    for p in parks:
        t = p.turbine
        sp = t.specific_power
        if sp is None and t.capacity is not None and t.rotor_diameter is not None:
            sp = turbine.specific_power(t.capacity, t.rotor_diameter)
        hh = t.hub_height
        if hh is None and hub_model is not None and t.rotor_diameter is not None:
            hh = turbine.estimate_hub_height(hub_model, t.rotor_diameter, hub_floor)
        out.append(dataclasses.replace(p, turbine=dataclasses.replace(t, specific_power=sp, hub_height=hh)))
    if not out:
        return out
    out = turbine.fill_missing_from_cohort(out, "specific_power")
    try:
        out = turbine.fill_missing_from_cohort(out, "hub_height")
    except turbine.UnfillableError:
        out = [dataclasses.replace(p, turbine=dataclasses.replace(p.turbine, hub_height=default_hub_height))
               for p in out]
    return out


def load_inputs(cfg: RunConfig) -> Inputs:
    cfg.validate()
    if not cfg.grid or not cfg.parks:
        raise ConfigError("input.grid and input.parks are required")
    wind = io.read_grid(cfg.grid)
    if cfg.start or cfg.end:
        t0 = np.datetime64(cfg.start, "h") if cfg.start else wind.times[0]
        t1 = (np.datetime64(cfg.end, "D") + np.timedelta64(1, "D")).astype("datetime64[h]") \
            if cfg.end else wind.times[-1] + np.timedelta64(1, "h")
        sel = (wind.times >= t0) & (wind.times < t1)
        if not sel.any():
            raise ConfigError("run date range does not overlap the grid")
        wind = dataclasses.replace(
            wind, times=wind.times[sel],
            **{k: getattr(wind, k)[sel] for k in ("u10", "v10", "u50", "v50", "u2", "v2")
               if getattr(wind, k) is not None})
    parks, excluded = io.read_parks(cfg.parks)
    hub_model = None
    if cfg.hub_model == "fit":
        hub_model = turbine.fit_hub_height_model(io.read_hub_training(cfg.hub_training))
    elif cfg.hub_model == "coeffs":
        hub_model = turbine.HubHeightModel(cfg.hub_intercept, cfg.hub_slope)
    try:
        parks = resolve_turbines(parks, hub_model, cfg.hub_floor, cfg.default_hub_height)
    except turbine.UnfillableError as exc:
        raise io.IngestError(f"{cfg.parks}: {exc}") from None
    inputs = Inputs(wind, sorted(parks, key=lambda p: p.park_id), excluded, hub_model=hub_model)
    if cfg.raster:
        inputs.raster = io.read_raster(cfg.raster)
    if cfg.stations and cfg.measurements:
        for s in io.read_stations(cfg.stations, cfg.measurements):
            prepared = biascorr.prepare_station(s, cfg.min_run_hours, cfg.epoch_start_year,
                                                cfg.min_complete_years)
            inputs.station_status[s.station_id] = "qualified" if prepared is not None else "unqualified"
            if prepared is not None:
                inputs.stations.append(prepared)
    if cfg.observed:
        inputs.observed = io.read_generation(cfg.observed)
    if cfg.reference_capacity:
        inputs.reference_capacity = io.read_capacity(cfg.reference_capacity)
    needs_raster = any(m == "mean_gwa" for m in cfg.biascorr) or cfg.no_station_fallback == "mean_gwa"
    if needs_raster and inputs.raster is None:
        raise ConfigError("mean_gwa correction needs input.raster")
    if any(m in ("mean_station", "hm_station") for m in cfg.biascorr) and not (cfg.stations and cfg.measurements):
        raise ConfigError("station corrections need input.stations and input.measurements")
    if cfg.vertical != "power_law_10_50" and not wind.has_2m:
        raise ConfigError(f"vertical.method {cfg.vertical} needs u2/v2 grid columns")
    return inputs


# ---------------------------------------------------------------------------
# per-park simulation
# ---------------------------------------------------------------------------

def _mean_gwa(rec, inputs, park, hub, w50):
    f = biascorr.raster_mean_factor(raster_lookup(inputs.raster, park.location, 50), w50)
    rec.factor = f
    return biascorr.apply_mean_correction(hub, f, "mean_gwa").speed


def _correct(rec, cfg, inputs, park, times, hub, w10, w50, method, max_km):
    """Apply ``method`` to the hub-height series, degrading on failure."""
    if method == "none":
        return hub
    if method == "mean_gwa":
        try:
            return _mean_gwa(rec, inputs, park, hub, w50)
        except (ValueError, ZeroDivisionError, OutOfDomainError, KeyError) as exc:
            rec.applied, rec.reason = "none", f"mean_gwa failed: {exc}"
            return hub

    sid = biascorr.match_station(park, inputs.stations, max_km)
    if sid is None:
        rec.reason = f"no qualified station within {max_km:g} km"
        if cfg.no_station_fallback == "mean_gwa":
            rec.applied = "mean_gwa"
            try:
                return _mean_gwa(rec, inputs, park, hub, w50)
            except (ValueError, ZeroDivisionError, OutOfDomainError, KeyError) as exc:
                rec.reason += f"; mean_gwa failed: {exc}"
        rec.applied = "none"
        return hub
    station = next(s for s in inputs.stations if s.station_id == sid)
    rec.station_id = sid
    rec.station_km = haversine_km(park.location, station.location)
    ref = biascorr.align(station, times)

    if method == "hm_station":
        factors = biascorr.hm_factors(ref, times, w10, cfg.utc_offset_hours)
        corrected10 = biascorr.apply_hm_correction(times, w10, factors).speed
        tag = biascorr.correction_gate(ref, corrected10, cfg.min_correlation, fallback="mean_station")
        if tag == "hm_station":
            rec.factor = float(np.mean(factors.factors[factors.covered])) if factors.covered.any() else 1.0
            return biascorr.apply_hm_correction(times, hub, factors).speed
        r = biascorr.pearson_paired(ref, corrected10)
        rec.reason = ("correlation undefined" if r is None else
                      f"correlation {r:.3f} below {cfg.min_correlation:g}") + ", mean_station used"
        rec.applied = "mean_station"

    try:
        f = biascorr.station_mean_factor(ref, w10)
        if not f > 0:
            raise ValueError("zero station mean")
    except (ValueError, ZeroDivisionError) as exc:
        rec.applied = "none"
        rec.reason = (rec.reason + "; " if rec.reason else "") + f"mean_station failed: {exc}"
        return hub
    rec.factor = f
    return biascorr.apply_mean_correction(hub, f, "mean_station").speed


def simulate_park(park, cfg: RunConfig, inputs: Inputs, interp: str, method: str,
                  max_km: Optional[float] = None):
    """Hourly power (MW) of one park plus its record.  Raises OutOfDomainError
    when the park cannot be located on the grid."""
    wind = inputs.grid
    st = stencil(wind.geometry, park.location, interp)
    w10 = vertical.effective_speed(st.apply(wind.u10), st.apply(wind.v10))
    w50 = vertical.effective_speed(st.apply(wind.u50), st.apply(wind.v50))
    w2 = vertical.effective_speed(st.apply(wind.u2), st.apply(wind.v2)) if wind.has_2m else None
    disph = max(st.apply(wind.disph), 0.0)
    t = park.turbine
    hubs = vertical.hub_height_speed(cfg.vertical, w10, w50, disph, t.hub_height, w2, cfg.fallback_alpha)
    rec = ParkRecord(park.park_id, method, method, hub_height=t.hub_height, specific_power=t.specific_power,
                     negative_hours=hubs.n_negative)
    speed = _correct(rec, cfg, inputs, park, wind.times, hubs.speed, w10, w50, method,
                     cfg.max_station_km if max_km is None else max_km)
    curve = turbine.build_power_curve(t.specific_power, cfg.cut_in, cfg.cut_out, cfg.air_density, cfg.cp)
    cf = turbine.simulate_turbine(curve, speed)
    active = wind.times.astype("datetime64[D]") >= park.commissioning_date
    power = np.where(active, cf * park.installed_capacity, 0.0)
    return power, rec


def _region_capacity(parks, dates):
    out = {}
    if dates.size == 0:
        return out
    for grouping in ("park", "state", "subsystem", "country"):
        labels = sorted({p.label(grouping) for p in parks} - {None})
        for lab in labels:
            out[lab] = fleet.capacity_timeseries(parks, dates[0], dates[-1], grouping,
                                                 None if grouping == "country" else lab)
            out[lab] = dataclasses.replace(out[lab], label=lab)
    return out


def _cf_lookup(label, parks, factors):
    if label in factors:
        return factors[label]
    subs = {p.subsystem for p in parks if p.park_id == label or p.state == label}
    if len(subs) == 1 and (sub := subs.pop()) in factors:
        return factors[sub]
    return factors.get(fleet.COUNTRY_LABEL, 1.0)


def simulate(cfg: RunConfig, inputs: Inputs, interp: str, method: str,
             max_km: Optional[float] = None) -> SimulationResult:
    park_series, records, used = {}, [], []
    for park in inputs.parks:
        try:
            power, rec = simulate_park(park, cfg, inputs, interp, method, max_km)
        except OutOfDomainError as exc:
            log.warning("park %s excluded: %s", park.park_id, exc)
            records.append(ParkRecord(park.park_id, method, "excluded", reason=str(exc)))
            continue
        dates, gwh = validate.daily_energy(inputs.grid.times, power)
        keep = dates >= park.commissioning_date
        park_series[park.park_id] = GenerationSeries(park.park_id, dates[keep], gwh[keep])
        records.append(rec)
        used.append(park)
    dates, _ = validate.daily_energy(inputs.grid.times, np.zeros(inputs.grid.times.size))
    regions = {}
    if park_series:
        for grouping in ("state", "subsystem", "country"):
            regions.update(fleet.aggregate_generation(park_series, used, grouping))
    capacity = _region_capacity(used, dates)

    factors = {}
    if cfg.capacity_correction and inputs.reference_capacity:
        for lab, ref in sorted(inputs.reference_capacity.items()):
            if lab in capacity and lab in regions:
                try:
                    factors[lab] = fleet.capacity_correction_factor(ref, capacity[lab])
                except ValueError as exc:
                    log.warning("capacity correction for %s skipped: %s", lab, exc)
        if factors:
            for lab in list(regions):
                regions[lab] = fleet.apply_capacity_correction(regions[lab], _cf_lookup(lab, used, factors))
            for pid in list(park_series):
                park_series[pid] = fleet.apply_capacity_correction(park_series[pid], _cf_lookup(pid, used, factors))
            for lab in list(capacity):
                capacity[lab] = fleet.apply_capacity_correction(capacity[lab], _cf_lookup(lab, used, factors))
    return SimulationResult(method_tag(interp, method), park_series, regions, capacity, records, factors)


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------

def _summary(res: SimulationResult):
    applied = {}
    for r in res.records:
        applied[r.applied] = applied.get(r.applied, 0) + 1
    return {
        "n_parks": len(res.records),
        "n_corrected": res.n_corrected - applied.get("excluded", 0),
        "n_uncorrected": applied.get("none", 0),
        "n_excluded": applied.get("excluded", 0),
        "applied": dict(sorted(applied.items())),
        "capacity_factors": {k: round(v, 12) for k, v in sorted(res.capacity_factors.items())},
        "parks": [{k: (round(v, 9) if isinstance(v, float) else v)
                   for k, v in dataclasses.asdict(r).items()} for r in res.records],
    }


def write_simulation(res: SimulationResult, out_dir) -> Path:
    d = Path(out_dir) / "simulate" / res.tag
    d.mkdir(parents=True, exist_ok=True)
    io.write_generation(d / "generation_parks.csv", res.parks)
    io.write_generation(d / "generation_regions.csv", res.regions)
    io.write_capacity(d / "capacity.csv", res.capacity)
    return d


def _write_manifest(out_dir, cfg, inputs, sections: dict):
    manifest = {
        "config_sha256": cfg.source_digest,
        "excluded_parks": [{"park_id": p, "reason": r} for p, r in inputs.excluded],
        "stations": dict(sorted(inputs.station_status.items())),
        "relative_metric_normalization": validate.NORMALIZATION,
        "runs": sections,
    }
    path = Path(out_dir) / "manifest.json"
    if path.exists():
        old = json.loads(path.read_text())
        if old.get("config_sha256") == cfg.source_digest:
            old["runs"].update(sections)
            manifest["runs"] = dict(sorted(old["runs"].items()))
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _check_degradation(cfg, results):
    for res in results:
        recs = [r for r in res.records if r.applied != "excluded"]
        if not recs or res.tag.endswith("-none"):
            continue
        frac = sum(r.applied != r.requested for r in recs) / len(recs)
        if frac > cfg.max_fallback_fraction:
            raise DegradationError(
                f"{res.tag}: {frac:.0%} of parks fell back, limit {cfg.max_fallback_fraction:.0%}")


def run_simulate(cfg: RunConfig, inputs: Optional[Inputs] = None) -> list:
    inputs = inputs or load_inputs(cfg)
    results = []
    for interp in cfg.interpolation:
        for method in cfg.biascorr:
            res = simulate(cfg, inputs, interp, method)
            write_simulation(res, cfg.out_dir)
            results.append(res)
    _write_manifest(cfg.out_dir, cfg, inputs, {f"simulate/{r.tag}": _summary(r) for r in results})
    _check_degradation(cfg, results)
    return results


def _load_simulated(d: Path):
    sim = io.read_generation(d / "generation_regions.csv")
    parks_file = d / "generation_parks.csv"
    if parks_file.exists():
        sim.update(io.read_generation(parks_file))
    cap = io.read_capacity(d / "capacity.csv")
    return sim, cap


def run_validate(cfg: RunConfig, observed: Optional[dict] = None) -> list:
    """Compare every simulated method directory with the observed file."""
    if observed is None:
        if not cfg.observed:
            raise ConfigError("validate needs input.observed")
        observed = io.read_generation(cfg.observed)
    reports, diffs = [], []
    for interp in cfg.interpolation:
        for method in cfg.biascorr:
            tag = method_tag(interp, method)
            d = Path(cfg.out_dir) / "simulate" / tag
            if not (d / "generation_regions.csv").exists():
                raise ConfigError(f"no simulated output for {tag} in {d}; run simulate first")
            sim, cap = _load_simulated(d)
            reps = validate.evaluate(sim, observed, cap, tag)
            reports.extend(reps)
            for rep in reps:
                diffs.append((tag, rep.region, *validate.daily_differences(sim[rep.region], observed[rep.region])))
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    io.write_reports(out / "validation.csv", reports, validate.NORMALIZATION)
    with open(out / "differences.csv", "w", newline="") as fh:
        fh.write("region,method,date,sim_gwh,obs_gwh,diff_gwh\n")
        for tag, region, dates, s, o, dd in diffs:
            for k in range(dates.size):
                fh.write(f"{region},{tag},{dates[k]},{s[k]:.6g},{o[k]:.6g},{dd[k]:.6g}\n")
    return reports


def run_sweep_distance(cfg: RunConfig, inputs: Optional[Inputs] = None, km_list=None) -> list:
    """Repeat the mean_station run per maximum station distance."""
    inputs = inputs or load_inputs(cfg)
    if not inputs.stations and not inputs.station_status:
        raise ConfigError("sweep-distance needs station inputs")
    observed = inputs.observed
    km_list = list(cfg.sweep_km if km_list is None else km_list)
    interp = cfg.interpolation[0]
    rows = []
    summary = {}
    for km in km_list:
        res = simulate(cfg, inputs, interp, "mean_station", max_km=km)
        n_corr = sum(1 for r in res.records if r.applied == "mean_station")
        summary[f"{km:g}"] = n_corr
        reps = []
        if observed is not None:
            sim = dict(res.regions)
            sim.update(res.parks)
            reps = validate.evaluate(sim, observed, res.capacity, res.tag)
        rows.append((km, n_corr, reps))
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "sweep_distance.csv", "w", newline="") as fh:
        fh.write("max_km,n_corrected," + ",".join(io.REPORT_COLUMNS) + "\n")
        for km, n, reps in rows:
            if not reps:
                fh.write(f"{km:g},{n}" + "," * len(io.REPORT_COLUMNS) + "\n")
            for r in reps:
                cells = [r.region, r.method, str(r.n_days)] + [
                    "" if v is None else f"{v:.6g}" for v in
                    (r.correlation, r.rmse, r.mbe, r.mean_sim, r.mean_obs, r.mean_capacity, r.rel_rmse, r.rel_mbe)]
                fh.write(f"{km:g},{n}," + ",".join(cells) + "\n")
    _write_manifest(cfg.out_dir, cfg, inputs, {"sweep_distance": {"corrected_parks": summary}})
    return rows


def run_full(cfg: RunConfig):
    inputs = load_inputs(cfg)
    results = run_simulate(cfg, inputs)
    reports = run_validate(cfg, inputs.observed) if inputs.observed is not None else []
    sweep = run_sweep_distance(cfg, inputs) if inputs.station_status else []
    return results, reports, sweep
