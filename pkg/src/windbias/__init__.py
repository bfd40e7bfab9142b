"""Wind power simulation from gridded wind fields with GWA-style and station
bias correction, and validation against observed generation."""
from ._kernels import backend
from .biascorr import (CorrectedSeries, HmFactors, StationSeries, apply_hm_correction, apply_mean_correction,
                       clean_constant_runs, correction_gate, hm_factors, match_station, mean_factor,
                       qualify_station)
from .fleet import (CapacitySeries, GenerationSeries, WindPark, aggregate_generation, apply_capacity_correction,
                    capacity_correction_factor, capacity_timeseries)
from .grid import (GridGeometry, GridPoint, MeanWindRaster, OutOfDomainError, WindGrid, bicubic, bilinear,
                   haversine_km, idw, nearest_cell, raster_lookup)
from .turbine import (HubHeightModel, PowerCurve, TurbineSpec, build_power_curve, estimate_hub_height,
                      fill_missing_from_cohort, fit_hub_height_model, simulate_turbine, specific_power)
from .validate import MetricReport, daily_energy, evaluate, mbe, pearson, relative_metrics, rmse
from .vertical import (LogProfileFit, ShearParams, effective_speed, log_profile_fit, log_profile_predict,
                       power_law_extrapolate, shear_exponent)

__version__ = "0.1.0"
