"""Hourly projections of consumption, VRE output and residual demand."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .calibrate import CalibratedModel
from .exceptions import AlignmentError, ContractError, DataError, DomainError, InputError
from .features import StationTemperature, build_design_matrix
from .scenario import ElectrifiedModel, apply_electrification, bau
from .series import HourlySeries, check_aligned
from .weathergen import WeatherScenario

NORDIC = "NORDIC"


@dataclass(frozen=True)
class VreCapacity:
    wind_gw: float
    solar_gw: float

    def __post_init__(self):
        if self.wind_gw < 0 or self.solar_gw < 0:
            raise InputError("installed capacity must be non-negative")


# Installed wind and PV capacity assumed for 2040 (GW).
NORDIC_2040_CAPACITY = {
    "NO": VreCapacity(7.2, 0.03),
    "SE": VreCapacity(21.8, 7.1),
    "DK": VreCapacity(20.0, 9.1),
    "FI": VreCapacity(7.4, 7.5),
}


@dataclass(frozen=True)
class SimulationResult:
    """Hourly load balance of one area under one weather scenario.

    ``residual`` is always computed as ``consumption - wind - solar`` on the
    stored arrays, so the identity holds exactly per hour.
    """

    scenario_id: str
    area: str
    consumption: HourlySeries
    wind: HourlySeries
    solar: HourlySeries
    residual: HourlySeries
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def timestamps(self):
        return self.consumption.timestamps

    @property
    def surplus_hours(self) -> int:
        return int(np.count_nonzero(self.residual.values < 0))


def vre_generation(cf: HourlySeries, capacity_gw: float) -> HourlySeries:
    """Hourly generation in MWh from capacity factors and installed GW."""
    v = cf.values
    if np.any(v < 0) or np.any(v > 1) or not np.all(np.isfinite(v)):
        raise DataError("capacity factors must lie in [0, 1]")
    if capacity_gw < 0:
        raise InputError("installed capacity must be non-negative")
    return HourlySeries(cf.timestamps, v * (capacity_gw * 1000.0), "MWh")


def residual_demand(consumption: HourlySeries, wind: HourlySeries, solar: HourlySeries) -> HourlySeries:
    """Consumption left for dispatchable supply; negative in surplus hours."""
    try:
        check_aligned(consumption, wind, solar)
    except AlignmentError as exc:
        raise ContractError(str(exc)) from exc
    res = consumption.values - wind.values - solar.values
    out = HourlySeries(consumption.timestamps, res, "MWh")
    out.meta["surplus_hours"] = int(np.count_nonzero(res < 0))
    return out


def project_consumption(model, weather: WeatherScenario, gdp: HourlySeries, pop: HourlySeries,
                        holidays=(), country: str | None = None) -> HourlySeries:
    """Hourly consumption in MWh for the weather year's target calendar.

    ``model`` may be a plain calibrated model (treated as business-as-usual)
    or an electrified one. GDP and population are read at the target hours.
    """
    if isinstance(model, CalibratedModel):
        model = apply_electrification(model, bau(model.country))
    if not isinstance(model, ElectrifiedModel):
        raise ContractError("expected a calibrated or electrified model")
    country = country or model.base.country
    grid = weather.timestamps
    temps = weather.temperature_matrix(country)
    if temps.shape[0] != grid.size:
        raise InputError(f"weather covers {temps.shape[0]} of {grid.size} target hours")
    gdp_t, pop_t = gdp.reindex(grid), pop.reindex(grid)
    if np.any(gdp_t.values <= 0) or np.any(pop_t.values <= 0):
        raise DomainError("GDP and population projections must be positive")
    stations = [
        StationTemperature(str(i + 1), HourlySeries(grid, temps[:, i], "degC"))
        for i in range(temps.shape[1])
    ]
    X = build_design_matrix(stations, gdp_t, pop_t, holidays=holidays,
                            trend_origin=model.base.trend_origin)
    return model.predict(X)


def aggregate_nordic(results, area: str = NORDIC) -> SimulationResult:
    """Copperplate sum of several areas' hourly series.

    Areas are summed in name order, so the outcome does not depend on the
    order of ``results``; the residual is recomputed from the sums.
    """
    results = sorted(results, key=lambda r: r.area)
    if not results:
        raise InputError("nothing to aggregate")
    try:
        check_aligned(*(r.consumption for r in results))
    except AlignmentError as exc:
        raise ContractError(str(exc)) from exc
    ids = {r.scenario_id for r in results}
    if len(ids) != 1:
        raise ContractError(f"cannot aggregate across scenarios {sorted(ids)}")
    ts = results[0].timestamps

    def total(attr):
        acc = np.zeros(ts.size)
        for r in results:
            acc = acc + getattr(r, attr).values
        return HourlySeries(ts, acc, "MWh")

    cons, wind, solar = total("consumption"), total("wind"), total("solar")
    return SimulationResult(ids.pop(), area, cons, wind, solar, residual_demand(cons, wind, solar))


@dataclass(frozen=True)
class CountryDrivers:
    """Exogenous inputs for projecting one country: GDP, population, holidays."""

    gdp: HourlySeries
    pop: HourlySeries
    holidays: np.ndarray = field(default_factory=lambda: np.array([], dtype="datetime64[D]"))


def simulate_scenario(weather: WeatherScenario, models: dict, drivers: dict,
                      capacities: dict) -> list[SimulationResult]:
    """Per-country results followed by their copperplate aggregate."""
    per_country = []
    for country in sorted(models):
        model = models[country]
        d = drivers[country]
        cons = project_consumption(model, weather, d.gdp, d.pop, d.holidays, country=country)
        cap = capacities[country]
        wind = vre_generation(weather.wind_cf(country), cap.wind_gw)
        solar = vre_generation(weather.solar_cf(country), cap.solar_gw)
        per_country.append(SimulationResult(
            weather.scenario_id, country, cons, wind, solar, residual_demand(cons, wind, solar)
        ))
    return per_country + [aggregate_nordic(per_country)]
