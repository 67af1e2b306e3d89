"""Shifted-date weather years built from a multi-year hourly archive."""
from __future__ import annotations

import calendar
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError, DataError, InputError
from .series import HOUR, HourlySeries, as_hours, year_hours

DEFAULT_SHIFTS = tuple(range(-4, 5))


@dataclass(frozen=True)
class WeatherArchive:
    """Coherent hourly weather for several countries on one contiguous grid.

    ``temperatures[country]`` is an ``(hours, stations)`` array in station
    order; capacity factors are ``(hours,)`` arrays.
    """

    timestamps: np.ndarray
    temperatures: dict
    stations: dict
    wind_cf: dict
    solar_cf: dict

    def __post_init__(self):
        ts = as_hours(self.timestamps)
        object.__setattr__(self, "timestamps", ts)
        if ts.size == 0:
            raise InputError("weather archive is empty")
        if ts.size > 1 and np.any(np.diff(ts) != HOUR):
            raise DataError("weather archive must be a gap-free hourly grid")
        for country, temps in self.temperatures.items():
            if temps.shape[0] != ts.size:
                raise DataError(f"{country}: temperature rows do not match the archive grid")
            if not np.all(np.isfinite(temps)):
                raise DataError(f"{country}: non-finite temperatures in archive")
        for name, table in (("wind", self.wind_cf), ("solar", self.solar_cf)):
            for country, cf in table.items():
                if cf.shape != ts.shape:
                    raise DataError(f"{country}: {name} capacity factors do not match the archive grid")
                if np.any(cf < 0) or np.any(cf > 1) or not np.all(np.isfinite(cf)):
                    raise DataError(f"{country}: {name} capacity factors outside [0, 1]")

    @property
    def countries(self):
        return tuple(self.temperatures)

    @property
    def start(self):
        return self.timestamps[0]

    @property
    def end(self):
        return self.timestamps[-1]

    def full_years(self):
        """Calendar years whose every hour lies inside the archive."""
        first = self.start.astype("datetime64[Y]").astype(int) + 1970
        last = self.end.astype("datetime64[Y]").astype(int) + 1970
        years = []
        for y in range(first, last + 1):
            hrs = year_hours(y)
            if hrs[0] >= self.start and hrs[-1] <= self.end:
                years.append(y)
        return years

    def index_of(self, timestamps) -> np.ndarray:
        idx = ((as_hours(timestamps) - self.start) // HOUR).astype(np.int64)
        if np.any(idx < 0) or np.any(idx >= self.timestamps.size):
            raise InputError("timestamps fall outside the archive")
        return idx


def calendar_source_hours(source_year: int, target_year: int) -> np.ndarray:
    """For each hour of ``target_year``, the same calendar hour in ``source_year``.

    A leap day missing from the source repeats February 28; a source leap day
    without a counterpart in the target is dropped.
    """
    src = year_hours(source_year)
    src_leap, tgt_leap = calendar.isleap(source_year), calendar.isleap(target_year)
    feb28 = 31 * 24 + 27 * 24  # offset of Feb 28 00:00
    if src_leap == tgt_leap:
        return src
    if src_leap:
        return np.concatenate([src[: feb28 + 24], src[feb28 + 48:]])
    return np.concatenate([src[: feb28 + 24], src[feb28: feb28 + 24], src[feb28 + 24:]])


def map_to_target_calendar(series: HourlySeries, target_year: int) -> HourlySeries:
    """Re-stamp one full calendar year of data onto ``target_year``."""
    source_year = int(series.start.astype("datetime64[Y]").astype(int) + 1970)
    if len(series) != year_hours(source_year).size or series.start != year_hours(source_year)[0]:
        raise InputError("source series must cover exactly one calendar year")
    source = calendar_source_hours(source_year, target_year)
    return HourlySeries(year_hours(target_year), series.take(source), series.unit)


@dataclass(frozen=True)
class WeatherScenario:
    """One simulated weather year, traceable hour by hour into the archive."""

    source_year: int
    shift_days: int
    target_year: int
    source_timestamps: np.ndarray
    archive: WeatherArchive = field(repr=False, compare=False)

    @property
    def scenario_id(self) -> str:
        return f"{self.source_year}{self.shift_days:+d}d"

    @property
    def timestamps(self) -> np.ndarray:
        return year_hours(self.target_year)

    @property
    def _idx(self):
        return self.archive.index_of(self.source_timestamps)

    def temperatures(self, country) -> list[HourlySeries]:
        temps = self.archive.temperatures[country][self._idx]
        ts = self.timestamps
        return [HourlySeries(ts, temps[:, i], "degC") for i in range(temps.shape[1])]

    def temperature_matrix(self, country) -> np.ndarray:
        return self.archive.temperatures[country][self._idx]

    def wind_cf(self, country) -> HourlySeries:
        return HourlySeries(self.timestamps, self.archive.wind_cf[country][self._idx], "cf")

    def solar_cf(self, country) -> HourlySeries:
        return HourlySeries(self.timestamps, self.archive.solar_cf[country][self._idx], "cf")


def shifted_date_scenarios(archive: WeatherArchive, target_year: int,
                           shifts=DEFAULT_SHIFTS) -> list[WeatherScenario]:
    """Every feasible (source year, day shift) pair as a weather scenario.

    Target hour ``h`` of a scenario reads the archive at the matching calendar
    hour of the source year moved back by ``shift_days`` days, so a positive
    shift uses earlier weather. Pairs that would read outside the archive are
    dropped. Scenarios come sorted by source year, then shift.
    """
    if archive.timestamps.size == 0:
        raise InputError("weather archive is empty")
    years = archive.full_years()
    if not years:
        raise InputError("archive does not cover a full calendar year")
    shifts = sorted(set(int(s) for s in shifts))
    out = []
    for year in years:
        base = calendar_source_hours(year, target_year)
        for shift in shifts:
            src = base - np.timedelta64(24 * shift, "h")
            if src[0] < archive.start or src[-1] > archive.end:
                continue
            out.append(WeatherScenario(year, shift, target_year, src, archive))
    if not out:
        raise ConfigError("no feasible (year, shift) pairs in the archive")
    return out


def select_scenarios(scenarios, n: int | None):
    """Pick ``n`` scenarios, smallest shifts first across all years.

    Raises ConfigError naming the feasible maximum when too few exist.
    """
    if n is None:
        return list(scenarios)
    if n > len(scenarios):
        raise ConfigError(
            f"requested {n} weather scenarios but only {len(scenarios)} are feasible; "
            "extend the shift set or the archive"
        )
    ranked = sorted(scenarios, key=lambda s: (abs(s.shift_days), s.source_year, s.shift_days))
    chosen = ranked[:n]
    return sorted(chosen, key=lambda s: (s.source_year, s.shift_days))
