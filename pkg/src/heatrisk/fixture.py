"""Synthetic input bundle with a known data-generating model.

The bundle mimics the real inputs' shape (four countries, five stations each,
hourly consumption, capacity factors, annual macro drivers, holidays) so the
whole pipeline can run without proprietary grid-operator data.
"""
from __future__ import annotations

from datetime import date, timedelta
from pathlib import Path

import numpy as np
import yaml
from dateutil.easter import easter

from . import io
from .features import SCHEMA, StationTemperature, build_design_matrix
from .series import HourlySeries, hourly_range

# country: (mean load MWh, mean temp, seasonal amplitude, national day, HDH coefs)
COUNTRIES = {
    "NO": (15000.0, 6.0, 11.0, (5, 17), (0.006, 0.005, 0.003, 0.002, 0.002)),
    "SE": (16000.0, 7.0, 11.0, (6, 6), (0.006, 0.005, 0.003, 0.002, 0.002)),
    "DK": (4000.0, 9.0, 9.0, (6, 5), (0.003, 0.002, 0.002, 0.001, 0.001)),
    "FI": (9500.0, 5.0, 13.0, (12, 6), (0.005, 0.003, 0.003, 0.002, 0.001)),
}
STATION_OFFSETS = (0.0, -1.5, 1.5, -2.5, 2.0)
ARCHIVE_YEARS = (2011, 2014)
MACRO_YEARS = (2005, 2041)
NOISE_SD = 0.03


def holidays_for(country: str, years) -> list[date]:
    national = COUNTRIES[country][3]
    days = []
    for y in years:
        e = easter(y)
        days += [date(y, 1, 1), date(y, 5, 1), date(y, 12, 25), date(y, 12, 26),
                 date(y, *national), e - timedelta(days=2), e + timedelta(days=1),
                 e + timedelta(days=39), e + timedelta(days=50)]
    return sorted(set(days))


def true_coefficients(country: str) -> np.ndarray:
    """Coefficient vector (without a calibrated intercept) in schema order."""
    coef = dict.fromkeys(SCHEMA, 0.0)
    coef["ln_gdp"], coef["ln_pop"] = 0.5, 1.0
    for i, c in enumerate(COUNTRIES[country][4], start=1):
        coef[f"hdh_{i}"] = c
        coef[f"cdh_{i}"] = 0.002
    for h in range(1, 24):
        coef[f"hour_{h}"] = 0.09 * (1 - np.cos(2 * np.pi * h / 24)) - 0.03 * np.sin(2 * np.pi * h / 12)
    for m in range(2, 13):
        coef[f"month_{m}"] = -0.15 * np.sin(np.pi * (m - 1) / 12) ** 2
    coef["weekday_5"], coef["weekday_6"] = -0.06, -0.09
    coef["holiday"] = -0.1
    return np.array([coef[c] for c in SCHEMA])


def _macro(rng, years):
    n = len(years)
    gdp = 3e5 * np.cumprod(1 + rng.normal(0.02, 0.012, n))
    pop = 5e6 * np.cumprod(1 + rng.normal(0.006, 0.002, n))
    return gdp, pop


def _temperatures(rng, grid, mean, amp):
    hours = grid.astype(np.int64)
    doy = (grid.astype("datetime64[D]") - grid.astype("datetime64[Y]")).astype(int)
    hod = hours % 24
    ndays = grid.size // 24
    daily = np.empty(ndays)
    daily[0] = 0.0
    shocks = rng.normal(0, 2.0, ndays)
    for d in range(1, ndays):
        daily[d] = 0.85 * daily[d - 1] + shocks[d]
    years = grid.astype("datetime64[Y]").astype(int)
    year_anom = rng.normal(0, 1.5, years.max() - years.min() + 1)[years - years.min()]
    common = (mean - amp * np.cos(2 * np.pi * (doy - 15) / 365.25)
              - 4.0 * np.cos(2 * np.pi * (hod - 3) / 24)
              + np.repeat(daily, 24)[: grid.size] + year_anom)
    cols = []
    for off in STATION_OFFSETS:
        local = rng.normal(0, 0.8, grid.size)
        cols.append(np.round(common + off + local, 2))
    return np.column_stack(cols)


def _capacity_factors(rng, grid):
    doy = (grid.astype("datetime64[D]") - grid.astype("datetime64[Y]")).astype(int)
    hod = grid.astype(np.int64) % 24
    z = np.empty(grid.size)
    z[0] = 0.0
    shocks = rng.normal(0, 0.25, grid.size)
    for t in range(1, grid.size):
        z[t] = 0.97 * z[t - 1] + shocks[t]
    wind = 1 / (1 + np.exp(-(1.2 * z - 0.8 + 0.5 * np.cos(2 * np.pi * doy / 365.25))))
    daylight = 6 + 4 * (1 - np.cos(2 * np.pi * (doy - 172) / 365.25))  # hours from solar noon
    half = np.clip(12 - daylight / 1.2, 2, 10)
    elev = np.clip(np.cos(np.pi * (hod - 12) / (2 * half)), 0, None) * (np.abs(hod - 12) < half)
    clear = rng.beta(2, 2, grid.size // 24).repeat(24)[: grid.size]
    solar = elev * (0.25 + 0.45 * clear) * (0.4 + 0.6 * np.cos(2 * np.pi * (doy - 172) / 365.25) ** 2)
    return np.round(np.clip(wind, 0, 1), 4), np.round(np.clip(solar, 0, 1), 4)


def generate_fixture(out_dir, seed: int = 20400101, archive_years=ARCHIVE_YEARS,
                     countries=tuple(COUNTRIES), shifts=tuple(range(-10, 11))) -> Path:
    """Write the synthetic bundle and a ready-to-run ``config.yaml``; return its path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    y0, y1 = archive_years
    grid = hourly_range(f"{y0}-01-01T00", f"{y1 + 1}-01-01T00")
    ts_text = io.format_timestamps(grid)
    macro_years = list(range(MACRO_YEARS[0], MACRO_YEARS[1] + 1))
    inputs = {}
    cf_rows = []
    for country in countries:
        level, mean, amp = COUNTRIES[country][:3]
        gdp_a, pop_a = _macro(rng, macro_years)
        io.write_rows(out / f"macro_{country}.csv", io.MACRO_COLUMNS,
                      zip(macro_years, np.round(gdp_a, 3), np.round(pop_a, 1)))
        gdp, pop = io.load_macro(out / f"macro_{country}.csv")
        hol = holidays_for(country, macro_years)
        io.write_rows(out / f"holidays_{country}.csv", io.HOLIDAY_COLUMNS, ([d.isoformat()] for d in hol))

        temps = _temperatures(rng, grid, mean, amp)
        station_ids = [f"{country}{i}" for i in range(1, 6)]
        rows = ((ts_text[t], station_ids[s], float(temps[t, s]))
                for t in range(grid.size) for s in range(5))
        io.write_rows(out / f"weather_{country}.csv", io.WEATHER_COLUMNS, rows)

        stations = [StationTemperature(sid, HourlySeries(grid, temps[:, i])) for i, sid in enumerate(station_ids)]
        X = build_design_matrix(stations, gdp.reindex(grid), pop.reindex(grid),
                                np.array([np.datetime64(d) for d in hol]))
        beta = true_coefficients(country)
        eta = X.values @ beta
        beta[0] = np.log(level) - eta.mean()
        load = np.exp(X.values @ beta + rng.normal(0, NOISE_SD, grid.size))
        io.write_rows(out / f"consumption_{country}.csv", io.CONSUMPTION_COLUMNS,
                      zip(ts_text, np.round(load, 1)))

        wind, solar = _capacity_factors(rng, grid)
        cf_rows.append((country, wind, solar))
        inputs[country] = {
            "consumption": f"consumption_{country}.csv",
            "weather": f"weather_{country}.csv",
            "macro": f"macro_{country}.csv",
            "holidays": f"holidays_{country}.csv",
        }
    rows = ((ts_text[t], c, float(w[t]), float(s[t])) for t in range(grid.size) for c, w, s in cf_rows)
    io.write_rows(out / "capacity_factors.csv", io.CAPACITY_FACTOR_COLUMNS, rows)

    config = {
        "countries": list(countries),
        "inputs": inputs,
        "capacity_factors": "capacity_factors.csv",
        "shares": [0.0, 0.5, 1.0],
        "shifts": list(shifts),
        "target_year": 2040,
        "train_fraction": 0.75,
        "output_dir": "out",
        "jobs": 1,
        "seed": seed,
    }
    path = out / "config.yaml"
    path.write_text(yaml.safe_dump(config, sort_keys=False), encoding="utf-8")
    return path
