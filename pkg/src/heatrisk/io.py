"""CSV and JSON formats for inputs, models and reports.

All timestamps are UTC, written as ``YYYY-MM-DDTHH:00:00Z``. Floats are
written with ``repr`` so a write-then-read round trip is bit-identical.
"""
from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from .calibrate import CalibratedModel
from .exceptions import AlignmentError, DataError, DomainError, ParseError
from .features import StationTemperature
from .series import HOUR, HourlySeries, as_hours, hourly_range

log = logging.getLogger(__name__)

MAX_GAP_RUN = 6
MAX_GAP_FRACTION = 0.01

CONSUMPTION_COLUMNS = ["timestamp", "mwh"]
WEATHER_COLUMNS = ["timestamp", "station_id", "temp_c"]
CAPACITY_FACTOR_COLUMNS = ["timestamp", "country", "wind_cf", "solar_cf"]
MACRO_COLUMNS = ["year", "gdp", "pop"]
HOLIDAY_COLUMNS = ["date"]

MODEL_FORMAT = "heatrisk.calibrated-model"
MODEL_VERSION = 1


def _read_table(path, columns) -> pd.DataFrame:
    path = Path(path)
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except FileNotFoundError:
        raise
    except (pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise ParseError(f"unreadable CSV ({exc})", path) from exc
    except pd.errors.EmptyDataError as exc:
        raise ParseError("file is empty; a header row is required", path) from exc
    if list(df.columns) != columns:
        raise ParseError(f"header must be {','.join(columns)}, got {','.join(df.columns)}", path, 1)
    return df


def _parse_floats(col: pd.Series, path, name) -> np.ndarray:
    try:
        return col.to_numpy().astype(float)
    except ValueError:
        for i, raw in enumerate(col):
            try:
                float(raw)
            except ValueError:
                raise ParseError(f"{name}: cannot parse {raw!r} as a number", path, i + 2) from None
        raise


def _parse_timestamps(col: pd.Series, path) -> np.ndarray:
    parsed = pd.to_datetime(col, utc=True, format="ISO8601", errors="coerce")
    bad = parsed.isna().to_numpy()
    if bad.any():
        i = int(np.argmax(bad))
        raise ParseError(f"malformed timestamp {col.iloc[i]!r}", path, i + 2)
    off_hour = ((parsed.dt.minute != 0) | (parsed.dt.second != 0)).to_numpy()
    if off_hour.any():
        i = int(np.argmax(off_hour))
        raise ParseError(f"timestamp {col.iloc[i]!r} is not on a whole hour", path, i + 2)
    return parsed.dt.tz_localize(None).to_numpy().astype("datetime64[h]")


def _check_order(ts: np.ndarray, path, line_offset=2):
    if ts.size < 2:
        return
    step = np.diff(ts)
    dup = step == np.timedelta64(0, "h")
    if dup.any():
        i = int(np.argmax(dup)) + 1
        raise ParseError(f"duplicate timestamp {ts[i]}", path, i + line_offset)
    back = step < np.timedelta64(0, "h")
    if back.any():
        i = int(np.argmax(back)) + 1
        raise ParseError(f"timestamp {ts[i]} is out of order", path, i + line_offset)


def fill_gaps(ts: np.ndarray, values: np.ndarray, label="series",
              max_run=MAX_GAP_RUN, max_fraction=MAX_GAP_FRACTION):
    """Place values on a complete hourly grid, interpolating short gaps.

    Runs of up to ``max_run`` missing hours are filled linearly with a
    warning; longer runs, or more than ``max_fraction`` of the grid missing,
    raise DataError.
    """
    grid = hourly_range(ts[0], ts[-1] + HOUR)
    if grid.size == ts.size:
        return grid, values
    idx = ((ts - grid[0]) // HOUR).astype(np.int64)
    present = np.zeros(grid.size, dtype=bool)
    present[idx] = True
    missing = grid.size - ts.size
    if missing > max_fraction * grid.size:
        raise DataError(f"{label}: {missing} of {grid.size} hours missing (over {max_fraction:.0%})")
    gap_starts = np.flatnonzero(np.diff(idx) > 1)
    for g in gap_starts:
        run = int(idx[g + 1] - idx[g] - 1)
        if run > max_run:
            raise DataError(f"{label}: {run} consecutive hours missing after {grid[idx[g]]}")
        log.warning("%s: interpolating %d missing hour(s) after %s", label, run, grid[idx[g]])
    hours = grid.astype(np.int64)
    filled = np.interp(hours, hours[present], values)
    filled[present] = values
    return grid, filled


def load_consumption_csv(path) -> HourlySeries:
    """Hourly consumption (``timestamp,mwh``) on a gap-free UTC grid."""
    df = _read_table(path, CONSUMPTION_COLUMNS)
    if df.empty:
        raise ParseError("no data rows", path)
    ts = _parse_timestamps(df["timestamp"], path)
    _check_order(ts, path)
    vals = _parse_floats(df["mwh"], path, "mwh")
    if not np.all(np.isfinite(vals)):
        i = int(np.argmax(~np.isfinite(vals)))
        raise ParseError("non-finite consumption", path, i + 2)
    grid, vals = fill_gaps(ts, vals, label=str(path))
    return HourlySeries(grid, vals, "MWh")


def load_weather_csv(path) -> list[StationTemperature]:
    """Station temperatures (``timestamp,station_id,temp_c``), stations in file order."""
    df = _read_table(path, WEATHER_COLUMNS)
    if df.empty:
        raise ParseError("no data rows", path)
    ts = _parse_timestamps(df["timestamp"], path)
    temps = _parse_floats(df["temp_c"], path, "temp_c")
    if not np.all(np.isfinite(temps)):
        i = int(np.argmax(~np.isfinite(temps)))
        raise ParseError("non-finite temperature", path, i + 2)
    station_ids = df["station_id"].to_numpy()
    order = list(dict.fromkeys(station_ids))
    out = []
    grid0 = None
    for sid in order:
        rows = np.flatnonzero(station_ids == sid)
        s_ts = ts[rows]
        if s_ts.size > 1:
            step = np.diff(s_ts)
            if np.any(step <= np.timedelta64(0, "h")):
                j = int(np.argmax(step <= np.timedelta64(0, "h"))) + 1
                kind = "duplicate" if step[j - 1] == np.timedelta64(0, "h") else "out-of-order"
                raise ParseError(f"station {sid}: {kind} timestamp {s_ts[j]}", path, int(rows[j]) + 2)
        grid, vals = fill_gaps(s_ts, temps[rows], label=f"{path} station {sid}")
        if grid0 is None:
            grid0 = grid
        elif grid.shape != grid0.shape or np.any(grid != grid0):
            raise AlignmentError(f"{path}: station {sid} covers a different period")
        out.append(StationTemperature(str(sid), HourlySeries(grid, vals, "degC")))
    return out


def load_capacity_factors_csv(path) -> dict:
    """``{country: (wind_cf, solar_cf)}`` from ``timestamp,country,wind_cf,solar_cf``."""
    df = _read_table(path, CAPACITY_FACTOR_COLUMNS)
    if df.empty:
        raise ParseError("no data rows", path)
    ts = _parse_timestamps(df["timestamp"], path)
    wind = _parse_floats(df["wind_cf"], path, "wind_cf")
    solar = _parse_floats(df["solar_cf"], path, "solar_cf")
    bad = (wind < 0) | (wind > 1) | (solar < 0) | (solar > 1) | ~np.isfinite(wind) | ~np.isfinite(solar)
    if bad.any():
        i = int(np.argmax(bad))
        raise DataError(f"{path}:{i + 2}: capacity factor outside [0, 1]")
    countries = df["country"].to_numpy()
    out = {}
    for c in dict.fromkeys(countries):
        rows = np.flatnonzero(countries == c)
        _check_order(ts[rows], path)
        grid, w = fill_gaps(ts[rows], wind[rows], label=f"{path} {c} wind")
        _, s = fill_gaps(ts[rows], solar[rows], label=f"{path} {c} solar")
        out[str(c)] = (HourlySeries(grid, w, "cf"), HourlySeries(grid, s, "cf"))
    return out


def interpolate_annual(years, values, unit="") -> HourlySeries:
    """Hourly series through annual anchors placed at 1 January 00:00 UTC."""
    years = np.asarray(years, dtype=int)
    anchors = np.array([f"{y}-01-01T00" for y in years], dtype="datetime64[h]")
    grid = hourly_range(anchors[0], anchors[-1] + HOUR)
    x = grid.astype(np.int64)
    return HourlySeries(grid, np.interp(x, anchors.astype(np.int64), np.asarray(values, float)), unit)


def load_macro(path):
    """GDP and population (``year,gdp,pop``) interpolated to hourly resolution."""
    df = _read_table(path, MACRO_COLUMNS)
    if len(df) < 2:
        raise ParseError("need at least two annual rows", path)
    try:
        years = df["year"].astype(int).to_numpy()
    except ValueError as exc:
        raise ParseError(f"year column: {exc}", path) from exc
    if np.any(np.diff(years) <= 0):
        i = int(np.argmax(np.diff(years) <= 0)) + 1
        raise ParseError("years must be strictly increasing", path, i + 2)
    gdp = _parse_floats(df["gdp"], path, "gdp")
    pop = _parse_floats(df["pop"], path, "pop")
    if np.any(gdp <= 0) or np.any(pop <= 0):
        raise DomainError(f"{path}: GDP and population must be positive")
    return interpolate_annual(years, gdp, "gdp"), interpolate_annual(years, pop, "persons")


def load_holidays(path) -> np.ndarray:
    df = _read_table(path, HOLIDAY_COLUMNS)
    parsed = pd.to_datetime(df["date"], format="%Y-%m-%d", errors="coerce")
    bad = parsed.isna().to_numpy()
    if bad.any():
        i = int(np.argmax(bad))
        raise ParseError(f"malformed date {df['date'].iloc[i]!r}", path, i + 2)
    return np.unique(parsed.to_numpy().astype("datetime64[D]"))


def format_timestamps(ts) -> list[str]:
    return [f"{t}:00:00Z" for t in np.datetime_as_string(as_hours(ts), unit="h")]


def format_float(x) -> str:
    return repr(float(x))


def write_rows(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format_float(v) if isinstance(v, (float, np.floating)) else str(v)
                              for v in row) + "\n")


def write_series_csv(series: HourlySeries, path, value_column="mwh"):
    write_rows(path, ["timestamp", value_column], zip(format_timestamps(series.timestamps), series.values))


def write_columns_csv(path, timestamps, columns: dict):
    """Hourly columnar table: a timestamp column plus one column per entry."""
    names = list(columns)
    cols = [np.asarray(columns[n], dtype=float) for n in names]
    write_rows(path, ["timestamp"] + names,
               (([t] + [c[i] for c in cols]) for i, t in enumerate(format_timestamps(timestamps))))


def model_to_dict(model: CalibratedModel) -> dict:
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "country": model.country,
        "schema": list(model.schema),
        "coefficients": [float(c) for c in model.coefficients],
        "stderr": None if model.stderr is None else [float(s) for s in model.stderr],
        "residual_variance": float(model.residual_variance),
        "r_squared": float(model.r_squared),
        "n_obs": int(model.n_obs),
        "trend_origin": None if model.trend_origin is None else format_timestamps([model.trend_origin])[0],
        "meta": model.meta,
    }


def model_from_dict(doc: dict) -> CalibratedModel:
    if doc.get("format") != MODEL_FORMAT:
        raise DataError(f"not a calibrated-model document (format={doc.get('format')!r})")
    if doc.get("version") != MODEL_VERSION:
        raise DataError(f"unsupported model version {doc.get('version')!r}")
    origin = doc.get("trend_origin")
    return CalibratedModel(
        coefficients=np.array(doc["coefficients"], dtype=float),
        schema=tuple(doc["schema"]),
        residual_variance=doc["residual_variance"],
        r_squared=doc["r_squared"],
        country=doc.get("country", ""),
        stderr=None if doc.get("stderr") is None else np.array(doc["stderr"], dtype=float),
        n_obs=doc.get("n_obs", 0),
        trend_origin=None if origin is None else as_hours([origin])[0],
        meta=doc.get("meta", {}),
    )


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def save_model(model: CalibratedModel, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(model_to_dict(model)), encoding="utf-8")


def load_model(path) -> CalibratedModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON ({exc.msg})", path, exc.lineno) from exc
    return model_from_dict(doc)
