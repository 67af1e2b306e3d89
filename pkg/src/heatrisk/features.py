"""Weather and calendar features for the hourly log-consumption regression."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import AlignmentError, DomainError, InputError
from .series import HourlySeries, as_hours, check_aligned

HDH_CUTOFF = 17.0
CDH_CUTOFF = 22.0
N_STATIONS = 5

HDH_COLUMNS = tuple(f"hdh_{i}" for i in range(1, N_STATIONS + 1))
CDH_COLUMNS = tuple(f"cdh_{i}" for i in range(1, N_STATIONS + 1))
# Baselines absorbed by the intercept: hour 0, January, Monday.
HOUR_COLUMNS = tuple(f"hour_{h}" for h in range(1, 24))
MONTH_COLUMNS = tuple(f"month_{m}" for m in range(2, 13))
WEEKDAY_COLUMNS = tuple(f"weekday_{d}" for d in range(1, 7))

SCHEMA = (
    ("intercept", "ln_gdp", "ln_pop")
    + HDH_COLUMNS
    + CDH_COLUMNS
    + HOUR_COLUMNS
    + MONTH_COLUMNS
    + WEEKDAY_COLUMNS
    + ("holiday", "trend")
)

# Regressor groups used for effect sizes. The intercept is never dropped.
GROUPS = {
    "gdp": ("ln_gdp",),
    "pop": ("ln_pop",),
    "hdh": HDH_COLUMNS,
    "cdh": CDH_COLUMNS,
    "hour": HOUR_COLUMNS,
    "month": MONTH_COLUMNS,
    "weekday": WEEKDAY_COLUMNS,
    "holiday": ("holiday",),
    "trend": ("trend",),
}


def _check_finite(temp):
    t = np.asarray(temp, dtype=float)
    if not np.all(np.isfinite(t)):
        raise InputError("temperatures must be finite")
    return t


def heating_degree_hours(temp, cutoff: float = HDH_CUTOFF):
    """``max(0, cutoff - temp)``; scalar in, scalar out."""
    t = _check_finite(temp)
    out = np.maximum(0.0, cutoff - t)
    return float(out) if out.ndim == 0 else out


def cooling_degree_hours(temp, cutoff: float = CDH_CUTOFF):
    """``max(0, temp - cutoff)``; scalar in, scalar out."""
    t = _check_finite(temp)
    out = np.maximum(0.0, t - cutoff)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class StationTemperature:
    station_id: str
    series: HourlySeries

    def __post_init__(self):
        _check_finite(self.series.values)


@dataclass(frozen=True)
class FeatureMatrix:
    values: np.ndarray
    columns: tuple
    timestamps: np.ndarray

    def __post_init__(self):
        if self.values.shape[1] != len(self.columns):
            raise InputError("column schema does not match matrix width")

    def __len__(self):
        return self.values.shape[0]

    @property
    def shape(self):
        return self.values.shape

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.columns.index(name)]

    def rows(self, index) -> "FeatureMatrix":
        return FeatureMatrix(self.values[index], self.columns, self.timestamps[index])


def calendar_fields(timestamps):
    """Hour of day, month (1-12), weekday (Monday=0) and calendar day."""
    ts = as_hours(timestamps)
    hours = ts.astype(np.int64)
    days = ts.astype("datetime64[D]")
    hour = hours % 24
    month = ts.astype("datetime64[M]").astype(np.int64) % 12 + 1
    # 1970-01-01 was a Thursday.
    weekday = (days.astype(np.int64) + 3) % 7
    return hour, month, weekday, days


def as_days(dates) -> np.ndarray:
    """Sorted unique calendar days from dates, timestamps or ISO strings."""
    if isinstance(dates, np.ndarray) and dates.dtype.kind == "M":
        return np.unique(dates.astype("datetime64[D]"))
    dates = list(dates)
    if not dates:
        return np.array([], dtype="datetime64[D]")
    days = np.array([np.datetime64(pd.Timestamp(d).date()) for d in dates], dtype="datetime64[D]")
    return np.unique(days)


def _one_hot(codes, levels):
    return (codes[:, None] == np.asarray(levels)[None, :]).astype(float)


def build_design_matrix(
    stations: Sequence[StationTemperature],
    gdp: HourlySeries,
    pop: HourlySeries,
    holidays=(),
    trend_origin=None,
    hdh_cutoff: float = HDH_CUTOFF,
    cdh_cutoff: float = CDH_CUTOFF,
) -> FeatureMatrix:
    """Assemble the 55-column regression matrix, one row per hour.

    Station order fixes the HDH/CDH column index. ``trend_origin`` defaults to
    the first timestamp; the trend column counts whole hours since it.
    """
    if len(stations) != N_STATIONS:
        raise InputError(f"expected {N_STATIONS} stations, got {len(stations)}")
    grid = check_aligned(*(s.series for s in stations), gdp, pop)
    if grid.size == 0:
        raise InputError("no hours to build features for")
    if np.any(gdp.values <= 0) or np.any(pop.values <= 0):
        raise DomainError("GDP and population must be strictly positive")

    temps = np.column_stack([s.series.values for s in stations])
    hour, month, weekday, days = calendar_fields(grid)
    holiday_days = as_days(holidays)
    origin = grid[0] if trend_origin is None else as_hours(trend_origin)

    X = np.column_stack([
        np.ones(grid.size),
        np.log(gdp.values),
        np.log(pop.values),
        heating_degree_hours(temps, hdh_cutoff),
        cooling_degree_hours(temps, cdh_cutoff),
        _one_hot(hour, range(1, 24)),
        _one_hot(month, range(2, 13)),
        _one_hot(weekday, range(1, 7)),
        np.isin(days, holiday_days).astype(float),
        ((grid - origin) // np.timedelta64(1, "h")).astype(float),
    ])
    return FeatureMatrix(X, SCHEMA, grid)


class DesignMatrixBuilder(TransformerMixin, BaseEstimator):
    """Turn an hourly frame of station temperatures plus GDP/POP into regressors.

    Parameters
    ----------
    stations : list of str, optional
        Temperature columns in HDH/CDH index order. Defaults to every column
        other than ``gdp`` and ``pop``, in frame order.
    holidays : iterable of dates
        Days flagged by the holiday indicator.
    trend_origin : timestamp, optional
        Hour zero of the trend column. Learned from the first row seen by
        ``fit`` when omitted, so later transforms extend the same trend.
    """

    def __init__(self, stations=None, holidays=(), trend_origin=None,
                 hdh_cutoff=HDH_CUTOFF, cdh_cutoff=CDH_CUTOFF):
        self.stations = stations
        self.holidays = holidays
        self.trend_origin = trend_origin
        self.hdh_cutoff = hdh_cutoff
        self.cdh_cutoff = cdh_cutoff

    def _station_columns(self, frame):
        if self.stations is not None:
            return list(self.stations)
        return [c for c in frame.columns if c not in ("gdp", "pop")]

    def fit(self, X, y=None):
        frame = _as_frame(X)
        self.stations_ = self._station_columns(frame)
        missing = [c for c in self.stations_ + ["gdp", "pop"] if c not in frame.columns]
        if missing:
            raise InputError(f"frame lacks columns {missing}")
        origin = pd.Timestamp(self.trend_origin if self.trend_origin is not None else frame.index[0])
        if origin.tzinfo is not None:
            origin = origin.tz_convert("UTC").tz_localize(None)
        self.trend_origin_ = as_hours(origin.to_datetime64())
        self.n_features_in_ = frame.shape[1]
        return self

    def transform_matrix(self, X) -> FeatureMatrix:
        check_is_fitted(self, "stations_")
        frame = _as_frame(X)
        ts = as_hours(frame.index.values)
        stations = [
            StationTemperature(name, HourlySeries(ts, frame[name].to_numpy(float), "degC"))
            for name in self.stations_
        ]
        return build_design_matrix(
            stations,
            HourlySeries(ts, frame["gdp"].to_numpy(float)),
            HourlySeries(ts, frame["pop"].to_numpy(float)),
            holidays=self.holidays,
            trend_origin=self.trend_origin_,
            hdh_cutoff=self.hdh_cutoff,
            cdh_cutoff=self.cdh_cutoff,
        )

    def transform(self, X):
        return self.transform_matrix(X).values

    def get_feature_names_out(self, input_features=None):
        return np.asarray(SCHEMA, dtype=object)


def _as_frame(X) -> pd.DataFrame:
    if not isinstance(X, pd.DataFrame):
        raise InputError("expected a DataFrame indexed by hourly timestamps")
    if not isinstance(X.index, pd.DatetimeIndex):
        raise AlignmentError("frame index must be a DatetimeIndex")
    if X.index.tz is not None:
        X = X.tz_convert("UTC").tz_localize(None)
    return X
