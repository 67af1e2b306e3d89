"""Timestamped hourly series on a UTC grid."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import AlignmentError, InputError

HOUR = np.timedelta64(1, "h")


def as_hours(timestamps) -> np.ndarray:
    """Coerce timestamps (strings, datetimes, datetime64) to ``datetime64[h]``."""
    arr = np.asarray(timestamps)
    if arr.dtype.kind == "M":
        return arr.astype("datetime64[h]")
    if arr.dtype.kind in "OU" and arr.size:
        cleaned = [str(t).replace("Z", "").replace("+00:00", "") for t in arr.ravel()]
        return np.array(cleaned, dtype="datetime64[h]").reshape(arr.shape)
    return arr.astype("datetime64[h]")


def hourly_range(start, stop) -> np.ndarray:
    """Hours in ``[start, stop)``."""
    return np.arange(as_hours(start), as_hours(stop), HOUR)


def year_hours(year: int) -> np.ndarray:
    return hourly_range(f"{year}-01-01T00", f"{year + 1}-01-01T00")


@dataclass(frozen=True)
class HourlySeries:
    """A single quantity sampled every hour.

    ``unit`` is a free-form tag (``"MWh"``, ``"degC"``, ``"cf"``) carried along so
    outputs stay self-describing.
    """

    timestamps: np.ndarray
    values: np.ndarray
    unit: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        ts = as_hours(self.timestamps)
        vals = np.asarray(self.values, dtype=float)
        if ts.ndim != 1 or vals.ndim != 1 or ts.shape != vals.shape:
            raise InputError(
                f"timestamps and values must be 1-d of equal length, got {ts.shape} and {vals.shape}"
            )
        if ts.size > 1 and np.any(np.diff(ts) != HOUR):
            raise InputError("timestamps must be strictly increasing in 1-hour steps")
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.size

    @property
    def start(self):
        return self.timestamps[0]

    def total(self) -> float:
        return float(self.values.sum())

    def with_values(self, values, unit=None) -> "HourlySeries":
        return HourlySeries(self.timestamps, values, self.unit if unit is None else unit)

    def slice(self, start, stop) -> "HourlySeries":
        mask = (self.timestamps >= as_hours(start)) & (self.timestamps < as_hours(stop))
        return HourlySeries(self.timestamps[mask], self.values[mask], self.unit)

    def reindex(self, timestamps) -> "HourlySeries":
        """Select the values at ``timestamps``, which must all lie on this grid."""
        ts = as_hours(timestamps)
        return HourlySeries(ts, self.take(ts), self.unit)

    def take(self, timestamps) -> np.ndarray:
        """Values at ``timestamps`` in the order given; repeats are allowed."""
        ts = as_hours(timestamps)
        if not len(self):
            raise AlignmentError("cannot reindex an empty series")
        idx = ((ts - self.timestamps[0]) // HOUR).astype(np.int64)
        if np.any(idx < 0) or np.any(idx >= len(self)):
            raise AlignmentError(
                f"requested hours {ts.min()}..{ts.max()} fall outside "
                f"{self.timestamps[0]}..{self.timestamps[-1]}"
            )
        return self.values[idx]


def check_aligned(*series: HourlySeries) -> np.ndarray:
    """Return the shared grid, or raise if any series differs from the first."""
    first = series[0].timestamps
    for s in series[1:]:
        if s.timestamps.shape != first.shape or np.any(s.timestamps != first):
            raise AlignmentError("series do not share an identical timestamp grid")
    return first
