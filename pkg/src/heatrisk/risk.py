"""Distribution statistics across weather scenarios."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .exceptions import DomainError, InputError
from .series import HourlySeries

ALPHA = 0.05
MIN_SCENARIOS = 20
KDE_GRID_POINTS = 512
KDE_GRID_PAD = 3.0

METRICS = ("total_twh", "peak_consumption_gwh", "peak_residual_gwh")


def tail_count(n: int, alpha: float) -> int:
    # alpha * n in floating point can land just above an integer (0.05 * 300).
    return math.ceil(round(alpha * n, 9))


def cvar_upper(samples, alpha: float = ALPHA) -> float:
    """Mean of the ``ceil(alpha * n)`` largest samples (upper-tail CVaR)."""
    x = np.asarray(samples, dtype=float).ravel()
    if not 0 < alpha <= 1:
        raise InputError(f"alpha must lie in (0, 1], got {alpha}")
    if x.size < math.ceil(round(1 / alpha, 9)):
        raise InputError(f"need at least {math.ceil(1 / alpha)} samples for CVaR at {alpha}")
    k = tail_count(x.size, alpha)
    return float(np.sort(x)[-k:].mean())


def cvar_upper_columns(samples: np.ndarray, alpha: float = ALPHA) -> np.ndarray:
    """Column-wise :func:`cvar_upper` of a ``(n, m)`` array."""
    x = np.asarray(samples, dtype=float)
    n = x.shape[0]
    if n < math.ceil(round(1 / alpha, 9)):
        raise InputError(f"need at least {math.ceil(1 / alpha)} samples for CVaR at {alpha}")
    k = tail_count(n, alpha)
    return np.sort(x, axis=0)[-k:].mean(axis=0)


def silverman_bandwidth(samples) -> float:
    x = np.asarray(samples, dtype=float)
    return 1.06 * x.std(ddof=1) * x.size ** (-1 / 5)


@dataclass(frozen=True)
class DensityCurve:
    grid: np.ndarray
    density: np.ndarray
    bandwidth: float

    def integral(self) -> float:
        return float(trapezoid(self.density, self.grid))


def kde_density(samples, bandwidth: float | None = None, grid=None,
                n_points: int = KDE_GRID_POINTS) -> DensityCurve:
    """Gaussian kernel density on an even grid spanning the data plus 3 bandwidths."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2 or not np.all(np.isfinite(x)):
        raise DomainError("density estimation needs at least two finite samples")
    if x.var(ddof=1) <= 0:
        raise DomainError("samples are degenerate (zero variance)")
    h = silverman_bandwidth(x) if bandwidth is None else float(bandwidth)
    if h <= 0:
        raise DomainError("bandwidth must be positive")
    if grid is None:
        grid = np.linspace(x.min() - KDE_GRID_PAD * h, x.max() + KDE_GRID_PAD * h, n_points)
    grid = np.asarray(grid, dtype=float)
    dens = np.empty_like(grid)
    norm = 1.0 / (x.size * h * math.sqrt(2 * math.pi))
    # chunked to bound memory for large samples
    step = max(1, 2_000_000 // max(x.size, 1))
    for i in range(0, grid.size, step):
        z = (grid[i:i + step, None] - x[None, :]) / h
        dens[i:i + step] = np.exp(-0.5 * z * z).sum(axis=1) * norm
    return DensityCurve(grid, dens, h)


@dataclass(frozen=True)
class DurationCurve:
    values: np.ndarray

    @property
    def hours(self) -> np.ndarray:
        """Hours at or above each level (1-based rank)."""
        return np.arange(1, self.values.size + 1)

    @property
    def exceedance(self) -> np.ndarray:
        """Fraction of the year at or above each level."""
        return self.hours / self.values.size


def load_duration(series) -> DurationCurve:
    v = series.values if isinstance(series, HourlySeries) else np.asarray(series, dtype=float)
    return DurationCurve(np.sort(v)[::-1].copy())


@dataclass(frozen=True)
class RiskSummary:
    metric: str
    mean: float
    std_dev: float
    cvar_upper_5pct: float
    n_scenarios: int

    def as_dict(self):
        return {
            "metric": self.metric,
            "mean": self.mean,
            "std_dev": self.std_dev,
            "cvar_upper_5pct": self.cvar_upper_5pct,
            "n_scenarios": self.n_scenarios,
        }


def scenario_statistics(values, metric: str = "", alpha: float = ALPHA) -> RiskSummary:
    """Mean, sample standard deviation and upper-tail CVaR across scenarios.

    Values are sorted first so the result does not depend on scenario order.
    """
    x = np.sort(np.asarray(values, dtype=float).ravel())
    if x.size < MIN_SCENARIOS:
        raise InputError(f"need at least {MIN_SCENARIOS} scenarios, got {x.size}")
    mean = float(x.mean())
    std = float(x.std(ddof=1))
    cvar = cvar_upper(x, alpha)
    # floating-point summation can push identical values a hair apart
    if np.all(x == x[0]):
        mean, std, cvar = float(x[0]), 0.0, float(x[0])
    return RiskSummary(metric, mean, std, cvar, int(x.size))


def annual_metrics(consumption: HourlySeries, residual: HourlySeries) -> dict:
    """Total consumption (TWh), peak-hour consumption and residual (GWh)."""
    return {
        "total_twh": float(consumption.values.sum()) / 1e6,
        "peak_consumption_gwh": float(consumption.values.max()) / 1e3,
        "peak_residual_gwh": float(residual.values.max()) / 1e3,
    }


def representative_duration_curves(curves, alpha: float = ALPHA):
    """Rank-wise mean curve and rank-wise upper-tail CVaR ("one-in-twenty") curve."""
    curves = list(curves)
    if len(curves) < MIN_SCENARIOS:
        raise InputError(f"need at least {MIN_SCENARIOS} duration curves, got {len(curves)}")
    stack = np.vstack([c.values if isinstance(c, DurationCurve) else np.asarray(c) for c in curves])
    return DurationCurve(stack.mean(axis=0)), DurationCurve(cvar_upper_columns(stack, alpha))
