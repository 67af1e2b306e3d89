"""Least-squares calibration of the log-linear consumption model."""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import CalibrationError, ContractError, DomainError, InputError
from .features import GROUPS, SCHEMA, FeatureMatrix
from .series import HourlySeries

log = logging.getLogger(__name__)

RANK_TOL = 1e-10
MIN_ACTUAL_MWH = 1.0


@dataclass
class CalibratedModel:
    """Coefficients aligned to a feature schema, plus fit diagnostics."""

    coefficients: np.ndarray
    schema: tuple
    residual_variance: float
    r_squared: float
    country: str = ""
    stderr: np.ndarray | None = None
    n_obs: int = 0
    trend_origin: np.datetime64 | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=float)
        self.schema = tuple(self.schema)
        if self.coefficients.shape != (len(self.schema),):
            raise ContractError(
                f"{self.coefficients.size} coefficients for a {len(self.schema)}-column schema"
            )
        if not 0.0 <= self.r_squared <= 1.0:
            raise ContractError(f"R-squared {self.r_squared} outside [0, 1]")

    def coef(self, name: str) -> float:
        return float(self.coefficients[self.schema.index(name)])

    def linear_predictor(self, X: FeatureMatrix) -> np.ndarray:
        if tuple(X.columns) != self.schema:
            raise ContractError("feature schema does not match the model schema")
        return X.values @ self.coefficients


@dataclass(frozen=True)
class ErrorMetrics:
    rmse: float
    mae: float
    mape: float
    smape: float

    def as_dict(self):
        return {"rmse": self.rmse, "mae": self.mae, "mape": self.mape, "smape": self.smape}


def train_size(n: int, fraction: float) -> int:
    # round half up; Python's round() would send 1.5 to 2 but 2.5 to 2.
    return int(math.floor(fraction * n + 0.5))


def split_train_valid(*arrays, fraction: float = 0.75, shuffle: bool = False, random_state=None):
    """Split row-aligned arrays into training and validation parts.

    Chronological by default: the first ``round(fraction * N)`` rows train.
    Returns ``train, valid`` for a single array and the flat sequence
    ``a_train, a_valid, b_train, b_valid, ...`` otherwise, like
    ``sklearn.model_selection.train_test_split``.
    """
    if not arrays:
        raise InputError("nothing to split")
    n = len(arrays[0])
    if n == 0:
        raise InputError("cannot split an empty dataset")
    if any(len(a) != n for a in arrays):
        raise InputError("arrays to split differ in length")
    if not 0.0 < fraction <= 1.0:
        raise InputError(f"fraction must lie in (0, 1], got {fraction}")
    n_train = train_size(n, fraction)
    if n_train == n:
        warnings.warn("training fraction leaves an empty validation sample", stacklevel=2)
    order = np.arange(n)
    if shuffle:
        order = np.random.default_rng(random_state).permutation(n)
    train_idx, valid_idx = order[:n_train], order[n_train:]
    if shuffle:
        train_idx, valid_idx = np.sort(train_idx), np.sort(valid_idx)
    out = []
    for a in arrays:
        out.extend([_take(a, train_idx), _take(a, valid_idx)])
    return tuple(out)


def _take(a, idx):
    if isinstance(a, FeatureMatrix):
        return a.rows(idx)
    if isinstance(a, HourlySeries):
        return a.values[idx]
    return np.asarray(a)[idx]


def _dependent_columns(R, names, tol):
    """Columns participating in near-null directions of the (scaled) R factor."""
    _, s, vt = np.linalg.svd(R)
    small = s < tol * s[0]
    null = vt[small]
    involved = np.any(np.abs(null) > 1e-6, axis=0)
    return [n for n, hit in zip(names, involved) if hit]


def fit_ols(X, y, columns=None, country: str = "", rank_tol: float = RANK_TOL) -> CalibratedModel:
    """Ordinary least squares of ``y`` (already log-consumption) on ``X``.

    Solved through a Householder QR of the column-equilibrated matrix. A matrix
    whose scaled singular values fall below ``rank_tol`` times the largest is
    rejected with the offending columns named.
    """
    if isinstance(X, FeatureMatrix):
        columns = X.columns if columns is None else columns
        X = X.values
    X = check_array(X, dtype=float, ensure_min_samples=1)
    y = np.asarray(y, dtype=float).ravel()
    n, p = X.shape
    columns = tuple(columns) if columns is not None else tuple(f"x{i}" for i in range(p))
    if len(columns) != p:
        raise ContractError("column names do not match matrix width")
    if y.size != n:
        raise ContractError(f"{n} rows but {y.size} responses")
    if not np.all(np.isfinite(y)):
        raise InputError("response contains non-finite values")
    if n < p:
        raise CalibrationError(f"need at least as many rows as columns, got {n} x {p}")

    norms = np.linalg.norm(X, axis=0)
    zero = [c for c, nrm in zip(columns, norms) if nrm == 0.0]
    if zero:
        raise CalibrationError(f"rank-deficient design: all-zero columns {zero}", zero)
    Xs = X / norms
    Q, R = np.linalg.qr(Xs, mode="reduced")
    sv = np.linalg.svd(R, compute_uv=False)
    if sv[-1] < rank_tol * sv[0]:
        dep = _dependent_columns(R, columns, rank_tol)
        raise CalibrationError(f"rank-deficient design; linearly dependent columns {dep}", dep)

    beta_s = solve_triangular(R, Q.T @ y)
    beta = beta_s / norms
    resid = y - X @ beta
    sse = float(resid @ resid)
    sst = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - sse / sst if sst > 0 else 1.0
    sigma2 = sse / (n - p) if n > p else float("nan")
    Rinv = solve_triangular(R, np.eye(p))
    cov_s = sigma2 * (Rinv @ Rinv.T)
    stderr = np.sqrt(np.diag(cov_s)) / norms
    return CalibratedModel(
        coefficients=beta,
        schema=columns,
        residual_variance=sigma2,
        r_squared=min(max(r2, 0.0), 1.0),
        country=country,
        stderr=stderr,
        n_obs=n,
    )


def predict(model: CalibratedModel, X: FeatureMatrix) -> HourlySeries:
    """Back-transformed consumption ``exp(X beta)`` in MWh; no bias correction."""
    return HourlySeries(X.timestamps, np.exp(model.linear_predictor(X)), "MWh")


def _values(s):
    return s.values if isinstance(s, HourlySeries) else np.asarray(s, dtype=float)


def accuracy(predicted, actual) -> ErrorMetrics:
    """RMSE, MAE, MAPE and sMAPE on the MWh scale (percentages in %)."""
    p, a = _values(predicted), _values(actual)
    if p.shape != a.shape:
        raise ContractError(f"length mismatch: {p.size} predicted vs {a.size} actual")
    if a.size == 0:
        raise InputError("accuracy needs at least one observation")
    if np.any(a < MIN_ACTUAL_MWH):
        raise DomainError(f"actual consumption below {MIN_ACTUAL_MWH} MWh makes MAPE undefined")
    err = p - a
    denom = (np.abs(p) + np.abs(a)) / 2.0
    return ErrorMetrics(
        rmse=float(np.sqrt(np.mean(err ** 2))),
        mae=float(np.mean(np.abs(err))),
        mape=float(np.mean(np.abs(err) / np.abs(a)) * 100.0),
        smape=float(np.mean(np.abs(err) / denom) * 100.0),
    )


def r_squared(X: np.ndarray, y: np.ndarray) -> float:
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    sst = ((y - y.mean()) ** 2).sum()
    return float(1.0 - (resid @ resid) / sst)


def effect_size(model: CalibratedModel, group, X, y) -> float:
    """Cohen's f-squared for dropping ``group`` from the full model.

    ``group`` is either a key of :data:`heatrisk.features.GROUPS` or an
    explicit list of column names; ``y`` is the log-consumption the model was
    fitted on.
    """
    cols = GROUPS.get(group, group) if isinstance(group, str) else tuple(group)
    if isinstance(cols, str) or not cols:
        raise ContractError(f"unknown or empty regressor group {group!r}")
    unknown = [c for c in cols if c not in model.schema]
    if unknown:
        raise ContractError(f"columns {unknown} not in the model schema")
    values = X.values if isinstance(X, FeatureMatrix) else np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    full = model.r_squared
    keep = [i for i, c in enumerate(model.schema) if c not in cols]
    reduced = r_squared(values[:, keep], y) if keep else 0.0
    if full >= 1.0:
        return math.inf
    return max(0.0, (full - reduced) / (1.0 - full))


def effect_sizes(model: CalibratedModel, X, y, groups=None) -> dict:
    groups = GROUPS if groups is None else groups
    return {name: effect_size(model, cols, X, y) for name, cols in groups.items()}


class LogLinearConsumptionModel(RegressorMixin, BaseEstimator):
    """Regress log consumption on a design matrix; predict consumption in MWh.

    ``fit`` takes consumption in MWh and logs it internally, so ``predict``
    and ``score`` work on the same scale as the target passed in.
    """

    def __init__(self, country="", feature_names=None, rank_tol=RANK_TOL):
        self.country = country
        self.feature_names = feature_names
        self.rank_tol = rank_tol

    def _columns(self, X):
        if isinstance(X, FeatureMatrix):
            return X.columns
        if self.feature_names is not None:
            return tuple(self.feature_names)
        width = np.shape(X)[1]
        return SCHEMA if width == len(SCHEMA) else None

    def fit(self, X, y):
        y = np.asarray(y, dtype=float)
        if np.any(y <= 0):
            raise DomainError("consumption must be strictly positive to take logs")
        self.model_ = fit_ols(X, np.log(y), columns=self._columns(X),
                              country=self.country, rank_tol=self.rank_tol)
        self.coef_ = self.model_.coefficients
        self.feature_names_in_ = np.asarray(self.model_.schema, dtype=object)
        self.n_features_in_ = len(self.model_.schema)
        return self

    def predict_log(self, X):
        check_is_fitted(self, "model_")
        values = X.values if isinstance(X, FeatureMatrix) else check_array(X, dtype=float)
        if values.shape[1] != self.n_features_in_:
            raise ContractError(f"expected {self.n_features_in_} columns, got {values.shape[1]}")
        if isinstance(X, FeatureMatrix) and tuple(X.columns) != self.model_.schema:
            raise ContractError("feature schema does not match the fitted schema")
        return values @ self.coef_

    def predict(self, X):
        return np.exp(self.predict_log(X))
