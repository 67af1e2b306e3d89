import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heatrisk.calibrate import (
    ErrorMetrics,
    accuracy,
    effect_size,
    effect_sizes,
    fit_ols,
    predict,
    split_train_valid,
)
from heatrisk.exceptions import CalibrationError, ContractError, DomainError, InputError
from heatrisk.features import FeatureMatrix, SCHEMA
from heatrisk.series import hourly_range

from conftest import synthetic_design


@pytest.mark.filterwarnings("ignore:training fraction")
@pytest.mark.parametrize("n, n_train", [(4, 3), (100, 75), (2, 2), (10, 8), (6, 5)])
def test_split_sizes(n, n_train):
    tr, va = split_train_valid(np.arange(n))
    assert len(tr) == n_train and len(va) == n - n_train
    assert sorted(np.concatenate([tr, va])) == list(range(n))


def test_split_shuffle_is_seeded_partition():
    tr1, va1 = split_train_valid(np.arange(50), shuffle=True, random_state=3)
    tr2, _ = split_train_valid(np.arange(50), shuffle=True, random_state=3)
    assert np.array_equal(tr1, tr2)
    assert set(tr1).isdisjoint(va1) and len(tr1) + len(va1) == 50


def test_split_full_fraction_warns():
    with pytest.warns(UserWarning):
        tr, va = split_train_valid(np.arange(5), fraction=1.0)
    assert len(va) == 0


def test_split_empty_rejected():
    with pytest.raises(InputError):
        split_train_valid(np.array([]))


def test_split_multiple_arrays_stay_aligned():
    X = synthetic_design(40)
    y = np.arange(40.0)
    X_tr, X_va, y_tr, y_va = split_train_valid(X, y)
    assert isinstance(X_tr, FeatureMatrix)
    assert np.array_equal(X_tr.column("trend"), y_tr)
    assert np.array_equal(X_va.column("trend"), y_va)


def test_identity_design_interpolates():
    y = np.random.default_rng(1).normal(size=8)
    m = fit_ols(np.eye(8), y)
    np.testing.assert_allclose(m.coefficients, y, atol=1e-12)


def test_duplicated_column_named_in_error():
    X = synthetic_design().values
    X = np.column_stack([X, X[:, 5]])
    cols = SCHEMA + ("hdh_3_copy",)
    with pytest.raises(CalibrationError) as exc:
        fit_ols(X, np.zeros(9000), columns=cols)
    assert set(exc.value.dependent_columns) == {"hdh_3", "hdh_3_copy"}


def test_all_zero_column_rejected():
    X = synthetic_design().values
    X = np.column_stack([X, np.zeros(9000)])
    with pytest.raises(CalibrationError) as exc:
        fit_ols(X, np.zeros(9000), columns=SCHEMA + ("zero",))
    assert exc.value.dependent_columns == ("zero",)


def test_too_few_rows():
    with pytest.raises(CalibrationError):
        fit_ols(np.ones((3, 4)), np.ones(3))


def _fit_example(n=20000, seed=2):
    rng = np.random.default_rng(seed)
    X = synthetic_design(n, seed=seed)
    beta = rng.normal(0, 0.01, 55)
    beta[0] = 9.0
    y = X.values @ beta + rng.normal(0, 0.05, n)
    return X, y, beta, fit_ols(X, y)


def test_fit_matches_independent_lstsq_and_is_orthogonal():
    X, y, _, m = _fit_example()
    ref, *_ = np.linalg.lstsq(X.values, y, rcond=None)
    np.testing.assert_allclose(m.coefficients, ref, rtol=1e-6, atol=1e-9)
    r = y - X.values @ m.coefficients
    assert np.max(np.abs(X.values.T @ r)) / (np.linalg.norm(X.values) * np.linalg.norm(r)) < 1e-8


def test_r_squared_recomputed_independently():
    X, y, _, m = _fit_example()
    r = y - X.values @ m.coefficients
    r2 = 1 - (r @ r) / ((y - y.mean()) @ (y - y.mean()))
    assert abs(m.r_squared - r2) < 1e-10


def test_standard_errors_match_classical_formula():
    X, y, _, m = _fit_example(9000)
    r = y - X.values @ m.coefficients
    sigma2 = r @ r / (9000 - 55)
    # SVD route: (X'X)^-1 = V S^-2 V'
    _, s, vt = np.linalg.svd(X.values, full_matrices=False)
    cov = sigma2 * (vt.T / s**2) @ vt
    np.testing.assert_allclose(m.stderr, np.sqrt(np.diag(cov)), rtol=1e-6)


def test_predict_examples():
    grid = hourly_range("2024-01-01T00", "2024-01-01T02")
    X = FeatureMatrix(np.zeros((2, 55)), SCHEMA, grid)
    X.values[:, 0] = 1.0
    beta = np.zeros(55)
    beta[0] = 2.5
    from heatrisk.calibrate import CalibratedModel
    m = CalibratedModel(beta, SCHEMA, 0.0, 0.5)
    np.testing.assert_allclose(predict(m, X).values, math.exp(2.5))
    m0 = CalibratedModel(np.zeros(55), SCHEMA, 0.0, 0.5)
    assert np.all(predict(m0, X).values == 1.0)
    with pytest.raises(ContractError):
        predict(m0, FeatureMatrix(np.zeros((2, 55)), tuple(reversed(SCHEMA)), grid))


def test_in_sample_mape_self_consistent():
    X, y, _, m = _fit_example(9000)
    actual = np.exp(y)
    reported = accuracy(predict(m, X), actual)
    again = accuracy(np.exp(X.values @ m.coefficients), actual)
    assert reported.mape == again.mape


def _oracle_metrics(p, a):
    p = [Fraction(x) for x in p]
    a = [Fraction(x) for x in a]
    n = len(a)
    se = sum((pi - ai) ** 2 for pi, ai in zip(p, a)) / n
    mae = sum(abs(pi - ai) for pi, ai in zip(p, a)) / n
    mape = sum(abs(pi - ai) / abs(ai) for pi, ai in zip(p, a)) / n * 100
    smape = sum(abs(pi - ai) / ((abs(pi) + abs(ai)) / 2) for pi, ai in zip(p, a)) / n * 100
    return math.sqrt(se), float(mae), float(mape), float(smape)


def test_accuracy_hand_example():
    m = accuracy([110.0, 180.0], [100.0, 200.0])
    rmse, mae, mape, smape = _oracle_metrics([110, 180], [100, 200])
    # hand values: sqrt(250), 15, 10 %, (10/105 + 20/190) / 2
    assert m.rmse == pytest.approx(rmse, rel=1e-12) == pytest.approx(15.811388300841896)
    assert m.mae == pytest.approx(mae) == 15.0
    assert m.mape == pytest.approx(mape) == pytest.approx(10.0)
    assert m.smape == pytest.approx(smape) == pytest.approx(10.025062656641603)


def test_accuracy_perfect_and_errors():
    assert accuracy([5.0, 6.0], [5.0, 6.0]) == ErrorMetrics(0.0, 0.0, 0.0, 0.0)
    with pytest.raises(ContractError):
        accuracy([1.0, 2.0], [1.0])
    with pytest.raises(DomainError):
        accuracy([1.0, 2.0], [0.0, 2.0])
    with pytest.raises(InputError):
        accuracy([], [])


positive = st.floats(min_value=1.0, max_value=1e5)


@settings(max_examples=200)
@given(st.lists(st.tuples(st.floats(min_value=0, max_value=1e5), positive), min_size=1, max_size=30))
def test_accuracy_properties(pairs):
    p, a = map(np.array, zip(*pairs))
    m = accuracy(p, a)
    assert m.rmse >= m.mae * (1 - 1e-12) >= 0
    assert 0 <= m.smape <= 200 + 1e-9
    assert m.mape >= 0


def _orthogonal_two_group(a=0.6, b=0.3, sigma=0.5, n=4000, seed=5):
    """Regressors and noise made exactly orthogonal (and centred) by QR."""
    rng = np.random.default_rng(seed)
    raw = np.column_stack([np.ones(n), rng.normal(size=(n, 3))])
    q, _ = np.linalg.qr(raw)
    x1, x2, e = q[:, 1] * np.sqrt(n), q[:, 2] * np.sqrt(n), q[:, 3] * np.sqrt(n) * sigma
    X = np.column_stack([np.ones(n), x1, x2])
    y = 1.0 + a * x1 + b * x2 + e
    return X, y, (a * a * n) / (sigma * sigma * n), (b * b * n) / (sigma * sigma * n)


def test_effect_size_matches_analytic_value():
    X, y, f2_a, f2_b = _orthogonal_two_group()
    m = fit_ols(X, y, columns=("intercept", "a", "b"))
    assert effect_size(m, ["a"], X, y) == pytest.approx(f2_a, abs=1e-3)
    assert effect_size(m, ["b"], X, y) == pytest.approx(f2_b, abs=1e-3)
    assert f2_a == pytest.approx(1.44) and f2_b == pytest.approx(0.36)


def test_effect_size_null_group_vanishes():
    rng = np.random.default_rng(0)
    n = 200_000
    X = np.column_stack([np.ones(n), rng.normal(size=n), rng.normal(size=n)])
    y = 2.0 * X[:, 1] + rng.normal(size=n)
    m = fit_ols(X, y, columns=("intercept", "signal", "null"))
    assert effect_size(m, ["null"], X, y) < 1e-4


def test_effect_size_invariant_to_within_group_order():
    X, y, _, m = _fit_example(9000)
    f_hdh = effect_size(m, "hdh", X, y)
    f_rev = effect_size(m, ["hdh_5", "hdh_3", "hdh_1", "hdh_2", "hdh_4"], X, y)
    assert f_hdh == pytest.approx(f_rev, rel=1e-12)
    assert set(effect_sizes(m, X, y)) == {"gdp", "pop", "hdh", "cdh", "hour", "month", "weekday",
                                           "holiday", "trend"}


def test_effect_size_unknown_group():
    X, y, _, m = _fit_example(9000)
    with pytest.raises(ContractError):
        effect_size(m, ["nope"], X, y)
    with pytest.raises(ContractError):
        effect_size(m, "nope", X, y)
