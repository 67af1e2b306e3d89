import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from heatrisk.exceptions import DomainError, InputError
from heatrisk.risk import (
    annual_metrics,
    cvar_upper,
    cvar_upper_columns,
    kde_density,
    load_duration,
    representative_duration_curves,
    scenario_statistics,
    silverman_bandwidth,
    tail_count,
)
from heatrisk.series import HourlySeries, hourly_range

finite = st.floats(-1e6, 1e6, allow_nan=False)


def test_tail_count_guards_float_drift():
    assert tail_count(20, 0.05) == 1
    assert tail_count(300, 0.05) == 15  # 0.05 * 300 == 15.000000000000002
    assert tail_count(21, 0.05) == 2


def test_cvar_small_example():
    assert cvar_upper(np.arange(1, 21)) == 20.0
    assert cvar_upper(np.arange(1, 41)) == 39.5
    assert cvar_upper(np.full(50, 3.25)) == 3.25


def test_cvar_standard_normal():
    x = np.random.default_rng(7).standard_normal(100_000)
    analytic = stats.norm.pdf(stats.norm.ppf(0.95)) / 0.05
    assert analytic == pytest.approx(2.0627, abs=1e-4)
    assert abs(cvar_upper(x) - analytic) < 0.05


def test_cvar_input_checks():
    with pytest.raises(InputError):
        cvar_upper(np.arange(19))
    with pytest.raises(InputError):
        cvar_upper(np.arange(100), alpha=0.0)


@settings(max_examples=50, deadline=None)
@given(st.lists(finite, min_size=20, max_size=80), finite, st.floats(0.01, 100))
def test_cvar_translation_homogeneity_and_order(xs, shift, scale):
    x = np.array(xs)
    c = cvar_upper(x)
    tol = 1e-9 * (1 + np.abs(x).max() + abs(shift)) * (1 + scale)
    assert abs(cvar_upper(x + shift) - (c + shift)) <= tol
    assert abs(cvar_upper(scale * x) - scale * c) <= tol
    assert c >= np.quantile(x, 0.95, method="lower") - tol
    assert c >= x.mean() - tol
    assert cvar_upper(x[::-1]) == c


def test_cvar_columns_matches_loop():
    x = np.random.default_rng(0).normal(size=(45, 7))
    assert np.allclose(cvar_upper_columns(x), [cvar_upper(x[:, j]) for j in range(7)], rtol=0, atol=1e-12)


def test_silverman_rule():
    x = np.random.default_rng(1).normal(size=400)
    assert silverman_bandwidth(x) == pytest.approx(1.06 * x.std(ddof=1) * 400 ** -0.2)


def test_kde_normalises_and_peaks_at_normal_density():
    x = np.random.default_rng(2).standard_normal(20_000)
    d = kde_density(x)
    assert d.grid.size == 512
    assert 0.99 <= d.integral() <= 1.01
    at0 = kde_density(x, grid=[0.0]).density[0]
    assert abs(at0 - stats.norm.pdf(0)) / stats.norm.pdf(0) < 0.05


def test_kde_matches_scipy():
    x = np.random.default_rng(3).gamma(2.0, size=300)
    d = kde_density(x)
    ref = stats.gaussian_kde(x, bw_method=d.bandwidth / x.std(ddof=1))
    assert np.allclose(d.density, ref(d.grid), rtol=1e-9, atol=1e-12)


def test_kde_symmetric_for_symmetric_sample():
    half = np.random.default_rng(4).uniform(0.1, 3, 100)
    x = np.concatenate([half, -half])
    d = kde_density(x)
    assert np.allclose(d.density, d.density[::-1], rtol=1e-9)


def test_kde_rejects_degenerate():
    with pytest.raises(DomainError):
        kde_density([1.0, 1.0, 1.0])
    with pytest.raises(DomainError):
        kde_density([1.0])
    with pytest.raises(DomainError):
        kde_density([1.0, 2.0], bandwidth=0)


def test_duration_curve_example():
    c = load_duration([3.0, 1.0, 2.0])
    assert c.values.tolist() == [3.0, 2.0, 1.0]
    assert c.hours.tolist() == [1, 2, 3]
    assert c.exceedance[-1] == 1.0


@settings(max_examples=50, deadline=None)
@given(st.lists(finite, min_size=1, max_size=200))
def test_duration_curve_properties(xs):
    v = load_duration(xs).values
    assert np.all(np.diff(v) <= 0)
    assert sorted(v.tolist()) == sorted(xs)


def test_duration_curve_accepts_series():
    grid = hourly_range("2040-01-01T00", "2040-01-01T05")
    c = load_duration(HourlySeries(grid, np.array([1.0, 5, 2, 4, 3])))
    assert c.values.tolist() == [5, 4, 3, 2, 1]


def test_representative_curves():
    rng = np.random.default_rng(5)
    curves = [load_duration(rng.normal(100, 10, 50)) for _ in range(40)]
    mean, tail = representative_duration_curves(curves)
    stack = np.vstack([c.values for c in curves])
    assert np.allclose(mean.values, stack.mean(axis=0))
    assert np.all(np.diff(mean.values) <= 0)
    assert np.all(tail.values >= mean.values)
    assert np.allclose(tail.values, np.sort(stack, axis=0)[-2:].mean(axis=0))
    with pytest.raises(InputError):
        representative_duration_curves(curves[:5])


def test_scenario_statistics():
    x = np.random.default_rng(6).normal(50, 4, 64)
    s = scenario_statistics(x, "total_twh")
    assert s.mean == pytest.approx(x.mean())
    assert s.std_dev == pytest.approx(x.std(ddof=1))
    assert s.cvar_upper_5pct == pytest.approx(np.sort(x)[-4:].mean())
    assert s.n_scenarios == 64
    assert scenario_statistics(x[::-1], "total_twh") == s
    assert s.as_dict()["metric"] == "total_twh"


def test_scenario_statistics_identical_values():
    s = scenario_statistics(np.full(30, 0.1))
    assert (s.mean, s.std_dev, s.cvar_upper_5pct) == (0.1, 0.0, 0.1)


def test_scenario_statistics_needs_twenty():
    with pytest.raises(InputError):
        scenario_statistics(np.arange(19.0))


def test_annual_metrics_units():
    grid = hourly_range("2040-01-01T00", "2040-01-01T03")
    cons = HourlySeries(grid, np.array([1000.0, 3000.0, 2000.0]))
    res = HourlySeries(grid, np.array([-500.0, 2500.0, 100.0]))
    m = annual_metrics(cons, res)
    assert m == {"total_twh": 0.006, "peak_consumption_gwh": 3.0, "peak_residual_gwh": 2.5}
