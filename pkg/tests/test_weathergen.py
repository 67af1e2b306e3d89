import calendar
from datetime import datetime, timedelta

import numpy as np
import pytest

from heatrisk.exceptions import ConfigError, DataError, InputError
from heatrisk.series import HourlySeries, hourly_range, year_hours
from heatrisk.weathergen import (
    WeatherArchive,
    calendar_source_hours,
    map_to_target_calendar,
    select_scenarios,
    shifted_date_scenarios,
)


def make_archive(first=2011, last=2013, seed=0, countries=("A", "B")):
    grid = hourly_range(f"{first}-01-01T00", f"{last + 1}-01-01T00")
    rng = np.random.default_rng(seed)
    temps = {c: rng.normal(5, 8, (grid.size, 5)) for c in countries}
    wind = {c: rng.uniform(0, 1, grid.size) for c in countries}
    solar = {c: rng.uniform(0, 1, grid.size) for c in countries}
    stations = {c: tuple(f"{c}{i}" for i in range(5)) for c in countries}
    return WeatherArchive(grid, temps, stations, wind, solar)


def oracle_source(target_year, source_year, shift):
    """Source datetime for every target hour, via plain datetime arithmetic."""
    out = []
    t = datetime(target_year, 1, 1)
    while t.year == target_year:
        if t.month == 2 and t.day == 29 and not calendar.isleap(source_year):
            s = datetime(source_year, 2, 28, t.hour)
        else:
            s = t.replace(year=source_year)
        out.append(s - timedelta(days=shift))
        t += timedelta(hours=1)
        if (t.month, t.day) == (2, 29) and calendar.isleap(source_year) and not calendar.isleap(target_year):
            pass
    if calendar.isleap(source_year) and not calendar.isleap(target_year):
        pass  # target simply has no Feb 29 row
    return out


def test_calendar_mapping_matches_datetime_oracle():
    for src, tgt in [(2011, 2039), (2012, 2039), (2011, 2040), (2012, 2040)]:
        got = calendar_source_hours(src, tgt)
        want = np.array(oracle_source(tgt, src, 0), dtype="datetime64[h]")
        assert np.array_equal(got, want), (src, tgt)


def test_map_identity_non_leap():
    s = HourlySeries(year_hours(2011), np.arange(8760.0))
    m = map_to_target_calendar(s, 2039)
    assert np.array_equal(m.values, s.values)
    assert m.timestamps[0] == np.datetime64("2039-01-01T00")


def test_map_leap_to_non_leap_drops_feb29():
    s = HourlySeries(year_hours(2012), np.arange(8784.0))
    m = map_to_target_calendar(s, 2039)
    assert len(m) == 8760
    feb29 = np.arange(59 * 24, 60 * 24)
    assert not np.isin(feb29.astype(float), m.values).any()


def test_map_non_leap_to_leap_repeats_feb28():
    s = HourlySeries(year_hours(2011), np.arange(8760.0))
    m = map_to_target_calendar(s, 2040)
    assert len(m) == 8784
    feb28 = m.values[58 * 24: 59 * 24]
    feb29 = m.values[59 * 24: 60 * 24]
    assert np.array_equal(feb28, feb29)
    assert np.array_equal(m.values[60 * 24:], s.values[59 * 24:])


def test_map_requires_full_year():
    with pytest.raises(InputError):
        map_to_target_calendar(HourlySeries(hourly_range("2011-01-01T00", "2011-02-01T00"), np.zeros(744)), 2040)


def test_shift_zero_and_plus_one():
    arc = make_archive()
    scen = {(s.source_year, s.shift_days): s for s in shifted_date_scenarios(arc, 2039, [-1, 0, 1])}
    s0 = scen[(2012, 0)]
    expected = arc.temperatures["A"][arc.index_of(calendar_source_hours(2012, 2039))]
    assert np.array_equal(s0.temperature_matrix("A"), expected)
    s1 = scen[(2012, 1)]
    assert np.array_equal(s1.source_timestamps, s0.source_timestamps - np.timedelta64(24, "h"))
    assert np.array_equal(s1.wind_cf("B").values,
                          arc.wind_cf["B"][arc.index_of(s0.source_timestamps - np.timedelta64(24, "h"))])


def test_feasible_count_matches_enumeration():
    arc = make_archive()
    shifts = list(range(-4, 5))
    got = shifted_date_scenarios(arc, 2040, shifts)
    lo, hi = datetime(2011, 1, 1), datetime(2013, 12, 31, 23)
    expected = [(y, k) for y in (2011, 2012, 2013) for k in shifts
                if all(lo <= t <= hi for t in oracle_source(2040, y, k))]
    assert [(s.source_year, s.shift_days) for s in got] == expected
    assert len(expected) == 3 * 9 - 8


def test_bit_exact_traceability_exhaustive():
    arc = make_archive(countries=("A",))
    lookup = {}
    ts_list = arc.timestamps.astype(datetime)
    for i, t in enumerate(ts_list):
        lookup[t] = i
    for s in shifted_date_scenarios(arc, 2040, [-2, 0, 3]):
        idx = [lookup[t] for t in oracle_source(2040, s.source_year, s.shift_days)]
        temps = s.temperature_matrix("A")
        assert temps.tobytes() == arc.temperatures["A"][idx].tobytes()
        assert s.wind_cf("A").values.tobytes() == arc.wind_cf["A"][idx].tobytes()
        assert s.solar_cf("A").values.tobytes() == arc.solar_cf["A"][idx].tobytes()
        assert len(s.timestamps) == 8784


def test_scenarios_unique_and_deterministic():
    arc = make_archive()
    a = shifted_date_scenarios(arc, 2040, [3, -3, 0, 0])
    b = shifted_date_scenarios(arc, 2040, [0, 3, -3])
    keys = [(s.source_year, s.shift_days) for s in a]
    assert len(keys) == len(set(keys))
    assert keys == [(s.source_year, s.shift_days) for s in b]
    assert len({s.scenario_id for s in a}) == len(a)


def test_no_feasible_pairs():
    arc = make_archive(2011, 2011)
    with pytest.raises(ConfigError):
        shifted_date_scenarios(arc, 2040, [5])


def test_partial_year_archive_rejected():
    grid = hourly_range("2011-03-01T00", "2011-06-01T00")
    z = np.zeros(grid.size)
    arc = WeatherArchive(grid, {"A": np.zeros((grid.size, 5))}, {"A": ()}, {"A": z}, {"A": z})
    with pytest.raises(InputError):
        shifted_date_scenarios(arc, 2040)


def test_archive_validates_capacity_factors():
    grid = hourly_range("2011-01-01T00", "2011-01-02T00")
    with pytest.raises(DataError):
        WeatherArchive(grid, {"A": np.zeros((24, 5))}, {"A": ()}, {"A": np.full(24, 1.2)}, {"A": np.zeros(24)})


def test_select_scenarios():
    arc = make_archive()
    all_ = shifted_date_scenarios(arc, 2040, range(-4, 5))
    picked = select_scenarios(all_, 5)
    assert len(picked) == 5
    assert {s.shift_days for s in picked} <= {-1, 0, 1}
    with pytest.raises(ConfigError, match="only 19"):
        select_scenarios(all_, 300)
