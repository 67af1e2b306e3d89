import time

import numpy as np
import pytest

from heatrisk.config import load_config
from heatrisk.features import StationTemperature, build_design_matrix
from heatrisk.fixture import generate_fixture
from heatrisk.pipeline import run_pipeline
from heatrisk.series import HourlySeries, hourly_range


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("bundle")
    generate_fixture(d)
    return d


@pytest.fixture(scope="session")
def fixture_run(fixture_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("run") / "out"
    cfg = load_config(fixture_dir / "config.yaml", output_dir=str(out))
    t0 = time.perf_counter()
    manifest = run_pipeline(cfg)
    return cfg, manifest, out, time.perf_counter() - t0


HOLIDAYS = ["2013-01-01", "2013-03-29", "2013-05-17", "2013-12-25", "2014-01-01", "2014-04-18"]


def synthetic_design(n_hours=9000, start="2013-01-01T00", seed=0, holidays=HOLIDAYS):
    """A full-schema design matrix built from random temperatures and growing drivers.

    The default length spans every month, so all dummy columns are populated.
    """
    rng = np.random.default_rng(seed)
    grid = hourly_range(start, np.datetime64(start, "h") + np.timedelta64(n_hours, "h"))
    t = np.arange(n_hours)
    stations = [
        StationTemperature(str(i), HourlySeries(grid, 12 + 10 * np.sin(t / 500 + i) + rng.normal(0, 5, n_hours)))
        for i in range(5)
    ]
    gdp = HourlySeries(grid, 1e5 * np.exp(2e-5 * t + 1e-3 * np.sin(t / 300)))
    pop = HourlySeries(grid, 5e6 * (1 + 1e-6 * t + 1e-4 * np.cos(t / 700)))
    return build_design_matrix(stations, gdp, pop, holidays)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
