"""End-to-end run: calibrate, electrify, simulate weather years, report risk."""
from __future__ import annotations

import hashlib
import json
import logging
import shutil
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .calibrate import (
    CalibratedModel,
    accuracy,
    effect_sizes,
    fit_ols,
    predict,
    split_train_valid,
)
from .config import RunConfig
from .exceptions import AlignmentError, HeatRiskError
from .features import StationTemperature, build_design_matrix
from .risk import (
    METRICS,
    annual_metrics,
    kde_density,
    load_duration,
    representative_duration_curves,
    scenario_statistics,
)
from .scenario import apply_electrification, build_scenario, scenario_table, share_label
from .series import HourlySeries
from .simulate import NORDIC, CountryDrivers, simulate_scenario
from .weathergen import WeatherArchive, select_scenarios, shifted_date_scenarios

log = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
CVAR_CONVENTION = "upper tail: mean of the ceil(0.05 n) largest scenario values"


class StageError(HeatRiskError):
    """A pipeline stage failed; carries the stage name and the cause's exit code."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 1)
        super().__init__(f"[{stage}] {cause}")


@dataclass
class CountryData:
    country: str
    consumption: HourlySeries
    stations: list
    gdp: HourlySeries
    pop: HourlySeries
    holidays: np.ndarray


@dataclass
class RunManifest:
    config_hash: str
    input_checksums: dict
    model_hashes: dict
    spec_hashes: dict
    scenario_count: int
    scenario_ids: list
    outputs: dict
    timestamps: dict
    conventions: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "RunManifest":
        return cls(**doc)

    def to_json(self) -> str:
        return io.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        return cls.from_dict(json.loads(text))

    def verify(self, root) -> list:
        """Relative paths whose current checksum differs from the recorded one."""
        root = Path(root)
        return [rel for rel, digest in sorted(self.outputs.items())
                if not (root / rel).is_file() or sha256_file(root / rel) != digest]


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# --- loading -----------------------------------------------------------------

def load_country(cfg: RunConfig, country: str) -> CountryData:
    files = cfg.inputs[country]
    gdp, pop = io.load_macro(files["macro"])
    return CountryData(
        country=country,
        consumption=io.load_consumption_csv(files["consumption"]),
        stations=io.load_weather_csv(files["weather"]),
        gdp=gdp,
        pop=pop,
        holidays=io.load_holidays(files["holidays"]),
    )


def build_archive(data: dict, cf_path) -> WeatherArchive:
    """Intersect every country's temperature grid with the capacity-factor grid."""
    cfs = io.load_capacity_factors_csv(cf_path)
    starts, ends = [], []
    for c, d in data.items():
        if c not in cfs:
            raise AlignmentError(f"no capacity factors for {c}")
        ts = d.stations[0].series.timestamps
        starts += [ts[0], cfs[c][0].timestamps[0]]
        ends += [ts[-1], cfs[c][0].timestamps[-1]]
    start, end = max(starts), min(ends)
    if end < start:
        raise AlignmentError("temperature and capacity-factor archives do not overlap")
    grid = np.arange(start, end + np.timedelta64(1, "h"), np.timedelta64(1, "h"))
    temps, stations, wind, solar = {}, {}, {}, {}
    for c, d in data.items():
        temps[c] = np.column_stack([s.series.reindex(grid).values for s in d.stations])
        stations[c] = tuple(s.station_id for s in d.stations)
        wind[c] = cfs[c][0].reindex(grid).values
        solar[c] = cfs[c][1].reindex(grid).values
    return WeatherArchive(grid, temps, stations, wind, solar)


# --- calibration ---------------------------------------------------------------

def calibration_data(d: CountryData):
    """Design matrix and log consumption over the hours all inputs cover."""
    st = d.stations[0].series.timestamps
    ct = d.consumption.timestamps
    start = max(st[0], ct[0], d.gdp.timestamps[0])
    end = min(st[-1], ct[-1], d.gdp.timestamps[-1])
    if end < start:
        raise AlignmentError(f"{d.country}: consumption, weather and macro data do not overlap")
    grid = np.arange(start, end + np.timedelta64(1, "h"), np.timedelta64(1, "h"))
    stations = [StationTemperature(s.station_id, s.series.reindex(grid)) for s in d.stations]
    X = build_design_matrix(stations, d.gdp.reindex(grid), d.pop.reindex(grid), d.holidays)
    y = d.consumption.reindex(grid)
    return X, y


def calibrate_country(d: CountryData, train_fraction: float = 0.75):
    """Train/validation accuracy, then the full-sample model and its effect sizes."""
    X, y = calibration_data(d)
    ln_y = np.log(y.values)
    X_tr, X_va, y_tr, y_va = split_train_valid(X, ln_y, fraction=train_fraction)
    rows = []
    train_model = fit_ols(X_tr, y_tr, country=d.country)
    rows.append(("train", accuracy(predict(train_model, X_tr), np.exp(y_tr))))
    if len(y_va):
        rows.append(("valid", accuracy(predict(train_model, X_va), np.exp(y_va))))
    model = fit_ols(X, ln_y, country=d.country)
    model.trend_origin = X.timestamps[0]
    model.meta = {
        "stations": [s.station_id for s in d.stations],
        "sample_start": io.format_timestamps([X.timestamps[0]])[0],
        "sample_end": io.format_timestamps([X.timestamps[-1]])[0],
    }
    rows.append(("full", accuracy(predict(model, X), y)))
    effects = effect_sizes(model, X, ln_y)
    return model, rows, effects


# --- simulation worker -----------------------------------------------------------

_WORKER = {}


def _init_worker(state):
    _WORKER.clear()
    _WORKER.update(state)


def _simulate_one(scenario_key):
    """All shares for one weather year: metrics, duration curves, optional hourly data."""
    year, shift = scenario_key
    st = _WORKER
    weather = next(s for s in st["scenarios"] if (s.source_year, s.shift_days) == (year, shift))
    out = {"scenario_id": weather.scenario_id, "metrics": {}, "curves": {}, "hourly": {}}
    for share in st["shares"]:
        label = share_label(share)
        results = simulate_scenario(weather, st["models"][label], st["drivers"], st["capacities"])
        for r in results:
            out["metrics"][(label, r.area)] = annual_metrics(r.consumption, r.residual)
            out["curves"][(label, r.area)] = load_duration(r.consumption).values
        if st["hourly"]:
            cols = {}
            for r in results:
                for name in ("consumption", "wind", "solar", "residual"):
                    cols[f"{r.area}_{name}_mwh"] = getattr(r, name).values
            out["hourly"][label] = (results[0].timestamps, cols)
    return out


# --- orchestration ---------------------------------------------------------------

class _Writer:
    """Single writer into a staging directory; tracks files for the manifest."""

    def __init__(self, root: Path):
        self.root = root
        self.files = []

    def path(self, rel) -> Path:
        self.files.append(rel)
        p = self.root / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def text(self, rel, text):
        self.path(rel).write_text(text, encoding="utf-8")

    def rows(self, rel, header, rows):
        io.write_rows(self.path(rel), header, rows)


def _stage(name):
    def wrap(fn):
        def inner(*a, **k):
            try:
                return fn(*a, **k)
            except StageError:
                raise
            except (HeatRiskError, ValueError, ArithmeticError, OSError) as exc:
                raise StageError(name, exc) from exc
        return inner
    return wrap


@_stage("load")
def _load(cfg):
    data = {c: load_country(cfg, c) for c in cfg.countries}
    archive = build_archive(data, cfg.capacity_factors)
    return data, archive


@_stage("calibrate")
def _calibrate(cfg, data, w):
    models = {}
    acc_rows, eff_rows = [], []
    for c in cfg.countries:
        model, acc, eff = calibrate_country(data[c], cfg.train_fraction)
        models[c] = model
        w.text(f"models/{c}.json", io.dumps(io.model_to_dict(model)))
        for sample, m in acc:
            acc_rows.append([c, sample, m.rmse, m.mae, m.mape, m.smape])
        for group, f2 in eff.items():
            eff_rows.append([c, group, f2])
    w.rows("tables/accuracy.csv", ["country", "sample", "rmse_mwh", "mae_mwh", "mape_pct", "smape_pct"], acc_rows)
    w.rows("tables/effects.csv", ["country", "group", "cohens_f2"], eff_rows)
    return models


@_stage("scenario")
def _scenarios(cfg, models, w):
    table = scenario_table([cfg.inventory[c] for c in cfg.countries],
                           [s for s in cfg.shares if s > 0], cfg.replacement_factor)
    if table:
        header = list(table[0])
        w.rows("tables/scenario_table.csv", header, ([r[h] for h in header] for r in table))
    electrified, spec_hashes = {}, {}
    for share in cfg.shares:
        label = share_label(share)
        electrified[label] = {}
        for c in cfg.countries:
            spec = build_scenario(cfg.inventory[c], share, cfg.replacement_factor)
            electrified[label][c] = apply_electrification(models[c], spec)
            spec_hashes[f"{label}/{c}"] = sha256_text(io.dumps(asdict(spec)))
    return electrified, spec_hashes


@_stage("simulate")
def _simulate(cfg, data, archive, electrified, w):
    scenarios = select_scenarios(
        shifted_date_scenarios(archive, cfg.target_year, cfg.shifts), cfg.n_scenarios
    )
    drivers = {c: CountryDrivers(data[c].gdp, data[c].pop, data[c].holidays) for c in cfg.countries}
    state = {
        "scenarios": scenarios,
        "shares": cfg.shares,
        "models": electrified,
        "drivers": drivers,
        "capacities": cfg.vre_capacity,
        "hourly": cfg.hourly_outputs,
    }
    keys = [(s.source_year, s.shift_days) for s in scenarios]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs, initializer=_init_worker, initargs=(state,)) as ex:
            outputs = list(ex.map(_simulate_one, keys))
    else:
        _init_worker(state)
        outputs = [_simulate_one(k) for k in keys]
    if cfg.hourly_outputs:
        for o in outputs:
            for label, (ts, cols) in o["hourly"].items():
                io.write_columns_csv(w.path(f"simulations/{label}/{o['scenario_id']}.csv"), ts, cols)
    return scenarios, outputs


@_stage("report")
def _report(cfg, outputs, w):
    areas = list(cfg.countries) + [NORDIC]
    labels = [share_label(s) for s in cfg.shares]
    metric_rows = []
    for o in outputs:
        for label in labels:
            for area in areas:
                m = o["metrics"][(label, area)]
                metric_rows.append([o["scenario_id"], label, area] + [m[k] for k in METRICS])
    w.rows("risk/metrics.csv", ["scenario_id", "scenario", "area"] + list(METRICS), metric_rows)
    summary = write_risk_reports(metric_rows, w, plots=cfg.plots)
    for label in labels:
        for area in areas:
            curves = [o["curves"][(label, area)] for o in outputs]
            mean, tail = representative_duration_curves(curves)
            w.rows(f"risk/duration/{area}_{label}.csv", ["hours", "mean_mwh", "one_in_twenty_mwh"],
                   zip(range(1, mean.values.size + 1), mean.values, tail.values))
    if cfg.plots:
        plot_duration_curves(w, areas, labels)
    return summary


def write_risk_reports(metric_rows, w, plots=False):
    """Summary table (CSV and JSON) and density curves from per-scenario metrics."""
    groups = {}
    for sid, label, area, *vals in metric_rows:
        for metric, v in zip(METRICS, vals):
            groups.setdefault((area, label, metric), []).append(float(v))
    rows, doc = [], []
    for (area, label, metric), vals in groups.items():
        s = scenario_statistics(vals, metric)
        rows.append([area, label, metric, s.mean, s.std_dev, s.cvar_upper_5pct, s.n_scenarios])
        doc.append({"area": area, "scenario": label, **s.as_dict()})
        if np.ptp(vals) > 0:
            dens = kde_density(vals)
            w.rows(f"risk/density/{metric}_{area}_{label}.csv", [metric, "density"], zip(dens.grid, dens.density))
    w.rows("risk/summary.csv",
           ["area", "scenario", "metric", "mean", "std_dev", "cvar_upper_5pct", "n_scenarios"], rows)
    w.text("risk/summary.json", io.dumps({"cvar_convention": CVAR_CONVENTION, "summaries": doc}))
    if plots:
        plot_densities(w, groups)
    return rows


def _svg_figure():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "heatrisk"
    return plt


def plot_densities(w, groups):
    plt = _svg_figure()
    for area, metric in sorted({(a, m) for a, _, m in groups}):
        fig, ax = plt.subplots(figsize=(6, 4))
        for (a, label, m), vals in groups.items():
            if (a, m) == (area, metric) and np.ptp(vals) > 0:
                d = kde_density(vals)
                ax.plot(d.grid, d.density, label=label)
        ax.set_xlabel(metric)
        ax.set_ylabel("density")
        ax.set_title(area)
        ax.legend()
        fig.savefig(w.path(f"risk/plots/density_{metric}_{area}.svg"), format="svg", metadata={"Date": None})
        plt.close(fig)


def plot_duration_curves(w, areas, labels):
    plt = _svg_figure()
    for area in areas:
        fig, ax = plt.subplots(figsize=(6, 4))
        for label in labels:
            path = w.root / f"risk/duration/{area}_{label}.csv"
            arr = np.loadtxt(path, delimiter=",", skiprows=1)
            ax.plot(arr[:, 0], arr[:, 1] / 1e3, label=f"{label} mean")
            ax.plot(arr[:, 0], arr[:, 2] / 1e3, "--", label=f"{label} 1/20")
        ax.set_xlabel("hours at or above")
        ax.set_ylabel("GWh/h")
        ax.set_title(area)
        ax.legend()
        fig.savefig(w.path(f"risk/plots/duration_{area}.svg"), format="svg", metadata={"Date": None})
        plt.close(fig)


def _publish(staging: Path, out: Path, files):
    out.mkdir(parents=True, exist_ok=True)
    for rel in files:
        dst = out / rel
        dst.parent.mkdir(parents=True, exist_ok=True)
        shutil.move(str(staging / rel), str(dst))


def run_pipeline(cfg: RunConfig) -> RunManifest:
    """Execute every stage and publish outputs plus ``manifest.json``.

    Outputs are staged next to ``cfg.output_dir`` and only moved into place
    once every stage has succeeded; a failure leaves no partial files.
    """
    out = Path(cfg.output_dir)
    staging = out.parent / f".{out.name}.partial"
    if staging.exists():
        shutil.rmtree(staging)
    staging.mkdir(parents=True)
    w = _Writer(staging)
    try:
        data, archive = _load(cfg)
        models = _calibrate(cfg, data, w)
        electrified, spec_hashes = _scenarios(cfg, models, w)
        scenarios, outputs = _simulate(cfg, data, archive, electrified, w)
        _report(cfg, outputs, w)
        manifest = RunManifest(
            config_hash=cfg.hash(),
            input_checksums={k: sha256_file(p) for k, p in sorted(cfg.input_files().items())},
            model_hashes={c: sha256_file(staging / f"models/{c}.json") for c in cfg.countries},
            spec_hashes=spec_hashes,
            scenario_count=len(scenarios),
            scenario_ids=[s.scenario_id for s in scenarios],
            outputs={rel: sha256_file(staging / rel) for rel in sorted(w.files)},
            timestamps={
                "archive_start": io.format_timestamps([archive.start])[0],
                "archive_end": io.format_timestamps([archive.end])[0],
                "target_year": cfg.target_year,
            },
            conventions={"cvar": CVAR_CONVENTION, "units": "MWh per hour; totals TWh; peaks GWh"},
        )
        w.text(MANIFEST_NAME, manifest.to_json())
        _publish(staging, out, w.files)
    finally:
        shutil.rmtree(staging, ignore_errors=True)
    return manifest
