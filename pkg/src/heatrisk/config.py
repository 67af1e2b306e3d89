"""Run configuration: YAML file to a validated :class:`RunConfig`."""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .exceptions import ConfigError
from .scenario import NORDIC_2012_INVENTORY, REPLACEMENT_FACTOR, HeatingInventory
from .simulate import NORDIC_2040_CAPACITY, VreCapacity
from .weathergen import DEFAULT_SHIFTS

DATA_DIR_ENV = "HEATRISK_DATA_DIR"
INPUT_KINDS = ("consumption", "weather", "macro", "holidays")
# Keys that never change results; left out of the config hash.
UNHASHED_KEYS = ("output_dir", "jobs")


@dataclass
class RunConfig:
    countries: list
    inputs: dict
    capacity_factors: Path
    inventory: dict
    vre_capacity: dict
    shares: list = field(default_factory=lambda: [0.0, 0.5, 1.0])
    shifts: list = field(default_factory=lambda: list(DEFAULT_SHIFTS))
    n_scenarios: int | None = None
    target_year: int = 2040
    train_fraction: float = 0.75
    replacement_factor: float = REPLACEMENT_FACTOR
    output_dir: Path = Path("out")
    jobs: int = 1
    seed: int = 0
    hourly_outputs: bool = False
    plots: bool = False
    raw: dict = field(default_factory=dict, repr=False)

    def hash(self) -> str:
        doc = {k: v for k, v in self.raw.items() if k not in UNHASHED_KEYS}
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.sha256(blob.encode()).hexdigest()

    def input_files(self):
        files = {"capacity_factors": self.capacity_factors}
        for c in self.countries:
            for kind in INPUT_KINDS:
                files[f"{c}/{kind}"] = self.inputs[c][kind]
        return files


def _base_dir(raw, config_path):
    if raw.get("data_dir") is not None:
        base = Path(str(raw["data_dir"]))
        if not base.is_absolute() and config_path is not None:
            base = Path(config_path).parent / base
        return base
    if os.environ.get(DATA_DIR_ENV):
        return Path(os.environ[DATA_DIR_ENV])
    return Path(config_path).parent if config_path is not None else Path.cwd()


def _path(base, value, what):
    if value is None:
        raise ConfigError(f"missing path for {what}")
    p = Path(str(value))
    p = p if p.is_absolute() else base / p
    if not p.is_file():
        raise ConfigError(f"{what}: file not found: {p}")
    return p


def _share_list(shares):
    try:
        out = [float(s) for s in shares]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"shares must be numbers: {exc}") from exc
    if not out:
        raise ConfigError("at least one electrification share is required")
    bad = [s for s in out if not 0.0 <= s <= 1.0]
    if bad:
        raise ConfigError(f"shares must lie in [0, 1], got {bad}")
    return sorted(set(out))


def config_from_dict(raw: dict, config_path=None, **overrides) -> RunConfig:
    """Validate a parsed config mapping. ``overrides`` replace top-level keys."""
    raw = dict(raw or {})
    for key, value in overrides.items():
        if value is not None:
            raw[key] = value
    base = _base_dir(raw, config_path)

    countries = [str(c) for c in raw.get("countries") or []]
    if not countries:
        raise ConfigError("country list is empty")
    inputs_raw = raw.get("inputs") or {}
    inputs = {}
    for c in countries:
        entry = inputs_raw.get(c)
        if not isinstance(entry, dict):
            raise ConfigError(f"no input files configured for {c}")
        inputs[c] = {kind: _path(base, entry.get(kind), f"{c} {kind}") for kind in INPUT_KINDS}

    inventory = {}
    inv_raw = raw.get("inventory") or {}
    for c in countries:
        if c in inv_raw:
            try:
                inventory[c] = HeatingInventory(country=c, **{k: float(v) for k, v in inv_raw[c].items()})
            except TypeError as exc:
                raise ConfigError(f"inventory for {c}: {exc}") from exc
        elif c in NORDIC_2012_INVENTORY:
            inventory[c] = NORDIC_2012_INVENTORY[c]
        else:
            raise ConfigError(f"no heating inventory for {c}")

    capacity = {}
    cap_raw = raw.get("vre_capacity_gw") or {}
    for c in countries:
        if c in cap_raw:
            capacity[c] = VreCapacity(float(cap_raw[c].get("wind", 0.0)), float(cap_raw[c].get("solar", 0.0)))
        elif c in NORDIC_2040_CAPACITY:
            capacity[c] = NORDIC_2040_CAPACITY[c]
        else:
            raise ConfigError(f"no VRE capacity for {c}")

    try:
        jobs = int(raw.get("jobs", 1))
        n_scen = raw.get("n_scenarios")
        cfg = RunConfig(
            countries=countries,
            inputs=inputs,
            capacity_factors=_path(base, raw.get("capacity_factors"), "capacity_factors"),
            inventory=inventory,
            vre_capacity=capacity,
            shares=_share_list(raw.get("shares", [0.0, 0.5, 1.0])),
            shifts=sorted({int(s) for s in raw.get("shifts", DEFAULT_SHIFTS)}),
            n_scenarios=None if n_scen is None else int(n_scen),
            target_year=int(raw.get("target_year", 2040)),
            train_fraction=float(raw.get("train_fraction", 0.75)),
            replacement_factor=float(raw.get("replacement_factor", REPLACEMENT_FACTOR)),
            output_dir=Path(str(raw.get("output_dir", "out"))),
            jobs=max(1, jobs),
            seed=int(raw.get("seed", 0)),
            hourly_outputs=bool(raw.get("hourly_outputs", False)),
            plots=bool(raw.get("plots", False)),
            raw=raw,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config value: {exc}") from exc
    if not 0.0 < cfg.train_fraction <= 1.0:
        raise ConfigError("train_fraction must lie in (0, 1]")
    if not cfg.output_dir.is_absolute() and config_path is not None and overrides.get("output_dir") is None:
        cfg.output_dir = Path(config_path).parent / cfg.output_dir
    return cfg


def load_config(path, **overrides) -> RunConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML ({exc})") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a mapping at top level")
    return config_from_dict(raw, config_path=path, **overrides)
