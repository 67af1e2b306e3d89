"""Heating-electrification scenarios as modifications of a calibrated model."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .calibrate import CalibratedModel
from .exceptions import ContractError, DomainError, InputError
from .features import HDH_COLUMNS, FeatureMatrix
from .series import HourlySeries

# Electricity per unit of temperature-sensitive fossil heat displaced.
REPLACEMENT_FACTOR = 0.475
HOURS_PER_YEAR = 8760
MWH_PER_TWH = 1e6

SHARE_LABELS = {0.0: "BAU", 0.5: "HALF", 1.0: "FULL"}


@dataclass(frozen=True)
class HeatingInventory:
    """Annual heating energy by carrier for one country, TWh/yr."""

    country: str
    fossil_space_water: float
    fossil_district: float
    direct_electric_sw: float
    fossil_process: float

    def __post_init__(self):
        for name in ("fossil_space_water", "fossil_district", "direct_electric_sw", "fossil_process"):
            if getattr(self, name) < 0:
                raise InputError(f"{self.country}: {name} must be non-negative")

    @property
    def temperature_sensitive_fossil(self) -> float:
        return self.fossil_space_water + self.fossil_district


# 2012 heating inventory for the Nordic countries (TWh/yr).
NORDIC_2012_INVENTORY = {
    "NO": HeatingInventory("NO", 9.7, 0.9, 29.0, 17.6),
    "SE": HeatingInventory("SE", 11.0, 0.0, 21.5, 25.4),
    "DK": HeatingInventory("DK", 16.9, 18.1, 2.7, 11.9),
    "FI": HeatingInventory("FI", 17.9, 36.4, 20.0, 24.9),
}


@dataclass(frozen=True)
class ScenarioSpec:
    country: str
    share: float
    hdh_multiplier: float
    baseload_twh: float

    def __post_init__(self):
        if self.hdh_multiplier < 1.0 or self.baseload_twh < 0.0:
            raise InputError("electrification cannot reduce heating sensitivity or baseload")

    @property
    def label(self) -> str:
        return share_label(self.share)

    @property
    def baseload_mwh_per_hour(self) -> float:
        return self.baseload_twh * MWH_PER_TWH / HOURS_PER_YEAR


def share_label(share: float) -> str:
    return SHARE_LABELS.get(float(share), f"S{round(float(share) * 100):03d}")


def replacement_electricity(inventory: HeatingInventory, factor: float = REPLACEMENT_FACTOR) -> float:
    """Electricity (TWh/yr) needed to displace temperature-sensitive fossil heat."""
    return factor * inventory.temperature_sensitive_fossil


def implied_sensitivity_increase(replacement: float, direct_electric_sw: float) -> float:
    """Replacement electricity relative to existing direct electric space/water heat."""
    if direct_electric_sw <= 0:
        raise DomainError("no direct electric heating: sensitivity increase is undefined")
    return replacement / direct_electric_sw


def build_scenario(inventory: HeatingInventory, share: float,
                   factor: float = REPLACEMENT_FACTOR) -> ScenarioSpec:
    if not 0.0 <= share <= 1.0:
        raise InputError(f"electrification share must lie in [0, 1], got {share}")
    increase = implied_sensitivity_increase(
        replacement_electricity(inventory, factor), inventory.direct_electric_sw
    )
    return ScenarioSpec(
        country=inventory.country,
        share=float(share),
        hdh_multiplier=1.0 + share * increase,
        baseload_twh=share * inventory.fossil_process,
    )


def scenario_table(inventories, shares=(0.5, 1.0), factor: float = REPLACEMENT_FACTOR):
    """Rows reproducing the inventory arithmetic and the per-share modifications."""
    rows = []
    for inv in inventories:
        replacement = replacement_electricity(inv, factor)
        row = {
            "country": inv.country,
            "fossil_space_water_twh": inv.fossil_space_water,
            "fossil_district_twh": inv.fossil_district,
            "temp_sensitive_fossil_twh": inv.temperature_sensitive_fossil,
            "replacement_electric_twh": replacement,
            "direct_electric_sw_twh": inv.direct_electric_sw,
            "implied_increase_pct": 100.0 * implied_sensitivity_increase(replacement, inv.direct_electric_sw),
            "fossil_process_twh": inv.fossil_process,
        }
        for share in shares:
            spec = build_scenario(inv, share, factor)
            label = spec.label
            row[f"{label}_increase_pct"] = 100.0 * (spec.hdh_multiplier - 1.0)
            row[f"{label}_constant_twh"] = spec.baseload_twh
        rows.append(row)
    return rows


@dataclass(frozen=True)
class ElectrifiedModel:
    """A calibrated model with scaled heating coefficients and a flat added load.

    Consumption is ``exp(X beta') + baseload``: the baseload is added in MWh
    after exponentiation so it does not scale with the hourly profile.
    """

    base: CalibratedModel
    spec: ScenarioSpec
    coefficients: np.ndarray

    @property
    def schema(self):
        return self.base.schema

    @property
    def baseload_mwh_per_hour(self) -> float:
        return self.spec.baseload_mwh_per_hour

    def predict(self, X: FeatureMatrix) -> HourlySeries:
        if tuple(X.columns) != self.base.schema:
            raise ContractError("feature schema does not match the model schema")
        load = np.exp(X.values @ self.coefficients) + self.baseload_mwh_per_hour
        return HourlySeries(X.timestamps, load, "MWh")


def apply_electrification(model: CalibratedModel, spec: ScenarioSpec) -> ElectrifiedModel:
    missing = [c for c in HDH_COLUMNS if c not in model.schema]
    if missing:
        raise ContractError(f"model schema lacks heating columns {missing}")
    idx = [model.schema.index(c) for c in HDH_COLUMNS]
    coef = model.coefficients.copy()
    if np.any(coef[idx] < 0) and spec.hdh_multiplier != 1.0:
        warnings.warn(
            f"{model.country}: negative heating coefficients are scaled too; "
            "consumption may fall with electrification at some stations",
            stacklevel=2,
        )
    coef[idx] = coef[idx] * spec.hdh_multiplier
    return ElectrifiedModel(base=model, spec=spec, coefficients=coef)


def bau(country: str) -> ScenarioSpec:
    return ScenarioSpec(country=country, share=0.0, hdh_multiplier=1.0, baseload_twh=0.0)
