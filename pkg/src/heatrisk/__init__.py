"""Weather risk of heating electrification in hourly power consumption."""
from .calibrate import (
    CalibratedModel,
    ErrorMetrics,
    LogLinearConsumptionModel,
    accuracy,
    effect_size,
    effect_sizes,
    fit_ols,
    predict,
    split_train_valid,
)
from .features import (
    SCHEMA,
    DesignMatrixBuilder,
    FeatureMatrix,
    StationTemperature,
    build_design_matrix,
    cooling_degree_hours,
    heating_degree_hours,
)
from .risk import (
    DensityCurve,
    DurationCurve,
    RiskSummary,
    cvar_upper,
    kde_density,
    load_duration,
    representative_duration_curves,
    scenario_statistics,
)
from .scenario import (
    ElectrifiedModel,
    HeatingInventory,
    ScenarioSpec,
    apply_electrification,
    build_scenario,
    implied_sensitivity_increase,
    replacement_electricity,
)
from .config import RunConfig, load_config
from .pipeline import RunManifest, run_pipeline
from .series import HourlySeries
from .simulate import (
    CountryDrivers,
    SimulationResult,
    VreCapacity,
    aggregate_nordic,
    project_consumption,
    residual_demand,
    simulate_scenario,
    vre_generation,
)
from .weathergen import (
    WeatherArchive,
    WeatherScenario,
    map_to_target_calendar,
    select_scenarios,
    shifted_date_scenarios,
)

__version__ = "0.1.0"
