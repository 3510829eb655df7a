//! Scenario configuration, twin experiment, scheme runs and export.

mod config;
mod export;
mod runner;

pub use config::{
    load_config, parse_config, ForcingConfig, ForecastError, GridConfig, InitialConfig,
    NoiseSettings, ScenarioConfig, Scheme, SensorConfig, SensorLattice, SoilConfig, SoilLayout,
    SoilShift,
};
pub use export::{
    comparison_csv, export_artifacts, metrics_csv, model_changes_csv, snapshot_csv,
    METRICS_HEADER, MODEL_CHANGES_HEADER, SNAPSHOT_HEADER,
};
pub use runner::{
    compare_schemes,    estimator_dynamics, estimator_settings, percent_mae, run_scheme, run_truth, truth_dynamics,
    RunArtifacts, StateSnapshot, TruthRun,
};
