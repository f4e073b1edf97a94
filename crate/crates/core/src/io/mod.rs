//! Configuration, scenarios, sample ingestion and exporters.

pub mod config;
pub mod export;
pub mod ingest;
pub mod run;
pub mod scenario;

pub use config::{parse_config, ScenarioConfig, ScenarioSource};
pub use ingest::{export_samples, ingest_samples, parse_samples, SampledData};
pub use run::{exit_code, run_scenario, RunOutcome};
pub use scenario::{builtin, Scenario};
