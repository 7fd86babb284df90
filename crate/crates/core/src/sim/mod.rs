//! Monte-Carlo experiment engine.

pub mod config;
pub mod monte_carlo;
pub mod presets;
pub mod roc;
pub mod stats;
pub mod sweep;
pub mod trial;

pub use config::{ExperimentConfig, Policy, SweepAxis};
pub use monte_carlo::{monte_carlo, MonteCarloRun, PolicySummary};
pub use presets::{preset, PRESET_NAMES};
pub use roc::{roc, roc_points, RocPoint, RocResult};
pub use sweep::{rows_to_csv, sweep, sweep_to_writer, SweepRow, CSV_HEADER};
pub use trial::{run_trial, Scenario};
