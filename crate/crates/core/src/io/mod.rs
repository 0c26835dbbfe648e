//! Configuration, persistence and report emission.

pub mod config;
pub mod experiment;
pub mod report;
pub mod snapshot;
pub mod verify;

pub use config::{Check, ExperimentConfig};
pub use experiment::{evaluate_checks, output_root, run_batch, run_experiment, ReportBundle, OUT_ENV};
pub use report::{fmt_f64, loglog_svg, read_series, write_checks, write_diagnostics, write_energy, CheckRow};
pub use snapshot::Snapshot;
pub use verify::{run_suite, Suite};
