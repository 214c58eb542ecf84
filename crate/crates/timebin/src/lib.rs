//! Configuration, orchestration, file formats and command line for the
//! time-bin QKD simulator built on `timebin-core`.

pub mod alist;
pub mod config;
pub mod error;
pub mod pipeline;
pub mod report;
pub mod sweep;

pub use config::ExperimentConfig;
pub use error::{AppError, AppResult};
pub use pipeline::{run_pipeline, Run, RunReport};
pub use sweep::{run_sweep, SweepOutcome};
