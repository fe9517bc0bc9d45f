//! Config-driven experiments on top of `jump_spectra`.

pub mod config;
pub mod error;
pub mod plots;
pub mod tasks;
pub mod verify;

pub use config::{ExperimentConfig, Overrides, Resolved, Task};
pub use error::{CliError, Result};
