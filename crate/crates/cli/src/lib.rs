//! Command implementations behind the `dvsl` binary: train, eval, probe,
//! report and demo. The binary is a thin argument layer over these.

pub mod config;
pub mod controllers;
pub mod demo;
pub mod error;
pub mod eval;
pub mod probe;
pub mod report;
pub mod train;

pub use config::{ExperimentConfig, Preset};
pub use controllers::ControllerArg;
pub use error::{CliError, Result};
