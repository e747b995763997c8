//! Command line pipeline for permeability estimation: configuration, single
//! pressure-drop runs and seeded Monte Carlo sweeps.

pub mod config;
pub mod error;
pub mod pipeline;
pub mod report;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
pub use pipeline::{run_montecarlo, run_single, Model};
