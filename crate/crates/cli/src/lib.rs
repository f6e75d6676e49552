//! Pipeline front end for the `festcircuit` command: configuration, input
//! loading and validation, analysis runs and their manifest.

pub mod config;
pub mod manifest;
pub mod output;
pub mod pipeline;

pub use config::{Overrides, RunConfig, DATA_DIR_ENV};
pub use pipeline::{run, validate, Analysis, RunOutcome, ValidationReport};
