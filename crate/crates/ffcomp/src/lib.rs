//! Experiment harness for the feedforward steering compensator: TOML
//! configuration, CSV logs, model files, reports and the end-to-end pipeline.
//! The algorithms live in `ffcomp-core`.

pub mod config;
pub mod csvio;
pub mod error;
pub mod model_io;
pub mod pipeline;
pub mod report;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
