//! Experiment runner for the gradient-bound solver: configurable problem families,
//! CSV and SVG reports, and a seeded property suite over the core invariants.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod build;
pub mod config;
pub mod properties;
pub mod run;
pub mod svg;

use std::path::PathBuf;

use lipbound_core::{GeometryError, NormError, RearrangementError, SolverError, YoungError};
use thiserror::Error;

pub use config::ExperimentConfig;
pub use properties::{property_suite, PropertyOutcome, SuiteOptions};
pub use run::{run_experiment, AssertOutcome, Report, Row};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Young(#[from] YoungError),
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error(transparent)]
    Rearrangement(#[from] RearrangementError),
}

impl HarnessError {
    /// Exit code for the command-line tool: configuration and I/O problems are usage
    /// errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Io { .. } | HarnessError::Csv(_) => 2,
            _ => 1,
        }
    }
}
