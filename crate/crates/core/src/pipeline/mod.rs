//! File formats, configuration and the commands behind the `sicspin` binary.
//!
//! Traces are CSV with a mandatory header row and unit-suffixed column names.
//! Lines starting with `#` are comments; writers use them for provenance.
//! Numbers are written with 17 significant digits so a write/read cycle is
//! exact.

mod commands;
mod config;
mod csv_io;
mod report;
pub mod svg;

use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub use commands::{
    cmd_fit, cmd_report, cmd_simulate, cmd_thermometry, FitOptions, ModelFit, ReportOptions, SeriesReport, SimulateOutput,
    ThermometryResult, DEFAULT_LINEAR_WINDOW, DEFAULT_RAMAN_WINDOW,
};
pub use config::{ExperimentConfig, ExperimentKind, Grid, ZfsSource, CONFIG_KEYS};
pub use csv_io::{
    format_number, ingest, ingest_series, ingest_trace, read_trace_auto, render_series, render_trace, write_series,
    write_trace, Ingested, Quantity,
    Schema, SeriesRow, TemperatureSeries,
};
pub use report::{input_digest, FitReport};

use crate::dynamics::DynamicsError;
use crate::fitting::{FitError, GuessError};
use crate::spin_model::SpinModelError;
use crate::temperature::TemperatureError;
use crate::trace::TraceError;

/// Process exit status for each error class.
pub mod exit_code {
    pub const SUCCESS: i32 = 0;
    pub const VALIDATION: i32 = 2;
    pub const NOT_CONVERGED: i32 = 3;
    pub const IO: i32 = 4;
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}, line {line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },
    #[error("config line {line}, key `{key}`: {message}")]
    Config { line: usize, key: String, message: String },
    #[error("{0}")]
    Validation(String),
    #[error("fit did not converge after {iterations} iterations (report written to {report})")]
    NotConverged { iterations: usize, report: String },
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Guess(#[from] GuessError),
    #[error(transparent)]
    Temperature(#[from] TemperatureError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Spin(#[from] SpinModelError),
    #[error(transparent)]
    Trace(#[from] TraceError),
}

impl PipelineError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        PipelineError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Io { .. } => exit_code::IO,
            PipelineError::NotConverged { .. } | PipelineError::Fit(FitError::Degenerate { .. }) => {
                exit_code::NOT_CONVERGED
            }
            _ => exit_code::VALIDATION,
        }
    }
}

pub type Result<T> = std::result::Result<T, PipelineError>;
