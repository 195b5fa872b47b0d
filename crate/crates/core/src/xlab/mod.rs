//! Experiment harness: theorem-indexed Monte Carlo campaigns, record and
//! summary files, and the command-line front end.

pub mod cli;
mod config;
mod output;
mod run;

use std::path::Path;

use thiserror::Error;

use crate::limits::LimitsError;
use crate::mat::MatError;
use crate::norms::NormError;

pub use config::{law_is_centered, ExperimentConfig, MethodChoice, OutputPaths, SolverOptions};
pub use output::{emit_plotdata, emit_records, emit_summary, read_records, read_summary};
pub use run::{
    build_reference, median, quantile, run_experiment, run_experiment_with_threads, summarize, trial_rng,
    DiagnosticsSummary, ExperimentOutput, Summary, SummaryRow, TrialRecord,
};

#[derive(Debug, Error)]
pub enum XlabError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("regime error: {0}")]
    Regime(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("solver: {0}")]
    Solver(String),
}

impl XlabError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        XlabError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Process exit code: 2 usage, 3 regime, 4 input or output.
    pub fn exit_code(&self) -> i32 {
        match self {
            XlabError::Usage(_) | XlabError::Solver(_) => 2,
            XlabError::Regime(_) => 3,
            XlabError::Io { .. } | XlabError::Parse(_) => 4,
        }
    }
}

impl From<MatError> for XlabError {
    fn from(e: MatError) -> Self {
        match e {
            MatError::Io { path, source } => XlabError::Io { path, source },
            MatError::Regime(m) => XlabError::Regime(m),
            MatError::NotPairable(_) => XlabError::Solver(e.to_string()),
            other => XlabError::Parse(other.to_string()),
        }
    }
}

impl From<LimitsError> for XlabError {
    fn from(e: LimitsError) -> Self {
        match e {
            LimitsError::Regime(m) => XlabError::Regime(m),
            LimitsError::Io { path, message } => XlabError::Io {
                path,
                source: std::io::Error::other(message),
            },
            other => XlabError::Usage(other.to_string()),
        }
    }
}

impl From<NormError> for XlabError {
    fn from(e: NormError) -> Self {
        XlabError::Solver(e.to_string())
    }
}
