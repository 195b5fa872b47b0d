//! Symmetric heavy-tailed matrices, their magnitude split and pairing.

mod decompose;
mod diagnostics;
mod sparse;
mod symmetric;

use std::path::Path;

pub use decompose::{decompose, default_thresholds, gamma_of, reassemble, Decomposition, Regime};
pub use diagnostics::{diagnostics, diagnostics_with_bn, TypicalityReport, DEFAULT_DELTA};
pub use sparse::{compact_large, Compaction, PairedSparseMatrix, SparseEntries};
pub use symmetric::{count_exceeding, max_abs_entry, sample_matrix, SymmetricMatrix};

#[derive(Debug, thiserror::Error)]
pub enum MatError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("regime violation: {0}")]
    Regime(String),
    #[error("not pairable: {0}")]
    NotPairable(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl MatError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        MatError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
