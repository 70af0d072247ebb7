//! File formats, experiment configuration and the `trf` command line for
//! the `trf-core` toolkit.

use std::path::{Path, PathBuf};

use thiserror::Error;

pub mod cli;
pub mod config;
pub mod jsonl;
pub mod tables;

pub use trf_core;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("record {index} is out of log order")]
    UnsortedInput { index: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{}: {source}", path.display())]
    InFile { path: PathBuf, source: Box<FormatError> },
}

impl FormatError {
    pub fn io_at(path: &Path, e: std::io::Error) -> Self {
        FormatError::InFile { path: path.to_path_buf(), source: Box::new(FormatError::Io(e)) }
    }

    /// Attaches the file the error came from.
    pub fn in_file(self, path: &Path) -> Self {
        match self {
            e @ FormatError::InFile { .. } => e,
            e => FormatError::InFile { path: path.to_path_buf(), source: Box::new(e) },
        }
    }
}
