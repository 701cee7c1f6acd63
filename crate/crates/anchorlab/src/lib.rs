//! Experiment harness, file formats, geo transform, field-log replay, and
//! the command-line surface built on top of [`anchorlab_core`].
//!
//! The core crate owns the math; this crate owns everything that touches
//! the OS: wall-clock timing of the solvers, CSV and PGM files, and the
//! `anchorlab` binary.

pub mod cli;
pub mod experiments;
pub mod field;
pub mod formats;

pub use anchorlab_core as core;

use std::string::String;

/// Errors from the harness layers on top of the core math.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] anchorlab_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

impl HarnessError {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        HarnessError::Parse { line, msg: msg.into() }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        HarnessError::Invalid(msg.into())
    }
}
