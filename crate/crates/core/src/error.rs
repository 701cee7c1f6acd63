//! Error type shared by all core modules.

use alloc::string::String;
use core::fmt;

/// Errors reported by geometry construction, GDOP evaluation, noise
/// simulation, and the localizers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A parameter or input value violates a precondition.
    InvalidInput(String),
    /// A distance collapsed to zero: the evaluation point coincides with an
    /// anchor, so bearings (and anything built on them) are undefined.
    Singularity(String),
    /// The anchor geometry is degenerate (e.g. all anchors collinear), so no
    /// finite answer exists.
    DegenerateGeometry(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::Singularity(msg) => write!(f, "singularity: {msg}"),
            Error::DegenerateGeometry(msg) => write!(f, "degenerate geometry: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
