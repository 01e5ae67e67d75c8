//! Error type shared by every module in the crate.

use alloc::string::String;

/// Errors surfaced by dataset ingest, graph construction, and training.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Matrix or vector shapes do not line up.
    Dimension(String),
    /// An operation produced or was handed a NaN/Inf value.
    NonFinite(String),
    /// A parameter is outside its documented range.
    Parameter(String),
    /// A CSV row failed to parse. `line` is 1-based and counts the header.
    Parse { line: usize, message: String },
    /// Rows disagree on column count / feature dimensionality.
    Schema(String),
    /// Training was requested on a table with no labeled nodes.
    NoLabels,
    /// An evaluation mask selected no nodes.
    EmptyMask,
    /// The SMO solver hit its iteration cap before reaching tolerance.
    NonConvergence { violation: f64 },
    /// Training loss became non-finite at the given epoch.
    Diverged { epoch: usize },
}

pub type Result<T> = core::result::Result<T, Error>;

impl core::fmt::Display for Error {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Error::Dimension(msg) => write!(f, "dimension mismatch: {msg}"),
            Error::NonFinite(msg) => write!(f, "non-finite value: {msg}"),
            Error::Parameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::Parse { line, message } => write!(f, "parse error at line {line}: {message}"),
            Error::Schema(msg) => write!(f, "schema error: {msg}"),
            Error::NoLabels => write!(f, "table has no labeled nodes"),
            Error::EmptyMask => write!(f, "evaluation mask is empty"),
            Error::NonConvergence { violation } => {
                write!(f, "SMO did not converge; final KKT violation {violation:e}")
            }
            Error::Diverged { epoch } => write!(f, "training loss became non-finite at epoch {epoch}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
