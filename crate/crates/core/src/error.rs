use thiserror::Error;

use crate::expr_parser::{EvalError, ParseError};
use crate::jets::JetError;
use crate::pseudo_linalg::LinalgError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the geometry pipeline.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    /// The surface is not space-like, or a frame could not be built, at a node.
    #[error("degenerate geometry at (s, t) = ({s}, {t}): {reason}")]
    Degenerate { s: f64, t: f64, reason: String },
    /// A logarithm or similar was asked for outside its domain.
    #[error("domain error at (s, t) = ({s}, {t}): {quantity} has non-positive argument {value:e}")]
    Domain {
        s: f64,
        t: f64,
        quantity: String,
        value: f64,
    },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn degenerate(s: f64, t: f64, reason: impl Into<String>) -> Self {
        Error::Degenerate {
            s,
            t,
            reason: reason.into(),
        }
    }

    /// True for failures caused by the data (domain, degeneracy, precondition),
    /// as opposed to malformed input or I/O trouble.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::Degenerate { .. }
                | Error::Domain { .. }
                | Error::Precondition(_)
                | Error::Jet(_)
                | Error::Eval(_)
                | Error::Linalg(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
